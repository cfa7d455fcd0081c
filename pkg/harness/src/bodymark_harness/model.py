"""The fixed small classifier used for every experiment condition.

Layer plan (frozen; documented here and in the report):

    3 x [conv 3x3 (3->16->32->64), GroupNorm(8), ReLU, maxpool 2]
    maxpool 2
    flatten -> dropout 0.5 -> linear -> 128, ReLU
    linear 128 -> num_classes

No global pooling: region-constrained classes are defined by position, so
the embedding keeps a (downsampled) spatial layout. GroupNorm rather than
BatchNorm because fine-tuning batches can be as small as the 25-image
few-shot set; the extra pool and the dropout keep the fully connected part
small enough not to memorize a 250-image training set outright.
"""

from __future__ import annotations

import torch
from torch import nn


def _block(cin: int, cout: int) -> list[nn.Module]:
    return [
        nn.Conv2d(cin, cout, 3, padding=1),
        nn.GroupNorm(8, cout),
        nn.ReLU(inplace=True),
        nn.MaxPool2d(2),
    ]


class SmallConvNet(nn.Module):
    def __init__(self, num_classes: int, image_size: tuple[int, int] = (125, 100)):
        super().__init__()
        w, h = image_size
        self.image_size = image_size
        self.features = nn.Sequential(
            *_block(3, 16), *_block(16, 32), *_block(32, 64), nn.MaxPool2d(2)
        )
        fw, fh = w // 16, h // 16
        self.embed = nn.Sequential(
            nn.Flatten(),
            nn.Dropout(0.5),
            nn.Linear(64 * fw * fh, 128),
            nn.ReLU(inplace=True),
        )
        self.head = nn.Linear(128, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.embed(self.features(x)))


def with_new_head(model: SmallConvNet, num_classes: int) -> SmallConvNet:
    """Copy of the model with a freshly initialized classification head."""
    clone = SmallConvNet(model.head.out_features, model.image_size)
    clone.load_state_dict(model.state_dict())
    clone.head = nn.Linear(128, num_classes)
    return clone
