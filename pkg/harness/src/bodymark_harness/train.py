"""Training and evaluation: pretraining on synthetic sets, fine-tuning on diagnoses."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn
from torch.utils.data import DataLoader, TensorDataset

from .data import HarnessConfigError, ImageSet, load_split
from .model import SmallConvNet, with_new_head

PRETRAIN_FAMILIES = ("basic3", "regions36")
EVAL_FAMILY = "diagnoses"

#: Sanity bar: a pretrained model must at least fit its own synthetic task.
PRETRAIN_TRAIN_ACC_BAR = 0.90


@dataclass
class TrainSettings:
    epochs: int = 15
    lr: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    weight_decay: float = 0.05
    #: Random horizontal/vertical batch flips. Label-preserving for every
    #: task here EXCEPT regions36, whose labels are positional; keep this
    #: off when training on region-labeled data.
    augment_flips: bool = True


def train_classifier(
    model: SmallConvNet, data: ImageSet, settings: TrainSettings
) -> float:
    """Train in place; returns final accuracy on the training data itself."""
    torch.manual_seed(settings.seed)
    generator = torch.Generator().manual_seed(settings.seed)
    loader = DataLoader(
        TensorDataset(data.images, data.labels),
        batch_size=settings.batch_size,
        shuffle=True,
        generator=generator,
    )
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=settings.lr, weight_decay=settings.weight_decay
    )
    loss_fn = nn.CrossEntropyLoss()
    model.train()
    for _ in range(settings.epochs):
        for images, labels in loader:
            if settings.augment_flips:
                if torch.rand((), generator=generator) < 0.5:
                    images = torch.flip(images, [3])
                if torch.rand((), generator=generator) < 0.5:
                    images = torch.flip(images, [2])
            optimizer.zero_grad()
            loss = loss_fn(model(images), labels)
            loss.backward()
            optimizer.step()
    accuracy, _ = evaluate(model, data)
    return accuracy


@torch.no_grad()
def evaluate(model: SmallConvNet, data: ImageSet) -> tuple[float, torch.Tensor]:
    """(accuracy, confusion matrix).

    Accuracy is the exact integer count of label matches over the total,
    so it equals the confusion-matrix trace divided by the test count
    bit-for-bit.
    """
    model.eval()
    preds = []
    for start in range(0, len(data), 256):
        logits = model(data.images[start : start + 256])
        preds.append(logits.argmax(dim=1))
    preds = torch.cat(preds)
    correct = int((preds == data.labels).sum())
    accuracy = correct / len(data)
    n = len(data.classes)
    confusion = torch.zeros((n, n), dtype=torch.int64)
    for true, pred in zip(data.labels.tolist(), preds.tolist()):
        confusion[true, pred] += 1
    return accuracy, confusion


@dataclass
class PretrainedWeights:
    state_dict: dict
    classes: list[str]
    family: str
    config_digest: str
    train_accuracy: float
    image_size: tuple[int, int]

    def save(self, path: str | Path) -> None:
        torch.save(
            {
                "state_dict": self.state_dict,
                "classes": self.classes,
                "family": self.family,
                "config_digest": self.config_digest,
                "train_accuracy": self.train_accuracy,
                "image_size": list(self.image_size),
            },
            path,
        )

    @classmethod
    def load(cls, path: str | Path) -> "PretrainedWeights":
        doc = torch.load(path, weights_only=False)
        return cls(
            state_dict=doc["state_dict"],
            classes=doc["classes"],
            family=doc["family"],
            config_digest=doc["config_digest"],
            train_accuracy=doc["train_accuracy"],
            image_size=tuple(doc["image_size"]),
        )


def pretrain(
    dataset_dir: str | Path,
    settings: TrainSettings,
    image_size: tuple[int, int] = (125, 100),
) -> PretrainedWeights:
    """Train a classifier on a synthetic basic3/regions36 dataset."""
    data = load_split(dataset_dir, "train", image_size)
    if data.family not in PRETRAIN_FAMILIES:
        raise HarnessConfigError(
            f"pretraining expects a basic3 or regions36 dataset, got {data.family!r}"
        )
    model = SmallConvNet(len(data.classes), image_size)
    train_acc = train_classifier(model, data, settings)
    if train_acc < PRETRAIN_TRAIN_ACC_BAR:
        raise HarnessConfigError(
            f"pretraining on {dataset_dir} only reached train accuracy "
            f"{train_acc:.3f} (< {PRETRAIN_TRAIN_ACC_BAR}); increase epochs"
        )
    return PretrainedWeights(
        state_dict=model.state_dict(),
        classes=data.classes,
        family=data.family,
        config_digest=data.config_digest,
        train_accuracy=train_acc,
        image_size=image_size,
    )


def finetune_and_eval(
    weights: PretrainedWeights | None,
    train_dir: str | Path,
    test_dir: str | Path,
    settings: TrainSettings,
    image_size: tuple[int, int] = (125, 100),
) -> tuple[float, torch.Tensor]:
    """Fine-tune (or train from scratch if weights is None) on the diagnosis task.

    Returns (test accuracy, test confusion matrix). The classification head
    is always resized to the diagnosis classes; all layers train.
    """
    train_data = load_split(train_dir, "train", image_size)
    test_data = load_split(test_dir, "test", image_size, classes=train_data.classes)
    if train_data.family != EVAL_FAMILY or test_data.family != EVAL_FAMILY:
        raise HarnessConfigError(
            f"fine-tuning expects diagnoses datasets, got "
            f"{train_data.family!r}/{test_data.family!r}"
        )
    if weights is None:
        torch.manual_seed(settings.seed)  # seeded init for the scratch baseline
        model = SmallConvNet(len(train_data.classes), image_size)
    else:
        if tuple(weights.image_size) != tuple(image_size):
            raise HarnessConfigError(
                f"weights were pretrained at {weights.image_size}, asked for {image_size}"
            )
        base = SmallConvNet(len(weights.classes), image_size)
        base.load_state_dict(weights.state_dict)
        torch.manual_seed(settings.seed)  # seeded init for the new head
        model = with_new_head(base, len(train_data.classes))
    train_classifier(model, train_data, settings)
    return evaluate(model, test_data)
