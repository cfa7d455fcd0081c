"""Load bodymark datasets through their on-disk interface only.

The harness never imports the generator package: it reads manifest.json
and the PNG files it points to. Images are decoded with Pillow, resized,
inverted (marks become bright on a black background, so the tensors are
sparse instead of ~99% white), and cached as float tensors in memory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

MANIFEST_NAME = "manifest.json"


class HarnessConfigError(Exception):
    """Bad dataset, label family, or experiment configuration."""


@dataclass
class ManifestInfo:
    directory: Path
    family: str
    config_digest: str
    entries: list[dict]

    def labels(self) -> list[str]:
        return sorted({e["label"] for e in self.entries})


def read_manifest(directory: str | Path) -> ManifestInfo:
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    if not path.is_file():
        raise HarnessConfigError(f"no {MANIFEST_NAME} in {directory}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    for key in ("family", "config_digest", "entries"):
        if key not in doc:
            raise HarnessConfigError(f"manifest {path} lacks {key!r}")
    return ManifestInfo(
        directory=directory,
        family=doc["family"],
        config_digest=doc["config_digest"],
        entries=doc["entries"],
    )


@dataclass
class ImageSet:
    """One split of one dataset as tensors, with its class vocabulary."""

    images: torch.Tensor  # (N, 3, H, W) float32 in [0, 1]
    labels: torch.Tensor  # (N,) int64 indices into classes
    classes: list[str]
    split: str
    family: str
    config_digest: str

    def __len__(self) -> int:
        return self.images.shape[0]


def load_split(
    directory: str | Path,
    split: str,
    image_size: tuple[int, int] = (125, 100),
    classes: list[str] | None = None,
) -> ImageSet:
    """Load all images whose manifest split field equals ``split``.

    ``image_size`` is (width, height). Train/test separation is enforced
    here: only entries tagged with the requested split are ever read, and
    each entry's path must live under that split's directory.
    """
    info = read_manifest(directory)
    selected = [e for e in info.entries if e["split"] == split]
    if not selected:
        raise HarnessConfigError(f"{directory} has no entries for split {split!r}")
    for e in selected:
        if not e["path"].startswith(f"{split}/"):
            raise HarnessConfigError(
                f"entry {e['path']} tagged {split!r} lives outside the {split}/ tree"
            )
    if classes is None:
        classes = sorted({e["label"] for e in info.entries})
    index = {label: i for i, label in enumerate(classes)}
    w, h = image_size
    images = torch.empty((len(selected), 3, h, w), dtype=torch.float32)
    labels = torch.empty(len(selected), dtype=torch.int64)
    for i, entry in enumerate(sorted(selected, key=lambda e: e["path"])):
        if entry["label"] not in index:
            raise HarnessConfigError(
                f"label {entry['label']!r} not in class vocabulary {classes}"
            )
        img = Image.open(info.directory / entry["path"]).convert("RGB")
        img = img.resize((w, h), Image.BILINEAR)
        arr = 1.0 - np.asarray(img, dtype=np.float32) / 255.0
        images[i] = torch.from_numpy(arr).permute(2, 0, 1)
        labels[i] = index[entry["label"]]
    return ImageSet(
        images=images,
        labels=labels,
        classes=list(classes),
        split=split,
        family=info.family,
        config_digest=info.config_digest,
    )
