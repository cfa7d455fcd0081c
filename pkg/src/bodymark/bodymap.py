"""Drawable-area mask, 12-region partition, and mask-constrained sampling.

The default mask is a rectangle inset by a margin; users with real body-map
artwork supply a silhouette PNG instead (luminance > 127 means drawable).
The region partition splits the mask bounding box into an equal-cell grid
(3×4 by default, row-major ids 0..11, remainder pixels folded into the last
row/column); a region-map PNG with the gray levels 10, 30, ..., 230 can
replace the grid for custom region shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import png
from .errors import ConfigurationError, SamplingExhaustedError
from .geometry import Point, RandomStream

REGION_COUNT = 12

#: Gray levels encoding region ids 0..11 in a region-map PNG.
REGION_GRAY_LEVELS = tuple(10 + 20 * i for i in range(REGION_COUNT))

DEFAULT_MAX_TRIES = 1000


@dataclass
class BodyMask:
    """Binary drawable-area raster. Immutable after construction."""

    width: int
    height: int
    inside: np.ndarray  # bool, shape (height, width)

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ConfigurationError("mask dimensions must be at least 1x1")
        if self.inside.shape != (self.height, self.width):
            raise ConfigurationError("mask raster shape does not match dimensions")
        if self.inside.dtype != np.bool_:
            self.inside = self.inside.astype(bool)
        if not self.inside.any():
            raise ConfigurationError("mask has no inside pixels")
        self.inside.setflags(write=False)

    def bbox(self) -> tuple[int, int, int, int]:
        """Inclusive (x0, y0, x1, y1) bounding box of the inside pixels."""
        ys, xs = np.nonzero(self.inside)
        return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


@dataclass
class RegionPartition:
    """Per-pixel region ids for inside pixels (-1 outside), always 12 regions."""

    region_id: np.ndarray  # int16, shape (height, width), -1 outside
    rows: int
    cols: int
    region_count: int = REGION_COUNT

    def pixels_in(self, region: int) -> int:
        return int((self.region_id == region).sum())


@dataclass
class SampleDomain:
    """A mask, optionally narrowed to one region of a partition."""

    mask: BodyMask
    partition: RegionPartition | None = None
    region_id: int | None = None
    _bbox: tuple[int, int, int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.region_id is not None:
            if self.partition is None:
                raise ConfigurationError("region-constrained domain needs a partition")
            if not 0 <= self.region_id < self.partition.region_count:
                raise ConfigurationError(f"region id {self.region_id} out of range")
            member = self.partition.region_id == self.region_id
            if not member.any():
                raise ConfigurationError(f"region {self.region_id} has no pixels")
            ys, xs = np.nonzero(member)
            self._bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
        else:
            self._bbox = self.mask.bbox()


def default_mask(width: int, height: int, margin: int) -> BodyMask:
    """Axis-aligned rectangle inset by ``margin`` on all sides."""
    if margin < 0:
        raise ConfigurationError("margin must be non-negative")
    if width <= 2 * margin or height <= 2 * margin:
        raise ConfigurationError(
            f"degenerate mask: {width}x{height} with margin {margin}"
        )
    inside = np.zeros((height, width), dtype=bool)
    inside[margin : height - margin, margin : width - margin] = True
    return BodyMask(width, height, inside)


def _luminance(rgba: np.ndarray) -> np.ndarray:
    # Integer Rec.601 luma; alpha is ignored.
    r = rgba[..., 0].astype(np.uint32)
    g = rgba[..., 1].astype(np.uint32)
    b = rgba[..., 2].astype(np.uint32)
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def load_mask(image_file: str | Path) -> BodyMask:
    """Load a silhouette PNG; a pixel is inside iff its luminance > 127."""
    data = Path(image_file).read_bytes()
    rgba = png.decode(data)
    inside = _luminance(rgba) > 127
    if not inside.any():
        raise ConfigurationError(f"mask {image_file} has no pixels above threshold")
    h, w = inside.shape
    return BodyMask(w, h, inside)


def build_partition(mask: BodyMask, rows: int = 3, cols: int = 4) -> RegionPartition:
    """Split the mask bounding box into a rows×cols grid of equal cells.

    Remainder pixels go to the last row/column; region id is the row-major
    cell index; pixels outside the mask stay -1.
    """
    if rows * cols != REGION_COUNT:
        raise ConfigurationError(f"rows*cols must be {REGION_COUNT}, got {rows}x{cols}")
    if rows < 1 or cols < 1:
        raise ConfigurationError("rows and cols must be positive")
    x0, y0, x1, y1 = mask.bbox()
    bw = x1 - x0 + 1
    bh = y1 - y0 + 1
    if bw < cols or bh < rows:
        raise ConfigurationError(
            f"mask bounding box {bw}x{bh} too small for a {rows}x{cols} grid"
        )
    cell_w = bw // cols
    cell_h = bh // rows
    xs = np.arange(mask.width)
    ys = np.arange(mask.height)
    col_idx = np.clip((xs - x0) // cell_w, 0, cols - 1)
    row_idx = np.clip((ys - y0) // cell_h, 0, rows - 1)
    region = (row_idx[:, None] * cols + col_idx[None, :]).astype(np.int16)
    region[~mask.inside] = -1
    region.setflags(write=False)
    return RegionPartition(region_id=region, rows=rows, cols=cols)


def load_region_map(image_file: str | Path, mask: BodyMask) -> RegionPartition:
    """Read per-pixel region ids from a PNG of 12 documented gray levels."""
    rgba = png.decode(Path(image_file).read_bytes())
    if rgba.shape[:2] != (mask.height, mask.width):
        raise ConfigurationError("region map dimensions do not match the mask")
    luma = _luminance(rgba).astype(np.int32)
    region = np.full(luma.shape, -1, dtype=np.int16)
    for rid, level in enumerate(REGION_GRAY_LEVELS):
        region[luma == level] = rid
    unresolved = mask.inside & (region < 0)
    if unresolved.any():
        n = int(unresolved.sum())
        raise ConfigurationError(
            f"region map leaves {n} inside pixels without a region gray level"
        )
    region[~mask.inside] = -1
    region.setflags(write=False)
    # rows/cols are grid metadata; a painted map has no grid shape.
    return RegionPartition(region_id=region, rows=0, cols=0)


def contains(domain: SampleDomain, p: Point) -> bool:
    """True iff the floor-rounded pixel of ``p`` is inside the domain."""
    px = math.floor(p.x)
    py = math.floor(p.y)
    if not (0 <= px < domain.mask.width and 0 <= py < domain.mask.height):
        return False
    if not domain.mask.inside[py, px]:
        return False
    if domain.region_id is not None:
        return int(domain.partition.region_id[py, px]) == domain.region_id
    return True


def sample_point(
    domain: SampleDomain, stream: RandomStream, max_tries: int = DEFAULT_MAX_TRIES
) -> Point:
    """Uniform point in the domain via rejection over its bounding box.

    Draw order per try is frozen: x, then y.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be at least 1")
    x0, y0, x1, y1 = domain._bbox
    for _ in range(max_tries):
        x = stream.uniform(x0, x1 + 1)
        y = stream.uniform(y0, y1 + 1)
        p = Point(x, y)
        if contains(domain, p):
            return p
    raise SamplingExhaustedError(
        f"no point accepted in {max_tries} tries; domain is implausibly sparse"
    )
