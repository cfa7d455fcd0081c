"""Deterministic rendering of primitives onto RGBA canvases.

No anti-aliasing: a pixel is covered iff its center (x+0.5, y+0.5) lies
within stroke_width/2 of the flattened polyline (lines) or within
point_radius of a cluster point. Hard edges keep output bit-identical
across platforms, which matters more here than smoothness.

Dashed lines are traversed by cumulative arc length along the flattened
polyline, alternating on/off spans starting with "on".
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import png
from .errors import ConfigurationError
from .geometry import FLATTEN_TOLERANCE, Point, dist, flatten, lerp
from .primitives import DashPattern, Primitive, PrimitiveKind

RGBA = tuple[int, int, int, int]

BLACK: RGBA = (0, 0, 0, 255)
WHITE: RGBA = (255, 255, 255, 255)


@dataclass
class Canvas:
    width: int
    height: int
    pixels: np.ndarray  # uint8, shape (height, width, 4)

    def __post_init__(self) -> None:
        if self.pixels.shape != (self.height, self.width, 4):
            raise ValueError("pixel buffer shape does not match dimensions")
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixel buffer must be uint8")

    @classmethod
    def transparent(cls, width: int, height: int) -> Canvas:
        return cls(width, height, np.zeros((height, width, 4), dtype=np.uint8))

    @classmethod
    def solid(cls, width: int, height: int, color: RGBA = WHITE) -> Canvas:
        pixels = np.empty((height, width, 4), dtype=np.uint8)
        pixels[:] = np.asarray(color, dtype=np.uint8)
        return cls(width, height, pixels)

    def copy(self) -> Canvas:
        return Canvas(self.width, self.height, self.pixels.copy())


@dataclass(frozen=True)
class StrokeStyle:
    width: float = 3.0
    color: RGBA = BLACK
    point_radius: float = 3.0

    def __post_init__(self) -> None:
        if self.width < 1 or self.point_radius < 1:
            raise ValueError("stroke width and point radius must be >= 1")
        if len(self.color) != 4 or not all(0 <= c <= 255 for c in self.color):
            raise ValueError(f"bad RGBA color {self.color!r}")


def render(canvas: Canvas, primitive: Primitive, style: StrokeStyle) -> Canvas:
    """Draw one primitive in place; returns the canvas for chaining."""
    if style.color[3] == 0:
        return canvas
    coverage = np.zeros((canvas.height, canvas.width), dtype=bool)
    if primitive.kind is PrimitiveKind.POINT_CLUSTER:
        for p in primitive.points:
            _cover_disc(coverage, p, style.point_radius)
    else:
        vertices = flatten(primitive.curve, FLATTEN_TOLERANCE).vertices
        if primitive.kind is PrimitiveKind.DASHED_LINE:
            for chain in dash_chains(vertices, primitive.dash):
                _cover_polyline(coverage, chain, style.width / 2.0)
        else:
            _cover_polyline(coverage, vertices, style.width / 2.0)
    _blend(canvas.pixels, coverage, style.color)
    return canvas


def dash_chains(
    vertices: tuple[Point, ...], dash: DashPattern
) -> list[list[Point]]:
    """Split a polyline into the "on" sub-chains of the dash pattern.

    The walk alternates on/off spans by cumulative arc length, starting on;
    zero-length leftovers are dropped.
    """
    chains: list[list[Point]] = []
    current: list[Point] = [vertices[0]]
    drawing = True
    remaining = dash.on_length
    for a, b in zip(vertices, vertices[1:]):
        seg_len = dist(a, b)
        pos = 0.0
        while seg_len - pos > remaining:
            pos += remaining
            cut = lerp(a, b, pos / seg_len)
            if drawing:
                if cut != current[-1]:
                    current.append(cut)
                if len(current) >= 2:
                    chains.append(current)
            else:
                current = [cut]
            drawing = not drawing
            remaining = dash.on_length if drawing else dash.off_length
        remaining -= seg_len - pos
        if drawing and b != current[-1]:
            current.append(b)
    if drawing and len(current) >= 2:
        chains.append(current)
    return chains


def _cover_polyline(coverage: np.ndarray, vertices, half_width: float) -> None:
    for a, b in zip(vertices, vertices[1:]):
        _cover_segment(coverage, a, b, half_width)


def _cover_segment(coverage: np.ndarray, a: Point, b: Point, r: float) -> None:
    h, w = coverage.shape
    x_lo = max(int(np.floor(min(a.x, b.x) - r - 1)), 0)
    x_hi = min(int(np.ceil(max(a.x, b.x) + r + 1)), w - 1)
    y_lo = max(int(np.floor(min(a.y, b.y) - r - 1)), 0)
    y_hi = min(int(np.ceil(max(a.y, b.y) + r + 1)), h - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    xs = np.arange(x_lo, x_hi + 1) + 0.5
    ys = np.arange(y_lo, y_hi + 1) + 0.5
    px, py = np.meshgrid(xs, ys)
    dx = b.x - a.x
    dy = b.y - a.y
    den = dx * dx + dy * dy
    if den == 0.0:
        d2 = (px - a.x) ** 2 + (py - a.y) ** 2
    else:
        t = np.clip(((px - a.x) * dx + (py - a.y) * dy) / den, 0.0, 1.0)
        d2 = (px - (a.x + t * dx)) ** 2 + (py - (a.y + t * dy)) ** 2
    coverage[y_lo : y_hi + 1, x_lo : x_hi + 1] |= d2 <= r * r


def _cover_disc(coverage: np.ndarray, center: Point, radius: float) -> None:
    _cover_segment(coverage, center, center, radius)


def _blend(pixels: np.ndarray, coverage: np.ndarray, color: RGBA) -> None:
    """Source-over `color` onto the covered pixels (integer-exact for alpha 255)."""
    if not coverage.any():
        return
    src = np.asarray(color, dtype=np.float64)
    if color[3] == 255:
        pixels[coverage] = np.asarray(color, dtype=np.uint8)
        return
    dst = pixels[coverage].astype(np.float64)
    sa = src[3] / 255.0
    da = dst[:, 3] / 255.0
    out_a = sa + da * (1.0 - sa)
    out = np.empty_like(dst)
    safe = out_a > 0
    for c in range(3):
        num = src[c] * sa + dst[:, c] * da * (1.0 - sa)
        out[:, c] = np.where(safe, num / np.maximum(out_a, 1e-12), 0.0)
    out[:, 3] = out_a * 255.0
    pixels[coverage] = np.clip(np.rint(out), 0, 255).astype(np.uint8)


def composite_template(canvas: Canvas, template: Canvas | str | Path) -> Canvas:
    """Put `template` behind the rendered marks (source-over) as a new canvas."""
    if not isinstance(template, Canvas):
        template = decode_png(Path(template).read_bytes())
    if (template.width, template.height) != (canvas.width, canvas.height):
        raise ConfigurationError(
            f"template is {template.width}x{template.height}, "
            f"canvas is {canvas.width}x{canvas.height}"
        )
    out_pixels = template.pixels.copy()
    sel = canvas.pixels[..., 3] > 0  # zero-alpha marks leave the template as is
    if sel.any():
        src = canvas.pixels[sel].astype(np.float64)
        dst = out_pixels[sel].astype(np.float64)
        sa = src[:, 3:4] / 255.0
        da = dst[:, 3:4] / 255.0
        out_a = sa + da * (1.0 - sa)
        num = src[:, :3] * sa + dst[:, :3] * da * (1.0 - sa)
        rgb = num / np.maximum(out_a, 1e-12)
        merged = np.concatenate([rgb, out_a * 255.0], axis=1)
        out_pixels[sel] = np.clip(np.rint(merged), 0, 255).astype(np.uint8)
    return Canvas(canvas.width, canvas.height, out_pixels)


def encode_png(canvas: Canvas) -> bytes:
    return png.encode(canvas.pixels)


def decode_png(data: bytes) -> Canvas:
    pixels = png.decode(data)
    h, w = pixels.shape[:2]
    return Canvas(w, h, pixels)
