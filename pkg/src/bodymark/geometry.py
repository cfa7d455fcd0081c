"""Points, deterministic random streams, and Bézier curves.

Everything downstream (mask sampling, mark synthesis, rasterization) builds
on this module, so the random generator is frozen here once and for all:

* stream construction: the SplitMix64 state is seeded with the first 8
  bytes (big-endian) of ``SHA-256(f"{seed}:{label}")``;
* ``next_u64``: ``state += 0x9E3779B97F4A7C15`` followed by the standard
  SplitMix64 xor-shift-multiply finalizer;
* ``random()``: the top 53 bits of the next word, scaled to [0, 1).

Identical (seed, label) pairs therefore produce bitwise-identical draw
sequences on every platform, and distinct labels give independent streams.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

_MASK64 = 0xFFFF_FFFF_FFFF_FFFF
_GOLDEN = 0x9E37_79B9_7F4A_7C15
_MIX1 = 0xBF58_476D_1CE4_E5B9
_MIX2 = 0x94D0_49BB_1331_11EB

#: Default flattening tolerance in pixels, shared by rendering and
#: containment checks so both see the same polyline.
FLATTEN_TOLERANCE = 0.25

_MAX_SUBDIVISION_DEPTH = 48


@dataclass(frozen=True, slots=True)
class Point:
    """A 2D point in pixel coordinates (continuous)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __add__(self, other: Point) -> Point:
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Point) -> Point:
        return Point(self.x - other.x, self.y - other.y)


def dist(a: Point, b: Point) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def lerp(a: Point, b: Point, t: float) -> Point:
    return Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    """Distance from ``p`` to the closed segment ``a``-``b``."""
    dx = b.x - a.x
    dy = b.y - a.y
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(p.x - a.x, p.y - a.y)
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy))


@dataclass(frozen=True, slots=True)
class BezierCurve:
    """Quadratic or cubic Bézier curve; endpoints are the first/last controls."""

    control_points: tuple[Point, ...]

    def __post_init__(self) -> None:
        if len(self.control_points) not in (3, 4):
            raise ValueError(
                f"expected 3 or 4 control points, got {len(self.control_points)}"
            )

    @property
    def degree(self) -> int:
        return len(self.control_points) - 1

    @property
    def start(self) -> Point:
        return self.control_points[0]

    @property
    def end(self) -> Point:
        return self.control_points[-1]


@dataclass(frozen=True, slots=True)
class Polyline:
    """Flattened curve: ≥ 2 vertices, consecutive vertices distinct."""

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise ValueError("polyline needs at least 2 vertices")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if a == b:
                raise ValueError("consecutive polyline vertices must differ")

    def length(self) -> float:
        return sum(dist(a, b) for a, b in zip(self.vertices, self.vertices[1:]))


class RandomStream:
    """Deterministic SplitMix64 stream keyed by a 64-bit seed and a label.

    Use :func:`derive_stream` (or the constructor directly) to obtain one
    stream per independent work item, e.g. one per generated image; a
    stream must not be shared across threads mid-sequence.
    """

    __slots__ = ("seed", "label", "_state")

    def __init__(self, seed: int, label: str):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self.label = label
        digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
        self._state = int.from_bytes(digest[:8], "big")

    def __repr__(self) -> str:  # pragma: no cover
        return f"RandomStream(seed={self.seed}, label={self.label!r})"

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform float in [lo, hi)."""
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive.

        Reduction is by modulo; for the spans used here (≤ a few thousand)
        the bias is far below 2**-50 and irrelevant next to determinism.
        """
        if hi < lo:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)


def derive_stream(master_seed: int, label: str) -> RandomStream:
    """Derive the deterministic stream for one work item from the master seed."""
    return RandomStream(master_seed, label)


def eval_bezier(curve: BezierCurve, t: float) -> Point:
    """Evaluate the curve at parameter ``t`` via de Casteljau.

    Exact at the endpoints: t=0 and t=1 return the boundary control points
    themselves, not a floating-point reconstruction of them.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    if t == 0.0:
        return curve.control_points[0]
    if t == 1.0:
        return curve.control_points[-1]
    pts = list(curve.control_points)
    while len(pts) > 1:
        pts = [lerp(pts[i], pts[i + 1], t) for i in range(len(pts) - 1)]
    return pts[0]


def _flat_enough(cps: tuple[Point, ...], tolerance: float) -> bool:
    # Convex-hull property: the curve lies inside the hull of its control
    # points, so if every interior control sits within `tolerance` of the
    # endpoint chord, the chord approximates the curve to that tolerance.
    a, b = cps[0], cps[-1]
    return all(point_segment_distance(c, a, b) <= tolerance for c in cps[1:-1])


def _split_half(cps: tuple[Point, ...]) -> tuple[tuple[Point, ...], tuple[Point, ...]]:
    levels = [cps]
    while len(levels[-1]) > 1:
        prev = levels[-1]
        levels.append(tuple(lerp(prev[i], prev[i + 1], 0.5) for i in range(len(prev) - 1)))
    left = tuple(level[0] for level in levels)
    right = tuple(level[-1] for level in reversed(levels))
    return left, right


def _flatten_into(cps: tuple[Point, ...], tolerance: float, depth: int, out: list[Point]) -> None:
    if depth >= _MAX_SUBDIVISION_DEPTH or _flat_enough(cps, tolerance):
        out.append(cps[-1])
        return
    left, right = _split_half(cps)
    _flatten_into(left, tolerance, depth + 1, out)
    _flatten_into(right, tolerance, depth + 1, out)


def flatten(curve: BezierCurve, tolerance: float = FLATTEN_TOLERANCE) -> Polyline:
    """Flatten by recursive midpoint subdivision.

    Every point of the true curve lies within ``tolerance`` of the returned
    polyline; the polyline endpoints equal the curve endpoints exactly.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    verts: list[Point] = [curve.control_points[0]]
    _flatten_into(tuple(curve.control_points), tolerance, 0, verts)
    out = [verts[0]]
    for v in verts[1:]:
        if v != out[-1]:
            out.append(v)
    if len(out) < 2:
        raise ValueError("curve degenerates to a single point")
    return Polyline(tuple(out))


def sample_in_disk(stream: RandomStream, center: Point, radius: float) -> Point:
    """Uniform sample over the disk area: angle uniform, radius = R·sqrt(u).

    Draw order is frozen (angle first, then radius). The containment
    |p − center| ≤ radius is a hard bound: the offset is rescaled in the
    rare case a few ulps of rounding push it past the rim.
    """
    if radius < 0.0:
        raise ValueError("radius must be non-negative")
    theta = 2.0 * math.pi * stream.random()
    r = radius * math.sqrt(stream.random())
    dx = r * math.cos(theta)
    dy = r * math.sin(theta)
    d = math.hypot(dx, dy)
    if d > radius:
        k = (radius / d) * (1.0 - 1e-12)
        dx *= k
        dy *= k
    return Point(center.x + dx, center.y + dy)
