"""Generation of the three mark types: line, dashed line, point cluster.

Line construction (shared by the dashed variant): pick a start inside the
domain, pick an end uniformly in the 200 px disk around it (rejected until
inside the domain), choose degree 2 or 3 by a fair coin, then displace each
interior control point within 30 px of its chord point at parameter k/degree.
If the flattened curve leaves the domain the whole primitive is resampled,
never clipped.

Cluster construction: draw the point count n in [3, 20], pick a start, then
walk n-1 steps, each uniform in the 20 px disk around the previous point and
rejected until inside the domain.

All radii and counts are parameters; the values above are the defaults. The
bounds they induce are hard, not statistical: |end − start| ≤ endpoint
radius, control displacement ≤ deviation radius, consecutive cluster steps
≤ step radius.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .bodymap import SampleDomain, contains, sample_point
from .errors import GenerationError
from .geometry import (
    FLATTEN_TOLERANCE,
    BezierCurve,
    Point,
    RandomStream,
    flatten,
    lerp,
    sample_in_disk,
)

DEFAULT_MAX_RETRIES = 100

# Rejection budget for a single dependent draw (endpoint or walk step)
# before the whole primitive is resampled.
_POINT_TRIES = 100


class PrimitiveKind(enum.Enum):
    LINE = "line"
    DASHED_LINE = "dashed_line"
    POINT_CLUSTER = "point_cluster"


@dataclass(frozen=True, slots=True)
class LineParams:
    endpoint_radius: float = 200.0
    control_deviation: float = 30.0

    def __post_init__(self) -> None:
        if self.endpoint_radius <= 0:
            raise ValueError("endpoint_radius must be positive")
        if self.control_deviation < 0:
            raise ValueError("control_deviation must be non-negative")


@dataclass(frozen=True, slots=True)
class ClusterParams:
    n_min: int = 3
    n_max: int = 20
    step_radius: float = 20.0

    def __post_init__(self) -> None:
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError(f"invalid cluster size range [{self.n_min}, {self.n_max}]")
        if self.step_radius < 0:
            raise ValueError("step_radius must be non-negative")


@dataclass(frozen=True, slots=True)
class DashPattern:
    on_length: float = 12.0
    off_length: float = 8.0

    def __post_init__(self) -> None:
        if self.on_length <= 0 or self.off_length <= 0:
            raise ValueError("dash lengths must be positive")


@dataclass(frozen=True, slots=True)
class Primitive:
    """One generated mark with its full governing geometry."""

    kind: PrimitiveKind
    curve: BezierCurve | None = None
    dash: DashPattern | None = None
    points: tuple[Point, ...] | None = None
    point_radius: float | None = None

    def __post_init__(self) -> None:
        if self.kind is PrimitiveKind.POINT_CLUSTER:
            if not self.points or self.curve is not None:
                raise ValueError("point cluster needs points and no curve")
        else:
            if self.curve is None or self.points is not None:
                raise ValueError(f"{self.kind.value} needs a curve and no points")
            if (self.dash is not None) != (self.kind is PrimitiveKind.DASHED_LINE):
                raise ValueError("dash pattern exactly for dashed lines")


def _rejected_disk_sample(
    domain: SampleDomain, stream: RandomStream, center: Point, radius: float
) -> Point | None:
    for _ in range(_POINT_TRIES):
        p = sample_in_disk(stream, center, radius)
        if contains(domain, p):
            return p
    return None


def _gen_curve(
    domain: SampleDomain,
    stream: RandomStream,
    params: LineParams,
    max_retries: int,
) -> BezierCurve:
    if max_retries < 1:
        raise ValueError("max_retries must be at least 1")
    for _ in range(max_retries):
        start = sample_point(domain, stream)
        end = _rejected_disk_sample(domain, stream, start, params.endpoint_radius)
        if end is None:
            continue
        degree = 2 if stream.random() < 0.5 else 3
        controls = [start]
        for k in range(1, degree):
            chord_point = lerp(start, end, k / degree)
            controls.append(
                sample_in_disk(stream, chord_point, params.control_deviation)
            )
        controls.append(end)
        curve = BezierCurve(tuple(controls))
        poly = flatten(curve, FLATTEN_TOLERANCE)
        if all(contains(domain, v) for v in poly.vertices):
            return curve
    raise GenerationError(
        f"no line fit the domain within {max_retries} whole-primitive retries"
    )


def gen_line(
    domain: SampleDomain,
    stream: RandomStream,
    params: LineParams = LineParams(),
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> Primitive:
    curve = _gen_curve(domain, stream, params, max_retries)
    return Primitive(kind=PrimitiveKind.LINE, curve=curve)


def gen_dashed_line(
    domain: SampleDomain,
    stream: RandomStream,
    params: LineParams = LineParams(),
    dash: DashPattern = DashPattern(),
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> Primitive:
    curve = _gen_curve(domain, stream, params, max_retries)
    return Primitive(kind=PrimitiveKind.DASHED_LINE, curve=curve, dash=dash)


def gen_cluster(
    domain: SampleDomain,
    stream: RandomStream,
    params: ClusterParams = ClusterParams(),
    max_retries: int = DEFAULT_MAX_RETRIES,
    point_radius: float = 3.0,
) -> Primitive:
    if max_retries < 1:
        raise ValueError("max_retries must be at least 1")
    for _ in range(max_retries):
        n = stream.randint(params.n_min, params.n_max)
        points = [sample_point(domain, stream)]
        while len(points) < n:
            nxt = _rejected_disk_sample(domain, stream, points[-1], params.step_radius)
            if nxt is None:
                break
            points.append(nxt)
        if len(points) == n:
            return Primitive(
                kind=PrimitiveKind.POINT_CLUSTER,
                points=tuple(points),
                point_radius=point_radius,
            )
    raise GenerationError(
        f"no cluster fit the domain within {max_retries} whole-primitive retries"
    )
