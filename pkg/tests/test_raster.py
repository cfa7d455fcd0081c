"""Rendering tests: coverage oracles, dash walk, compositing, PNG within raster."""

import math

import numpy as np
import pytest

from bodymark.bodymap import SampleDomain, default_mask
from bodymark.errors import ConfigurationError
from bodymark.geometry import BezierCurve, Point, derive_stream, dist, flatten
from bodymark.primitives import (
    DashPattern,
    Primitive,
    PrimitiveKind,
    gen_cluster,
    gen_line,
)
from bodymark.raster import (
    Canvas,
    StrokeStyle,
    composite_template,
    dash_chains,
    decode_png,
    encode_png,
    render,
)

RED = (255, 0, 0, 255)


def seg_dist(px, py, a, b):
    dx, dy = b.x - a.x, b.y - a.y
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(px - a.x, py - a.y)
    t = max(0.0, min(1.0, ((px - a.x) * dx + (py - a.y) * dy) / den))
    return math.hypot(px - (a.x + t * dx), py - (a.y + t * dy))


def min_dist_to_chain(px, py, vertices):
    return min(seg_dist(px, py, a, b) for a, b in zip(vertices, vertices[1:]))


# ---------------------------------------------------------------------- #
# cluster / disc coverage
# ---------------------------------------------------------------------- #


def test_single_point_cluster_disc_membership():
    canvas = Canvas.transparent(1000, 800)
    prim = Primitive(
        kind=PrimitiveKind.POINT_CLUSTER,
        points=(Point(500.0, 400.0),),
        point_radius=3.0,
    )
    style = StrokeStyle(color=RED, point_radius=3.0)
    render(canvas, prim, style)
    assert tuple(canvas.pixels[400, 500]) == RED
    assert tuple(canvas.pixels[400, 510]) == (0, 0, 0, 0)
    # exhaustive disc-membership oracle on the touched neighborhood
    for y in range(390, 411):
        for x in range(490, 511):
            expected = math.hypot(x + 0.5 - 500.0, y + 0.5 - 400.0) <= 3.0
            assert (tuple(canvas.pixels[y, x]) == RED) == expected


def test_transparent_color_is_noop():
    canvas = Canvas.solid(50, 50)
    before = canvas.pixels.copy()
    prim = Primitive(
        kind=PrimitiveKind.POINT_CLUSTER, points=(Point(25, 25),), point_radius=5.0
    )
    render(canvas, prim, StrokeStyle(color=(255, 0, 0, 0)))
    assert np.array_equal(canvas.pixels, before)


# ---------------------------------------------------------------------- #
# stroke coverage
# ---------------------------------------------------------------------- #


def test_line_stroke_matches_distance_oracle():
    s = derive_stream(3, "stroke")
    domain = SampleDomain(default_mask(120, 100, 10))
    prim = gen_line(domain, s)
    vertices = flatten(prim.curve, 0.25).vertices
    canvas = Canvas.transparent(120, 100)
    render(canvas, prim, StrokeStyle(width=3.0, color=RED))
    colored = canvas.pixels[..., 3] > 0
    for y in range(100):
        for x in range(120):
            d = min_dist_to_chain(x + 0.5, y + 0.5, vertices)
            assert colored[y, x] == (d <= 1.5), (x, y, d)


def test_stroke_coverage_soundness_bound():
    s = derive_stream(4, "sound")
    domain = SampleDomain(default_mask(100, 100, 5))
    prim = gen_line(domain, s)
    vertices = flatten(prim.curve, 0.25).vertices
    canvas = Canvas.transparent(100, 100)
    render(canvas, prim, StrokeStyle(width=3.0, color=RED))
    ys, xs = np.nonzero(canvas.pixels[..., 3])
    for x, y in zip(xs, ys):
        assert min_dist_to_chain(x + 0.5, y + 0.5, vertices) <= 1.5 + 1.0


def test_render_deterministic():
    prim = gen_cluster(
        SampleDomain(default_mask(80, 80, 5)), derive_stream(5, "det")
    )
    a = Canvas.transparent(80, 80)
    b = Canvas.transparent(80, 80)
    render(a, prim, StrokeStyle())
    render(b, prim, StrokeStyle())
    assert np.array_equal(a.pixels, b.pixels)


# ---------------------------------------------------------------------- #
# dashes
# ---------------------------------------------------------------------- #


def test_dash_chain_arc_walk_oracle():
    vertices = (Point(0, 0), Point(40, 0))
    chains = dash_chains(vertices, DashPattern(12, 8))
    assert [[(p.x, p.y) for p in c] for c in chains] == [
        [(0, 0), (12, 0)],
        [(20, 0), (32, 0)],
    ]


def test_dash_chain_spans_multiple_segments():
    vertices = (Point(0, 0), Point(10, 0), Point(10, 20))
    chains = dash_chains(vertices, DashPattern(12, 8))
    # arc length 30: on [0,12] crosses the corner, off (12,20], on (20,30]
    assert [[(p.x, p.y) for p in c] for c in chains] == [
        [(0, 0), (10, 0), (10, 2)],
        [(10, 10), (10, 20)],
    ]


def test_dash_conservation():
    s = derive_stream(6, "dash")
    for i in range(50):
        curve_prim = gen_line(SampleDomain(default_mask(1000, 800, 40)), s)
        vertices = flatten(curve_prim.curve, 0.25).vertices
        total = sum(dist(a, b) for a, b in zip(vertices, vertices[1:]))
        dash = DashPattern(12, 8)
        chains = dash_chains(vertices, dash)
        on_total = sum(
            dist(a, b) for c in chains for a, b in zip(c, c[1:])
        )
        period = dash.on_length + dash.off_length
        k = int(total // period)
        expected = k * dash.on_length + min(total - k * period, dash.on_length)
        assert abs(on_total - expected) <= dash.on_length + 1e-6


def test_dashed_render_on_off_pixels():
    # horizontal segment y=20 from x=10 to x=50, dash (12, 8): "on" arcs
    # [0,12] and [20,32] -> x in [10,22] and [30,42]
    curve = BezierCurve((Point(10, 20), Point(30, 20), Point(50, 20)))
    prim = Primitive(kind=PrimitiveKind.DASHED_LINE, curve=curve, dash=DashPattern(12, 8))
    canvas = Canvas.transparent(60, 40)
    render(canvas, prim, StrokeStyle(width=3.0, color=RED))
    row = canvas.pixels[20, :, 3] > 0
    assert row[16]  # arc 6.5, on
    assert not row[26]  # arc 16.5, off
    assert row[31]  # arc 21.5, on
    assert not row[45]  # arc 35.5, off


# ---------------------------------------------------------------------- #
# compositing
# ---------------------------------------------------------------------- #


def test_white_template_no_marks_all_white():
    marks = Canvas.transparent(30, 20)
    template = Canvas.solid(30, 20)
    out = composite_template(marks, template)
    assert (out.pixels == 255).all()


def test_template_untouched_off_stroke():
    rng = np.random.default_rng(0)
    tpl_pixels = rng.integers(0, 256, size=(50, 60, 4), dtype=np.uint8)
    tpl_pixels[..., 3] = 255
    template = Canvas(60, 50, tpl_pixels)
    marks = Canvas.transparent(60, 50)
    prim = Primitive(
        kind=PrimitiveKind.POINT_CLUSTER, points=(Point(30, 25),), point_radius=4.0
    )
    render(marks, prim, StrokeStyle(color=RED, point_radius=4.0))
    covered = marks.pixels[..., 3] > 0
    out = composite_template(marks, template)
    assert np.array_equal(out.pixels[~covered], tpl_pixels[~covered])
    assert (out.pixels[covered] == np.asarray(RED, dtype=np.uint8)).all()


def test_template_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        composite_template(Canvas.transparent(10, 10), Canvas.solid(11, 10))


def test_template_from_file(tmp_path):
    template = Canvas.solid(16, 12, (10, 200, 30, 255))
    f = tmp_path / "tpl.png"
    f.write_bytes(encode_png(template))
    out = composite_template(Canvas.transparent(16, 12), f)
    assert np.array_equal(out.pixels, template.pixels)


# ---------------------------------------------------------------------- #
# png via raster API
# ---------------------------------------------------------------------- #


def test_canvas_png_round_trip():
    rng = np.random.default_rng(1)
    c = Canvas(33, 21, rng.integers(0, 256, size=(21, 33, 4), dtype=np.uint8))
    out = decode_png(encode_png(c))
    assert np.array_equal(out.pixels, c.pixels)


def test_encode_twice_identical_bytes():
    c = Canvas.solid(40, 30, (1, 2, 3, 255))
    assert encode_png(c) == encode_png(c)
