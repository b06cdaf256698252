import math
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from newton_lens.engine import Converged, NewtonProblem, run
from newton_lens.expr import evaluate
from newton_lens.scene import (
    Scene,
    SvgStyle,
    Viewport,
    build_scene,
    scene_from_json,
    to_json,
    to_svg,
)

from conftest import INV_SQRT5, assert_tangent_slopes

GOLDEN = Path(__file__).parent / "golden" / "fig1.svg"


def fig1_scene(fig1_problem):
    trace = run(fig1_problem, -7.0, 3)
    return build_scene(fig1_problem, trace)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def test_fig1_counts(fig1_problem):
    scene = fig1_scene(fig1_problem)
    assert len(scene.axis_points) == 4
    assert len(scene.vertical_segments) == 3
    assert len(scene.tangent_segments) == 3
    assert scene.labels[-1].text == "Xk"
    assert scene.annotation.iterations == 3


def test_zero_length_trace_scene(cubic_problem):
    trace = run(cubic_problem, 1.0, 5)  # already a root
    scene = build_scene(cubic_problem, trace)
    assert len(scene.axis_points) == 1
    assert scene.vertical_segments == ()
    assert scene.tangent_segments == ()


def test_alternating_tangents_for_cycle(sigmoid_problem):
    trace = run(sigmoid_problem, 1.0, 6)
    scene = build_scene(sigmoid_problem, trace)
    for i, ((x1, _y1), (x2, _y2)) in enumerate(scene.tangent_segments):
        assert (x1 > 0) == (i % 2 == 0)
        assert abs(abs(x2) - 1.0) < 1e-9


def test_segment_count_invariant_all_outcomes(
    cube_root_problem, reciprocal_problem, cubic_problem, gnarly_problem
):
    cases = [
        (cube_root_problem, 0.2, 30),
        (reciprocal_problem, 2.0, 5),     # domain exit: bare final point
        (reciprocal_problem, 1.5, 40),
        (cubic_problem, INV_SQRT5, 20),
        (cubic_problem, 0.4656, 20),
        (gnarly_problem, -0.65, 25),
    ]
    for problem, x0, k in cases:
        scene = build_scene(problem, run(problem, x0, k))
        n = len(scene.axis_points)
        assert len(scene.vertical_segments) == n - 1
        assert len(scene.tangent_segments) == n - 1


def test_vertical_and_tangent_geometry(fig1_problem):
    scene = fig1_scene(fig1_problem)
    for i, ((vx1, vy1), (vx2, vy2)) in enumerate(scene.vertical_segments):
        assert vx1 == vx2
        assert vy1 == 0.0
        (tx1, ty1), (tx2, ty2) = scene.tangent_segments[i]
        assert (tx1, ty1) == (vx2, vy2)
        assert ty2 == 0.0


def test_axis_points_on_axis_and_graph_points_on_graph(fig1_problem):
    scene = fig1_scene(fig1_problem)
    for _x, y in scene.axis_points:
        assert y == 0.0
    for x, y in scene.graph_points:
        fx = evaluate(fig1_problem.f, x)
        assert abs(y - fx) <= 1e-12 * (1.0 + abs(y))


def tangent_slopes_match_derivative(problem, trace):
    assert_tangent_slopes(problem, build_scene(problem, trace), rel=1e-9)


def test_tangency_fig1(fig1_problem):
    tangent_slopes_match_derivative(fig1_problem, run(fig1_problem, -7.0, 3))


def test_tangency_across_examples(
    cube_root_problem, two_thirds_problem, sigmoid_problem, reciprocal_problem, cubic_problem
):
    for problem, x0, k in [
        (cube_root_problem, 0.2, 30),
        (two_thirds_problem, 1.0, 100),
        (sigmoid_problem, 0.9, 60),
        (sigmoid_problem, 1.0, 6),
        (reciprocal_problem, 1.5, 40),
        (cubic_problem, 0.5, 20),
    ]:
        tangent_slopes_match_derivative(problem, run(problem, x0, k))


def test_auto_viewport_padding(fig1_problem):
    scene = fig1_scene(fig1_problem)
    vp = scene.viewport
    xs = [p[0] for p in scene.axis_points]
    assert vp.xmin < min(xs) and vp.xmax > max(xs)
    assert vp.ymin < 0.0 < vp.ymax


def test_polyline_breaks_at_pole(reciprocal_problem):
    trace = run(reciprocal_problem, 1.5, 40)
    vp = Viewport(-1.0, 3.0, -5.0, 5.0)
    scene = build_scene(reciprocal_problem, trace, viewport=vp, graph_samples=401)
    assert len(scene.graph_polyline) >= 1
    for piece in scene.graph_polyline:
        assert all(x > 0 for x, _y in piece)  # nothing drawn outside (0, inf)
        for (x1, y1), (x2, y2) in zip(piece, piece[1:]):
            assert abs(y2 - y1) <= 10.0 * vp.height()


def test_polyline_breaks_at_excluded_point(gnarly_problem):
    trace = run(gnarly_problem, -0.65, 25)
    vp = Viewport(-1.0, 1.0, -5.0, 5.0)
    # 401 samples puts a grid point exactly on the puncture at 0
    scene = build_scene(gnarly_problem, trace, viewport=vp, graph_samples=401)
    assert len(scene.graph_polyline) >= 2


def test_explicit_viewport_keeps_far_segments(cubic_problem):
    trace = run(cubic_problem, 0.4656, 20)
    vp = Viewport(-2.0, 2.0, -2.0, 2.0)
    scene = build_scene(cubic_problem, trace, viewport=vp)
    # the far iterate stays in the scene; rendering clips, never drops
    assert any(abs(x) > 1e3 for x, _ in scene.axis_points)
    svg = to_svg(scene).decode()
    assert 'clip-path="url(#frame)"' in svg


# ---------------------------------------------------------------------------
# SVG export
# ---------------------------------------------------------------------------


def test_svg_is_deterministic(fig1_problem):
    a = to_svg(fig1_scene(fig1_problem))
    b = to_svg(fig1_scene(fig1_problem))
    assert a == b


def test_svg_matches_golden(fig1_problem):
    assert to_svg(fig1_scene(fig1_problem)) == GOLDEN.read_bytes()


def test_svg_well_formed(fig1_problem, reciprocal_problem):
    for scene in (
        fig1_scene(fig1_problem),
        build_scene(reciprocal_problem, run(reciprocal_problem, 2.0, 5)),
    ):
        root = ET.fromstring(to_svg(scene).decode("utf-8"))
        assert root.tag.endswith("svg")


def test_svg_annotation_block(fig1_problem):
    svg = to_svg(fig1_scene(fig1_problem)).decode()
    assert "f(x) = 0.01*x^3 + 0.01*x^2 - 0.02*x - 0.25" in svg
    assert "x0 = -7.000000" in svg
    assert "iterations = 3" in svg
    assert "x_k = -0.885506" in svg


def test_svg_empty_segment_scene(cubic_problem):
    trace = run(cubic_problem, 1.0, 5)
    svg = to_svg(build_scene(cubic_problem, trace)).decode()
    assert "<polyline" in svg
    assert "<circle" in svg


def test_svg_style_overrides(fig1_problem):
    style = SvgStyle(graph_color="#ff0000", decimals=3)
    svg = to_svg(fig1_scene(fig1_problem), style).decode()
    assert "#ff0000" in svg


def test_svg_undefined_annotation_value(reciprocal_problem):
    scene = build_scene(reciprocal_problem, run(reciprocal_problem, 2.0, 5))
    assert scene.annotation.f_x_k is None
    assert "f(x_k) = undefined" in to_svg(scene).decode()


# ---------------------------------------------------------------------------
# JSON export
# ---------------------------------------------------------------------------


def test_json_round_trip(fig1_problem, reciprocal_problem, sigmoid_problem):
    scenes = [
        fig1_scene(fig1_problem),
        build_scene(reciprocal_problem, run(reciprocal_problem, 2.0, 5)),
        build_scene(sigmoid_problem, run(sigmoid_problem, 1.0, 6)),
    ]
    for scene in scenes:
        assert scene_from_json(to_json(scene)) == scene


def test_json_shortest_float_repr(fig1_problem):
    doc = to_json(fig1_scene(fig1_problem)).decode()
    assert '"x0":-7.0' in doc
    assert "scene_version" in doc


def test_json_polyline_is_array_of_arrays(reciprocal_problem):
    import json as json_mod

    trace = run(reciprocal_problem, 1.5, 40)
    vp = Viewport(-1.0, 3.0, -5.0, 5.0)
    scene = build_scene(reciprocal_problem, trace, viewport=vp, graph_samples=200)
    doc = json_mod.loads(to_json(scene))
    assert isinstance(doc["graph_polyline"], list)
    assert all(isinstance(piece, list) for piece in doc["graph_polyline"])
    assert all(len(pt) == 2 for piece in doc["graph_polyline"] for pt in piece)


def test_json_rejects_unknown_version(fig1_problem):
    doc = to_json(fig1_scene(fig1_problem)).decode().replace('"scene_version":1', '"scene_version":99')
    with pytest.raises(ValueError):
        scene_from_json(doc)
