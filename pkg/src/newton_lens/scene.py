"""Geometric scenes of a Newton trace: iterate points on the axis, their
images on the graph, vertical drop segments, and tangent segments, with
deterministic SVG and JSON export."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .engine import IterationTrace, NewtonProblem
from .expr import evaluate

__all__ = [
    "Point",
    "Segment",
    "Label",
    "Viewport",
    "Annotation",
    "Scene",
    "SvgStyle",
    "build_scene",
    "to_svg",
    "to_json",
    "scene_from_json",
    "SCENE_VERSION",
]

SCENE_VERSION = 1

Point = tuple[float, float]
Segment = tuple[Point, Point]


@dataclass(frozen=True)
class Label:
    text: str
    x: float
    y: float


@dataclass(frozen=True)
class Viewport:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def width(self) -> float:
        return self.xmax - self.xmin

    def height(self) -> float:
        return self.ymax - self.ymin


@dataclass(frozen=True)
class Annotation:
    function: str
    x0: float
    iterations: int
    x_k: float
    f_x_k: float | None


@dataclass(frozen=True)
class Scene:
    function: str
    viewport: Viewport
    graph_polyline: tuple[tuple[Point, ...], ...]  # pieces, broken at faults/jumps
    axis_points: tuple[Point, ...]
    graph_points: tuple[Point, ...]
    vertical_segments: tuple[Segment, ...]
    tangent_segments: tuple[Segment, ...]
    labels: tuple[Label, ...]
    annotation: Annotation


def _auto_viewport(points: Sequence[Point]) -> Viewport:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points] + [0.0]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    if xmax - xmin < 1e-9:
        xmin, xmax = xmin - 1.0, xmax + 1.0
    if ymax - ymin < 1e-9:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    pad_x = 0.1 * (xmax - xmin)
    pad_y = 0.1 * (ymax - ymin)
    return Viewport(xmin - pad_x, xmax + pad_x, ymin - pad_y, ymax + pad_y)


def _sample_graph(
    problem: NewtonProblem, viewport: Viewport, samples: int
) -> tuple[tuple[Point, ...], ...]:
    """Sample f across the viewport.  The polyline breaks (never bridges)
    across evaluation faults and across jumps taller than 10 viewport
    heights, so poles do not draw false asymptote walls."""
    jump = 10.0 * viewport.height()
    pieces: list[tuple[Point, ...]] = []
    current: list[Point] = []
    for i in range(samples):
        x = viewport.xmin + viewport.width() * i / (samples - 1)
        y = evaluate(problem.f, x) if problem.contains(x) else None
        if not isinstance(y, float):
            y = None
        if y is None or (current and abs(y - current[-1][1]) > jump):
            if len(current) >= 2:
                pieces.append(tuple(current))
            current = [] if y is None else [(x, y)]
        else:
            current.append((x, y))
    if len(current) >= 2:
        pieces.append(tuple(current))
    return tuple(pieces)


def build_scene(
    problem: NewtonProblem,
    trace: IterationTrace,
    viewport: Viewport | None = None,
    graph_samples: int = 400,
) -> Scene:
    """Assemble the tangent-cascade construction from a trace.

    With m+1 recorded iterates there are m vertical and m tangent segments:
    vertical i joins (x_i, 0) to (x_i, f(x_i)); tangent i joins
    (x_i, f(x_i)) to (x_{i+1}, 0).  The final iterate contributes only its
    axis point (it may not even be evaluable, e.g. after a domain exit).
    """
    if not trace.iterates:
        raise ValueError("build_scene requires at least one iterate")
    its = trace.iterates
    axis_points = tuple((it.x, 0.0) for it in its)
    graph_points = tuple((it.x, it.fx) for it in its if it.fx is not None)
    verticals: list[Segment] = []
    tangents: list[Segment] = []
    for i in range(len(its) - 1):
        fx = its[i].fx
        if fx is None:  # interior iterates always evaluated; guard regardless
            continue
        verticals.append(((its[i].x, 0.0), (its[i].x, fx)))
        tangents.append(((its[i].x, fx), (its[i + 1].x, 0.0)))

    if viewport is None:
        viewport = _auto_viewport(list(axis_points) + list(graph_points))
    last = its[-1]
    annotation = Annotation(
        function=trace.function,
        x0=trace.x0,
        iterations=len(its) - 1,
        x_k=last.x,
        f_x_k=last.fx,
    )
    labels = (
        Label("X0", its[0].x, 0.0),
        Label("Xk", last.x, 0.0),
    )
    return Scene(
        function=trace.function,
        viewport=viewport,
        graph_polyline=_sample_graph(problem, viewport, graph_samples),
        axis_points=axis_points,
        graph_points=graph_points,
        vertical_segments=tuple(verticals),
        tangent_segments=tuple(tangents),
        labels=labels,
        annotation=annotation,
    )


# ---------------------------------------------------------------------------
# SVG export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SvgStyle:
    width: int = 800
    height: int = 500
    margin: int = 10
    background: str = "#ffffff"
    axis_color: str = "#9a9a9a"
    axis_width: float = 1.0
    graph_color: str = "#1f6fb4"
    graph_width: float = 2.0
    vertical_color: str = "#666666"
    vertical_width: float = 1.0
    tangent_color: str = "#111111"
    tangent_width: float = 1.2
    point_color: str = "#e0218a"
    point_radius: float = 3.0
    label_color: str = "#222222"
    font_size: int = 13
    decimals: int = 6


def _fmt(v: float, decimals: int) -> str:
    s = f"{v:.{decimals}f}"
    if s.startswith("-") and float(s) == 0.0:  # normalize -0.000000
        return s[1:]
    return s


def to_svg(scene: Scene, style: SvgStyle = SvgStyle()) -> bytes:
    """Deterministic SVG 1.1 rendering: identical scenes and styles yield
    identical bytes.  Geometry outside the viewport is clipped at the frame,
    never dropped, so far iterates leave visible arrows exiting the frame."""
    vp = scene.viewport
    d = style.decimals
    inner_w = style.width - 2 * style.margin
    inner_h = style.height - 2 * style.margin

    def sx(x: float) -> float:
        return style.margin + (x - vp.xmin) / vp.width() * inner_w

    def sy(y: float) -> float:
        return style.margin + (vp.ymax - y) / vp.height() * inner_h

    def pt(x: float, y: float) -> str:
        return f"{_fmt(sx(x), d)},{_fmt(sy(y), d)}"

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{style.width}" height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}">'
    )
    out.append("<defs>")
    out.append(
        f'<clipPath id="frame"><rect x="{style.margin}" y="{style.margin}" '
        f'width="{inner_w}" height="{inner_h}"/></clipPath>'
    )
    out.append(
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
        f'<path d="M 0 0 L 10 5 L 0 10 z" fill="{style.tangent_color}"/></marker>'
    )
    out.append("</defs>")
    out.append(
        f'<rect x="0" y="0" width="{style.width}" height="{style.height}" '
        f'fill="{style.background}"/>'
    )
    out.append('<g clip-path="url(#frame)">')

    # axes
    if vp.ymin <= 0.0 <= vp.ymax:
        out.append(
            f'<line x1="{_fmt(sx(vp.xmin), d)}" y1="{_fmt(sy(0.0), d)}" '
            f'x2="{_fmt(sx(vp.xmax), d)}" y2="{_fmt(sy(0.0), d)}" '
            f'stroke="{style.axis_color}" stroke-width="{style.axis_width}"/>'
        )
    if vp.xmin <= 0.0 <= vp.xmax:
        out.append(
            f'<line x1="{_fmt(sx(0.0), d)}" y1="{_fmt(sy(vp.ymin), d)}" '
            f'x2="{_fmt(sx(0.0), d)}" y2="{_fmt(sy(vp.ymax), d)}" '
            f'stroke="{style.axis_color}" stroke-width="{style.axis_width}"/>'
        )

    for piece in scene.graph_polyline:
        points = " ".join(pt(x, y) for x, y in piece)
        out.append(
            f'<polyline points="{points}" fill="none" '
            f'stroke="{style.graph_color}" stroke-width="{style.graph_width}"/>'
        )

    for (x1, y1), (x2, y2) in scene.vertical_segments:
        out.append(
            f'<line x1="{_fmt(sx(x1), d)}" y1="{_fmt(sy(y1), d)}" '
            f'x2="{_fmt(sx(x2), d)}" y2="{_fmt(sy(y2), d)}" '
            f'stroke="{style.vertical_color}" stroke-width="{style.vertical_width}" '
            f'stroke-dasharray="4,3"/>'
        )
    for (x1, y1), (x2, y2) in scene.tangent_segments:
        out.append(
            f'<line x1="{_fmt(sx(x1), d)}" y1="{_fmt(sy(y1), d)}" '
            f'x2="{_fmt(sx(x2), d)}" y2="{_fmt(sy(y2), d)}" '
            f'stroke="{style.tangent_color}" stroke-width="{style.tangent_width}" '
            f'marker-end="url(#arrow)"/>'
        )
    for x, y in scene.axis_points:
        out.append(
            f'<circle cx="{_fmt(sx(x), d)}" cy="{_fmt(sy(y), d)}" '
            f'r="{style.point_radius}" fill="{style.point_color}"/>'
        )
    for x, y in scene.graph_points:
        out.append(
            f'<circle cx="{_fmt(sx(x), d)}" cy="{_fmt(sy(y), d)}" '
            f'r="{style.point_radius * 0.75}" fill="{style.point_color}"/>'
        )
    out.append("</g>")

    for label in scene.labels:
        out.append(
            f'<text x="{_fmt(sx(label.x) + 5.0, d)}" y="{_fmt(sy(label.y) + 16.0, d)}" '
            f'font-family="sans-serif" font-size="{style.font_size}" '
            f'fill="{style.label_color}">{label.text}</text>'
        )

    ann = scene.annotation
    f_xk = "undefined" if ann.f_x_k is None else _fmt(ann.f_x_k, d)
    lines = [
        f"f(x) = {ann.function}",
        f"x0 = {_fmt(ann.x0, d)}",
        f"iterations = {ann.iterations}",
        f"x_k = {_fmt(ann.x_k, d)}",
        f"f(x_k) = {f_xk}",
    ]
    y_text = style.margin + style.font_size + 2
    for line in lines:
        out.append(
            f'<text x="{style.margin + 6}" y="{y_text}" font-family="monospace" '
            f'font-size="{style.font_size}" fill="{style.label_color}">{_escape(line)}</text>'
        )
        y_text += style.font_size + 3

    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ---------------------------------------------------------------------------
# JSON export (lossless round trip, stable key order)
# ---------------------------------------------------------------------------


def to_json(scene: Scene) -> bytes:
    doc = {
        "scene_version": SCENE_VERSION,
        "function": scene.function,
        "viewport": {
            "xmin": scene.viewport.xmin,
            "xmax": scene.viewport.xmax,
            "ymin": scene.viewport.ymin,
            "ymax": scene.viewport.ymax,
        },
        "annotation": {
            "function": scene.annotation.function,
            "x0": scene.annotation.x0,
            "iterations": scene.annotation.iterations,
            "x_k": scene.annotation.x_k,
            "f_x_k": scene.annotation.f_x_k,
        },
        "graph_polyline": [[[x, y] for x, y in piece] for piece in scene.graph_polyline],
        "axis_points": [[x, y] for x, y in scene.axis_points],
        "graph_points": [[x, y] for x, y in scene.graph_points],
        "vertical_segments": [
            [[x1, y1], [x2, y2]] for (x1, y1), (x2, y2) in scene.vertical_segments
        ],
        "tangent_segments": [
            [[x1, y1], [x2, y2]] for (x1, y1), (x2, y2) in scene.tangent_segments
        ],
        "labels": [{"text": lb.text, "x": lb.x, "y": lb.y} for lb in scene.labels],
    }
    return json.dumps(doc, allow_nan=False, separators=(",", ":")).encode("utf-8")


def scene_from_json(data: bytes | str) -> Scene:
    doc = json.loads(data)
    if doc.get("scene_version") != SCENE_VERSION:
        raise ValueError(f"unsupported scene_version: {doc.get('scene_version')!r}")

    def point(p: list) -> Point:
        return (float(p[0]), float(p[1]))

    vp = doc["viewport"]
    ann = doc["annotation"]
    return Scene(
        function=doc["function"],
        viewport=Viewport(vp["xmin"], vp["xmax"], vp["ymin"], vp["ymax"]),
        graph_polyline=tuple(tuple(point(p) for p in piece) for piece in doc["graph_polyline"]),
        axis_points=tuple(point(p) for p in doc["axis_points"]),
        graph_points=tuple(point(p) for p in doc["graph_points"]),
        vertical_segments=tuple(
            (point(s[0]), point(s[1])) for s in doc["vertical_segments"]
        ),
        tangent_segments=tuple(
            (point(s[0]), point(s[1])) for s in doc["tangent_segments"]
        ),
        labels=tuple(Label(lb["text"], lb["x"], lb["y"]) for lb in doc["labels"]),
        annotation=Annotation(
            function=ann["function"],
            x0=ann["x0"],
            iterations=ann["iterations"],
            x_k=ann["x_k"],
            f_x_k=ann["f_x_k"],
        ),
    )
