"""Stateless HTTP facade over the expression, engine, analysis, and scene
modules.  Every successful response body is byte-identical to the matching
CLI output; errors use {"error": {"kind", "message", "offset"?}} envelopes
and never ship with HTTP 200."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor, TimeoutError as FutureTimeout
from typing import Callable

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import analysis, engine, scene
from .expr import ParseError, parse

MAX_K = 10_000
MAX_N = 100_000
MAX_FUNCTION_LENGTH = 10_000
REQUEST_TIMEOUT_S = 5.0

_executor = ThreadPoolExecutor(max_workers=8)


class ApiError(Exception):
    def __init__(self, status: int, kind: str, message: str, offset: int | None = None):
        super().__init__(message)
        self.status = status
        self.kind = kind
        self.message = message
        self.offset = offset


def _error_response(status: int, kind: str, message: str, offset: int | None = None) -> JSONResponse:
    body: dict = {"error": {"kind": kind, "message": message}}
    if offset is not None:
        body["error"]["offset"] = offset
    return JSONResponse(status_code=status, content=body)


class TraceRequest(BaseModel):
    function: str = Field(alias="function")
    x0: float
    k: int = 20
    domain: str | None = None
    excluded: list[float] = []

    model_config = {"populate_by_name": True}


class SceneRequest(TraceRequest):
    viewport: list[float] | None = None  # [xmin, xmax, ymin, ymax]
    graph_samples: int = 400


class BasinRequest(BaseModel):
    function: str
    interval: list[float]
    n: int = 400
    k: int = 60
    domain: str | None = None
    excluded: list[float] = []


class RadiusRequest(BaseModel):
    function: str
    interval: list[float] | None = None
    x0: float | None = None
    grid: int = 400
    domain: str | None = None
    excluded: list[float] = []


def _parse_domain_str(text: str | None) -> tuple[float, float]:
    if not text:
        return (-math.inf, math.inf)
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    parts = [p.strip().lower() for p in s.split(",")]
    if len(parts) != 2:
        raise ApiError(400, "validation", f'domain must look like "(lo,hi)", got {text!r}')

    def side(p: str) -> float:
        if p in ("inf", "+inf", "infinity"):
            return math.inf
        if p == "-inf":
            return -math.inf
        try:
            return float(p)
        except ValueError:
            raise ApiError(400, "validation", f"bad domain bound {p!r}") from None

    return side(parts[0]), side(parts[1])


def _build_problem(function: str, domain: str | None, excluded: list[float]) -> engine.NewtonProblem:
    if len(function) > MAX_FUNCTION_LENGTH:
        raise ApiError(400, "validation", "function text too long")
    try:
        expr = parse(function)
    except ParseError as exc:
        raise ApiError(400, "parse-error", str(exc), exc.offset) from None
    lo, hi = _parse_domain_str(domain)
    try:
        return engine.NewtonProblem.from_expression(expr, None, (lo, hi), tuple(excluded))
    except ValueError as exc:
        raise ApiError(400, "validation", str(exc)) from None


def _check_x0(problem: engine.NewtonProblem, x0: float) -> None:
    if not problem.contains(x0, engine.DEFAULT_TOLERANCES.tol_x):
        raise ApiError(422, "domain", f"x0={x0!r} is outside the domain")


def _check_cap(name: str, value: int, cap: int) -> None:
    if value < 1:
        raise ApiError(400, "validation", f"{name} must be >= 1, got {value}")
    if value > cap:
        raise ApiError(422, "limits", f"{name}={value} exceeds the per-request cap {cap}")


def _run_with_deadline(fn: Callable[[], bytes]) -> bytes:
    future = _executor.submit(fn)
    try:
        return future.result(timeout=REQUEST_TIMEOUT_S)
    except FutureTimeout:
        raise ApiError(503, "timeout", "request exceeded the compute budget") from None


def _json_response(payload: str | bytes) -> Response:
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    return Response(content=payload, media_type="application/json")


def create_app(ui_dir: str | None = None, cors_origins: tuple[str, ...] = ("*",)) -> FastAPI:
    app = FastAPI(title="newton-lens", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return _error_response(exc.status, exc.kind, exc.message, exc.offset)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error_response(400, "validation", str(exc.errors()[:3]))

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True}

    @app.post("/api/v1/trace")
    def trace_endpoint(req: TraceRequest) -> Response:
        problem = _build_problem(req.function, req.domain, req.excluded)
        _check_cap("k", req.k, MAX_K)
        _check_x0(problem, req.x0)
        payload = _run_with_deadline(
            lambda: engine.trace_to_json(engine.run(problem, req.x0, req.k)).encode("utf-8")
        )
        return _json_response(payload)

    @app.post("/api/v1/scene")
    def scene_endpoint(req: SceneRequest) -> Response:
        problem = _build_problem(req.function, req.domain, req.excluded)
        _check_cap("k", req.k, MAX_K)
        _check_cap("graph_samples", req.graph_samples, MAX_N)
        _check_x0(problem, req.x0)
        viewport = None
        if req.viewport is not None:
            if len(req.viewport) != 4:
                raise ApiError(400, "validation", "viewport must be [xmin, xmax, ymin, ymax]")
            viewport = scene.Viewport(*req.viewport)

        def compute() -> bytes:
            trace = engine.run(problem, req.x0, req.k)
            return scene.to_json(scene.build_scene(problem, trace, viewport, req.graph_samples))

        return _json_response(_run_with_deadline(compute))

    @app.post("/api/v1/basin")
    def basin_endpoint(req: BasinRequest) -> Response:
        problem = _build_problem(req.function, req.domain, req.excluded)
        _check_cap("k", req.k, MAX_K)
        _check_cap("n", req.n, MAX_N)
        if len(req.interval) != 2 or not req.interval[0] < req.interval[1]:
            raise ApiError(400, "validation", "interval must be [lo, hi] with lo < hi")
        if req.n < 2:
            raise ApiError(400, "validation", "n must be >= 2")
        interval = (req.interval[0], req.interval[1])

        def compute() -> bytes:
            return analysis.basin_to_json(
                analysis.sample_basin(problem, interval, req.n, req.k)
            ).encode("utf-8")

        return _json_response(_run_with_deadline(compute))

    @app.post("/api/v1/radius")
    def radius_endpoint(req: RadiusRequest) -> Response:
        problem = _build_problem(req.function, req.domain, req.excluded)
        _check_cap("grid", req.grid, MAX_N)

        def compute() -> bytes:
            lo, hi = problem.domain
            if req.interval is not None:
                scan = (req.interval[0], req.interval[1])
            else:
                scan = (
                    max(lo, -10.0) if math.isfinite(lo) else -10.0,
                    min(hi, 10.0) if math.isfinite(hi) else 10.0,
                )
            roots = analysis.find_roots(problem, scan, req.grid)
            if not roots:
                raise ApiError(422, "no-root", "no root found in the scan interval")
            if req.x0 is not None:
                root = min(roots, key=lambda r: abs(r.x_star - req.x0))
            else:
                root = roots[0]
            if req.interval is not None:
                est = (req.interval[0], req.interval[1])
            else:
                kappa = min(root.x_star - lo, hi - root.x_star)
                for p in problem.excluded:
                    kappa = min(kappa, abs(root.x_star - p))
                half = 2.0 if not math.isfinite(kappa) else min(2.0, kappa / 2.0)
                est = (root.x_star - half, root.x_star + half)
            K = analysis.estimate_lipschitz(problem, root, est, req.grid)
            radius = analysis.convergence_radius(K, problem, root)
            return analysis.radius_to_json(radius, root).encode("utf-8")

        return _json_response(_run_with_deadline(compute))

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


app = create_app()
