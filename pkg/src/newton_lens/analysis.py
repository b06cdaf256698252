"""Convergence analysis: root location, empirical order/rate, Lipschitz
constants, the min(kappa, 2/(3K)) convergence radius, error-bound checks,
basins of attraction, and empirical local-convergence radii."""

from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import dataclass
from typing import Sequence

from .engine import (
    Converged,
    DEFAULT_TOLERANCES,
    IterationTrace,
    NewtonProblem,
    Tolerances,
    run,
)
from .expr import DomainFault, evaluate, format_expression

__all__ = [
    "RootEstimate",
    "RateEstimate",
    "ConvergenceRadius",
    "BasinSample",
    "BasinMap",
    "ErrorBoundRow",
    "ConvergenceReport",
    "InsufficientSamples",
    "find_roots",
    "estimate_order",
    "estimate_lipschitz",
    "convergence_radius",
    "check_error_bound",
    "sample_basin",
    "estimate_delta",
    "build_convergence_report",
    "basin_to_dict",
    "basin_to_json",
    "basin_to_csv",
    "radius_to_dict",
    "radius_to_json",
    "report_to_dict",
    "report_to_json",
]

LIPSCHITZ_SEED = 0x5EED
ROOT_DEDUPE_TOL = 1e-10
ROOT_MATCH_TOL = 1e-6


class InsufficientSamples(ValueError):
    """Too few usable error quotients to estimate a convergence order."""


@dataclass(frozen=True)
class RootEstimate:
    x_star: float
    f_at_root: float | None
    dfx_at_root: float | None
    bracket: tuple[float, float]
    refined_to: float


@dataclass(frozen=True)
class RateEstimate:
    order_p: float
    linear_rate: float  # meaningful only when order_p is near 1
    samples_used: int
    residual: float     # max deviation of per-step order estimates from the median


@dataclass(frozen=True)
class ConvergenceRadius:
    K: float
    kappa: float
    r: float
    interval: tuple[float, float]
    uniqueness_interval: tuple[float, float]


@dataclass(frozen=True)
class BasinSample:
    x0: float
    outcome_kind: str
    root_index: int | None


@dataclass(frozen=True)
class BasinMap:
    function: str
    interval: tuple[float, float]
    n: int
    k: int
    roots: tuple[RootEstimate, ...]
    samples: tuple[BasinSample, ...]


@dataclass(frozen=True)
class ErrorBoundRow:
    iteration: int
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class ConvergenceReport:
    root: RootEstimate
    radius: ConvergenceRadius
    rate: RateEstimate | None
    error_bounds: tuple[ErrorBoundRow, ...] | None


def _grid(a: float, b: float, n: int) -> list[float]:
    return [a + (b - a) * i / n for i in range(n + 1)]


def _eval_or_none(expr, x: float) -> float | None:
    v = evaluate(expr, x)
    return v if isinstance(v, float) else None


def find_roots(
    problem: NewtonProblem, interval: tuple[float, float], grid_n: int = 400
) -> list[RootEstimate]:
    """Scan a grid for sign changes, bisect each bracket down to
    1e-13*(1+|x|), then apply one Newton polish step.

    Faulted grid points are skipped; no sign change means an empty list.
    Roots closer than 1e-10 are deduplicated.
    """
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, got {grid_n}")
    a, b = interval
    points = [(x, _eval_or_none(problem.f, x)) for x in _grid(a, b, grid_n)]
    evaluable = [(x, fx) for x, fx in points if fx is not None]

    found: list[RootEstimate] = []
    for (x1, f1), (x2, f2) in zip(evaluable, evaluable[1:]):
        if f1 == 0.0:
            found.append(_root_at(problem, x1, (x1, x1), 0.0))
        elif (f1 < 0) != (f2 < 0) and f2 != 0.0:
            found.append(_refine_bracket(problem, x1, x2, f1))
    if evaluable and evaluable[-1][1] == 0.0:
        x_last = evaluable[-1][0]
        found.append(_root_at(problem, x_last, (x_last, x_last), 0.0))

    found.sort(key=lambda r: r.x_star)
    deduped: list[RootEstimate] = []
    for root in found:
        if deduped and abs(root.x_star - deduped[-1].x_star) < ROOT_DEDUPE_TOL:
            continue
        deduped.append(root)
    return deduped


def _root_at(
    problem: NewtonProblem, x: float, bracket: tuple[float, float], refined_to: float
) -> RootEstimate:
    return RootEstimate(
        x_star=x,
        f_at_root=_eval_or_none(problem.f, x),
        dfx_at_root=_eval_or_none(problem.fprime, x),
        bracket=bracket,
        refined_to=refined_to,
    )


def _refine_bracket(
    problem: NewtonProblem, lo: float, hi: float, flo: float
) -> RootEstimate:
    target = 1e-13 * (1.0 + abs(0.5 * (lo + hi)))
    neg_left = flo < 0
    for _ in range(200):
        if hi - lo <= target:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = _eval_or_none(problem.f, mid)
        if fm is None:
            break  # fault inside the bracket; keep the current enclosure
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm < 0) == neg_left:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    polished = _newton_polish(problem, x, hi - lo)
    return RootEstimate(
        x_star=polished,
        f_at_root=_eval_or_none(problem.f, polished),
        dfx_at_root=_eval_or_none(problem.fprime, polished),
        bracket=(lo, hi),
        refined_to=target,
    )


def _newton_polish(problem: NewtonProblem, x: float, width: float) -> float:
    fx = _eval_or_none(problem.f, x)
    dfx = _eval_or_none(problem.fprime, x)
    if fx is None or dfx is None or abs(dfx) < 1e-14 * (1.0 + abs(x)):
        return x
    polished = x - fx / dfx
    if math.isfinite(polished) and abs(polished - x) <= max(2.0 * width, 1e-12 * (1.0 + abs(x))):
        return polished
    return x


ORDER_ERR_MIN = 1e-13
ORDER_ERR_MAX = 1e-1


def estimate_order(trace: IterationTrace, root: RootEstimate) -> RateEstimate:
    """Empirical convergence order from a converged trace.

    Uses medians of per-step quotients (robust to the pre-asymptotic head
    and the roundoff floor): order from ln e_{k+1} / ln e_k, linear rate
    from e_{k+1} / e_k, over samples with 1e-13 < e < 1e-1.
    """
    if not isinstance(trace.outcome, Converged):
        raise ValueError("estimate_order requires a converged trace")
    x_star = root.x_star
    errors = [abs(it.x - x_star) for it in trace.iterates]
    orders: list[float] = []
    rates: list[float] = []
    for e0, e1 in zip(errors, errors[1:]):
        if ORDER_ERR_MIN < e0 < ORDER_ERR_MAX and ORDER_ERR_MIN < e1 < ORDER_ERR_MAX:
            orders.append(math.log(e1) / math.log(e0))
            rates.append(e1 / e0)
    if len(orders) < 2:
        raise InsufficientSamples(
            f"only {len(orders)} usable error quotients (need at least 2)"
        )
    order_p = statistics.median(orders)
    return RateEstimate(
        order_p=order_p,
        linear_rate=statistics.median(rates),
        samples_used=len(orders) + 1,
        residual=max(abs(o - order_p) for o in orders),
    )


def estimate_lipschitz(
    problem: NewtonProblem,
    root: RootEstimate,
    interval: tuple[float, float],
    grid_n: int = 2000,
) -> float:
    """Affine-scaled Lipschitz constant of f' over an interval around the
    root: max |f'(x)-f'(y)| / (|f'(x*)| |x-y|) over adjacent grid pairs plus
    10*grid_n random pairs (fixed seed).  A lower estimate of the true sup.
    """
    d_star = root.dfx_at_root
    if d_star is None:
        d_star = _eval_or_none(problem.fprime, root.x_star)
    if d_star is None or d_star == 0.0:
        raise ValueError("estimate_lipschitz requires f'(x*) != 0")
    scale = abs(d_star)
    a, b = interval

    def df_at(x: float) -> float:
        v = evaluate(problem.fprime, x)
        if isinstance(v, DomainFault):
            raise ValueError(f"derivative evaluation failed at x={x!r}: {v.kind}")
        return v

    xs = _grid(a, b, grid_n)
    dfs = [df_at(x) for x in xs]
    best = 0.0
    for (x1, d1), (x2, d2) in zip(zip(xs, dfs), zip(xs[1:], dfs[1:])):
        gap = abs(x2 - x1)
        if gap > 0.0:
            best = max(best, abs(d2 - d1) / (scale * gap))
    rng = random.Random(LIPSCHITZ_SEED)
    for _ in range(10 * grid_n):
        u = rng.uniform(a, b)
        v = rng.uniform(a, b)
        if u == v:
            continue
        best = max(best, abs(df_at(u) - df_at(v)) / (scale * abs(u - v)))
    return best


def convergence_radius(
    K: float, problem: NewtonProblem, root: RootEstimate
) -> ConvergenceRadius:
    """r = min(kappa, 2/(3K)) where kappa is the distance from the root to
    the domain boundary (punctures included).  K = 0 maps to r = kappa."""
    if K < 0:
        raise ValueError(f"K must be >= 0, got {K}")
    x_star = root.x_star
    lo, hi = problem.domain
    kappa = min(x_star - lo, hi - x_star)
    for p in problem.excluded:
        kappa = min(kappa, abs(x_star - p))
    r = kappa if K == 0.0 else min(kappa, 2.0 / (3.0 * K))
    uni = math.inf if K == 0.0 else 2.0 / K
    return ConvergenceRadius(
        K=K,
        kappa=kappa,
        r=r,
        interval=(x_star - r, x_star + r),
        uniqueness_interval=(x_star - uni, x_star + uni),
    )


def check_error_bound(
    trace: IterationTrace, root: RootEstimate, K: float
) -> list[ErrorBoundRow]:
    """Per-iteration quadratic error bound rows:
    |x* - x_{k+1}| <= K / (2 (1 - K |x0 - x*|)) * |x_k - x*|^2.

    Requires a converged trace and K |x0 - x*| < 1.
    """
    if not isinstance(trace.outcome, Converged):
        raise ValueError("check_error_bound requires a converged trace")
    x_star = root.x_star
    e0 = abs(trace.iterates[0].x - x_star)
    if K * e0 >= 1.0:
        raise ValueError(
            f"precondition violated: K*|x0 - x*| = {K * e0:.6g} must be < 1"
        )
    coeff = K / (2.0 * (1.0 - K * e0))
    rows: list[ErrorBoundRow] = []
    xs = [it.x for it in trace.iterates]
    for k in range(len(xs) - 1):
        lhs = abs(x_star - xs[k + 1])
        rhs = coeff * (xs[k] - x_star) ** 2
        rows.append(ErrorBoundRow(k, lhs, rhs, lhs <= rhs * (1.0 + 1e-9)))
    return rows


def sample_basin(
    problem: NewtonProblem,
    interval: tuple[float, float],
    n: int,
    k: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> BasinMap:
    """Run the engine from n+1 equally spaced starting points and record the
    outcome kind plus, for converged samples, the index of the nearest known
    root (within 1e-6*(1+|root|)).

    Roots are scanned over the interval first; converged limits that match
    no scanned root (convergence to a far-away root) are appended to the
    root list as they are discovered, keeping every root_index resolvable.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    a, b = interval
    roots = list(find_roots(problem, interval, max(n, 2)))
    samples: list[BasinSample] = []
    for x0 in _grid(a, b, n):
        trace = run(problem, x0, k, tol)
        outcome = trace.outcome
        root_index: int | None = None
        if isinstance(outcome, Converged):
            root_index = _match_root(roots, outcome.root)
            if root_index is None:
                roots.append(_root_at(problem, outcome.root, (outcome.root, outcome.root), 0.0))
                root_index = len(roots) - 1
        samples.append(BasinSample(x0, outcome.kind, root_index))
    return BasinMap(
        function=format_expression(problem.f),
        interval=(a, b),
        n=n,
        k=k,
        roots=tuple(roots),
        samples=tuple(samples),
    )


def _match_root(roots: Sequence[RootEstimate], x: float) -> int | None:
    best: int | None = None
    best_dist = math.inf
    for i, root in enumerate(roots):
        dist = abs(x - root.x_star)
        if dist <= ROOT_MATCH_TOL * (1.0 + abs(root.x_star)) and dist < best_dist:
            best = i
            best_dist = dist
    return best


DELTA_RESOLUTION = 1e-4
DELTA_PROBE_POINTS = 64


def estimate_delta(
    problem: NewtonProblem,
    root: RootEstimate,
    search_limit: float,
    k: int = 80,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Empirical local-convergence radius: the largest t (to within 1e-4,
    bisected over (0, search_limit]) such that a 64-point symmetric probe of
    (x*-t, x*+t) converges to the root from every point.

    Returns 0.0 when even tiny probes fail.  Resolution: the probe includes
    the points x* +- t, so the estimate tracks the true basin edge from
    below.
    """
    if search_limit <= 0:
        raise ValueError(f"search_limit must be positive, got {search_limit}")
    x_star = root.x_star
    half = DELTA_PROBE_POINTS // 2

    def all_converge(t: float) -> bool:
        for j in range(1, half + 1):
            offset = t * j / half
            for x0 in (x_star - offset, x_star + offset):
                trace = run(problem, x0, k, tol)
                out = trace.outcome
                if not isinstance(out, Converged):
                    return False
                if abs(out.root - x_star) > ROOT_MATCH_TOL * (1.0 + abs(x_star)):
                    return False
        return True

    if all_converge(search_limit):
        return search_limit
    lo, hi = 0.0, search_limit
    while hi - lo > DELTA_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if all_converge(mid):
            lo = mid
        else:
            hi = mid
    return lo


def build_convergence_report(
    problem: NewtonProblem,
    root: RootEstimate,
    K: float,
    trace: IterationTrace | None = None,
) -> ConvergenceReport:
    radius = convergence_radius(K, problem, root)
    rate: RateEstimate | None = None
    bounds: tuple[ErrorBoundRow, ...] | None = None
    if trace is not None and isinstance(trace.outcome, Converged):
        try:
            rate = estimate_order(trace, root)
        except InsufficientSamples:
            rate = None
        if K * abs(trace.iterates[0].x - root.x_star) < 1.0:
            bounds = tuple(check_error_bound(trace, root, K))
    return ConvergenceReport(root=root, radius=radius, rate=rate, error_bounds=bounds)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _num(v: float | None) -> float | None:
    """JSON-safe number: infinities become null."""
    if v is None or not math.isfinite(v):
        return None
    return v


def _root_to_dict(root: RootEstimate) -> dict:
    return {
        "x_star": root.x_star,
        "f_at_root": _num(root.f_at_root),
        "dfx_at_root": _num(root.dfx_at_root),
        "bracket": [root.bracket[0], root.bracket[1]],
        "refined_to": root.refined_to,
    }


def basin_to_dict(basin: BasinMap) -> dict:
    return {
        "function": basin.function,
        "interval": [basin.interval[0], basin.interval[1]],
        "n": basin.n,
        "k": basin.k,
        "roots": [_root_to_dict(r) for r in basin.roots],
        "samples": [
            {"x0": s.x0, "outcome": s.outcome_kind, "root_index": s.root_index}
            for s in basin.samples
        ],
    }


def basin_to_json(basin: BasinMap) -> str:
    return json.dumps(basin_to_dict(basin), allow_nan=False, separators=(",", ":"))


def basin_to_csv(basin: BasinMap) -> str:
    lines = ["x0,outcome,root_index"]
    for s in basin.samples:
        idx = "" if s.root_index is None else str(s.root_index)
        lines.append(f"{s.x0!r},{s.outcome_kind},{idx}")
    return "\n".join(lines) + "\n"


def radius_to_dict(radius: ConvergenceRadius, root: RootEstimate | None = None) -> dict:
    out: dict = {}
    if root is not None:
        out["x_star"] = root.x_star
    out.update(
        {
            "K": radius.K,
            "kappa": _num(radius.kappa),
            "r": _num(radius.r),
            "interval": [_num(radius.interval[0]), _num(radius.interval[1])],
            "uniqueness_interval": [
                _num(radius.uniqueness_interval[0]),
                _num(radius.uniqueness_interval[1]),
            ],
        }
    )
    return out


def radius_to_json(radius: ConvergenceRadius, root: RootEstimate | None = None) -> str:
    return json.dumps(radius_to_dict(radius, root), allow_nan=False, separators=(",", ":"))


def report_to_dict(report: ConvergenceReport) -> dict:
    rate = None
    if report.rate is not None:
        rate = {
            "order_p": report.rate.order_p,
            "linear_rate": report.rate.linear_rate,
            "samples_used": report.rate.samples_used,
            "residual": report.rate.residual,
        }
    bounds = None
    if report.error_bounds is not None:
        bounds = [
            {"iteration": row.iteration, "lhs": row.lhs, "rhs": row.rhs, "holds": row.holds}
            for row in report.error_bounds
        ]
    return {
        "root": _root_to_dict(report.root),
        "radius": radius_to_dict(report.radius),
        "rate": rate,
        "error_bounds": bounds,
    }


def report_to_json(report: ConvergenceReport) -> str:
    return json.dumps(report_to_dict(report), allow_nan=False, separators=(",", ":"))
