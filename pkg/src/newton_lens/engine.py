"""Newton iteration engine: run x_{n+1} = x_n - f(x_n)/f'(x_n) from a
starting point, record every iterate, and classify the terminal behavior."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from .expr import (
    DomainFault,
    Expression,
    NONFINITE,
    _FaultSignal,
    compile_expression,
    differentiate,
    format_expression,
    parse,
    simplify,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "NewtonProblem",
    "Iterate",
    "IterationTrace",
    "Outcome",
    "Converged",
    "Cycle",
    "Diverged",
    "DerivativeTooSmall",
    "DomainExit",
    "EvaluationFault",
    "Inconclusive",
    "StepFault",
    "newton_step",
    "classify",
    "run",
    "trace_to_dict",
    "trace_to_json",
    "outcome_to_dict",
]


@dataclass(frozen=True)
class Tolerances:
    """Stopping and classification constants.

    tol_f is relative to |f(x0)| and the derivative floor to |f'(x0)| (each
    falling back to 1 at zero) so that traces of f and c*f stop at the same
    iterate; for power-of-two c the iterate lists are then bitwise identical.
    """

    tol_x: float = 1e-12
    tol_f_rel: float = 1e-12
    deriv_floor: float = 1e-14           # scaled by (1 + |x|) * |f'(x0)|
    divergence_abs: float = 1e12
    divergence_rel: float = 1e6          # scaled by (1 + |x0|)
    escape_rel: float = 1e3              # derivative death beyond this is divergence
    cycle_tol: float = 1e-9              # scaled by (1 + |x_k|)
    cycle_window: int = 8

    def divergence_threshold(self, x0: float) -> float:
        return min(self.divergence_abs, self.divergence_rel * (1.0 + abs(x0)))


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class NewtonProblem:
    """A function, its derivative, and an open-interval domain with optional
    puncture points (e.g. {0} for functions defined on R \\ {0})."""

    f: Expression
    fprime: Expression
    domain: tuple[float, float] = (-math.inf, math.inf)
    excluded: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"domain requires lo < hi, got ({lo}, {hi})")
        for p in self.excluded:
            if not lo < p < hi:
                raise ValueError(f"excluded point {p} outside domain ({lo}, {hi})")

    @classmethod
    def from_expression(
        cls,
        f: Expression,
        fprime: Expression | None = None,
        domain: tuple[float, float] = (-math.inf, math.inf),
        excluded: Sequence[float] = (),
    ) -> "NewtonProblem":
        if fprime is None:
            fprime = simplify(differentiate(f))
        return cls(f, fprime, (float(domain[0]), float(domain[1])), tuple(excluded))

    @classmethod
    def from_text(
        cls,
        text: str,
        fprime_text: str | None = None,
        domain: tuple[float, float] = (-math.inf, math.inf),
        excluded: Sequence[float] = (),
    ) -> "NewtonProblem":
        fprime = parse(fprime_text) if fprime_text is not None else None
        return cls.from_expression(parse(text), fprime, domain, excluded)

    def contains(self, x: float, tol_x: float = 0.0) -> bool:
        lo, hi = self.domain
        if not lo < x < hi:
            return False
        for p in self.excluded:
            if abs(x - p) <= tol_x * (1.0 + abs(p)):
                return False
        return True


@dataclass(frozen=True)
class Iterate:
    x: float
    fx: float | None
    dfx: float | None


@dataclass(frozen=True)
class Converged:
    root: float
    at_iter: int
    kind = "converged"


@dataclass(frozen=True)
class Cycle:
    period: int
    first_iter: int
    kind = "cycle"


@dataclass(frozen=True)
class Diverged:
    at_iter: int
    kind = "diverged"


@dataclass(frozen=True)
class DerivativeTooSmall:
    at_iter: int
    kind = "derivative-too-small"


@dataclass(frozen=True)
class DomainExit:
    at_iter: int
    offending_x: float
    kind = "domain-exit"


@dataclass(frozen=True)
class EvaluationFault:
    at_iter: int
    fault: DomainFault
    kind = "evaluation-fault"


@dataclass(frozen=True)
class Inconclusive:
    kind = "inconclusive"


Outcome = Union[
    Converged, Cycle, Diverged, DerivativeTooSmall, DomainExit, EvaluationFault, Inconclusive
]


@dataclass(frozen=True)
class IterationTrace:
    function: str
    x0: float
    requested_k: int
    iterates: tuple[Iterate, ...]
    outcome: Outcome


@dataclass(frozen=True)
class StepFault:
    """Returned by newton_step when the step cannot be taken."""

    kind: str  # "derivative-too-small" | "evaluation-fault"
    fault: DomainFault | None = None


def newton_step(
    problem: NewtonProblem,
    x: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    df_scale: float = 1.0,
) -> float | StepFault:
    """One Newton step x - f(x)/f'(x), or a StepFault value."""
    f = compile_expression(problem.f)
    df = compile_expression(problem.fprime)
    try:
        fx = f(x)
        dfx = df(x)
    except _FaultSignal as sig:
        return StepFault("evaluation-fault", sig.fault)
    if dfx == 0.0 or abs(dfx) < tol.deriv_floor * (1.0 + abs(x)) * df_scale:
        return StepFault("derivative-too-small")
    nxt = x - fx / dfx
    if not math.isfinite(nxt):
        return StepFault("evaluation-fault", DomainFault(NONFINITE))
    return nxt


def _f_scale(iterates: Sequence[Iterate]) -> float:
    f0 = iterates[0].fx
    if f0 is None or f0 == 0.0:
        return 1.0
    return abs(f0)


def classify(
    iterates: Sequence[Iterate],
    x0: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Outcome | None:
    """Sequence-level classification of a trace prefix, or None if nothing
    terminal is visible yet.

    Checked in priority order: Converged, Cycle, Diverged.  Step-level
    outcomes (evaluation faults, domain exits, vanishing derivatives) are
    attached by run() as they arise; exhaustion becomes Inconclusive there.
    """
    if not iterates:
        raise ValueError("classify requires at least one iterate")
    m = len(iterates) - 1
    last = iterates[m]
    x = last.x

    # Converged: residual small, and either exactly at a root or stationary.
    fx = last.fx
    if fx is not None and abs(fx) <= tol.tol_f_rel * _f_scale(iterates):
        if fx == 0.0 or (m >= 1 and abs(x - iterates[m - 1].x) <= tol.tol_x * (1.0 + abs(x))):
            return Converged(x, m)

    # Cycle: the last two iterates each revisit the orbit at the same period.
    # Period-1 matches are stationary drift (slow convergence), never cycles,
    # and they also veto longer periods.
    p = _cycle_period(iterates, m, tol)
    if p is not None and m >= 1:
        prev = _cycle_period(iterates, m - 1, tol)
        if prev == p:
            return Cycle(p, m - 1 - p)

    if abs(x) > tol.divergence_threshold(x0):
        return Diverged(m)
    return None


def _cycle_period(iterates: Sequence[Iterate], m: int, tol: Tolerances) -> int | None:
    if m < 2:
        return None
    x = iterates[m].x
    ctol = tol.cycle_tol * (1.0 + abs(x))
    if abs(x - iterates[m - 1].x) <= ctol:
        return None
    for p in range(2, min(tol.cycle_window, m) + 1):
        if abs(x - iterates[m - p].x) <= ctol:
            return p
    return None


def run(
    problem: NewtonProblem,
    x0: float,
    k: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> IterationTrace:
    """Iterate from x0 for at most k steps, recording every iterate.

    All failures are encoded in the outcome; this never raises on numeric
    trouble.  The trace stops at the first terminal outcome, so its length
    is at most k + 1.
    """
    if k < 1:
        raise ValueError(f"iteration count must be >= 1, got {k}")
    if not math.isfinite(x0):
        raise ValueError(f"x0 must be finite, got {x0!r}")
    function_text = format_expression(problem.f)
    f = compile_expression(problem.f)
    df = compile_expression(problem.fprime)

    iterates: list[Iterate] = []
    outcome: Outcome | None = None

    if not problem.contains(x0, tol.tol_x):
        iterates.append(Iterate(x0, None, None))
        outcome = DomainExit(0, x0)
        return IterationTrace(function_text, x0, k, tuple(iterates), outcome)

    x = x0
    df_scale = 1.0
    while outcome is None:
        idx = len(iterates)
        try:
            fx = f(x)
        except _FaultSignal as sig:
            iterates.append(Iterate(x, None, None))
            outcome = EvaluationFault(idx, sig.fault)
            break
        try:
            dfx = df(x)
        except _FaultSignal as sig:
            iterates.append(Iterate(x, fx, None))
            outcome = EvaluationFault(idx, sig.fault)
            break
        iterates.append(Iterate(x, fx, dfx))
        if idx == 0 and dfx != 0.0:
            df_scale = abs(dfx)

        outcome = classify(iterates, x0, tol)
        if outcome is not None:
            break
        if idx == k:
            outcome = Inconclusive()
            break

        if dfx == 0.0 or abs(dfx) < tol.deriv_floor * (1.0 + abs(x)) * df_scale:
            # No further step is possible.  If the residual already meets the
            # f-tolerance this is convergence at a degenerate root (f' -> 0
            # alongside f); a vanishing derivative in the far tail of a flat
            # function is escape; otherwise it is a genuine critical point.
            if abs(fx) <= tol.tol_f_rel * _f_scale(iterates):
                outcome = Converged(x, idx)
            elif abs(x) > tol.escape_rel * (1.0 + abs(x0)):
                outcome = Diverged(idx)
            else:
                outcome = DerivativeTooSmall(idx)
            break

        nxt = x - fx / dfx
        if not math.isfinite(nxt):
            outcome = EvaluationFault(idx, DomainFault(NONFINITE))
            break
        if not problem.contains(nxt, tol.tol_x):
            # Record the offending point but do not iterate from it.
            iterates.append(Iterate(nxt, None, None))
            outcome = DomainExit(idx + 1, nxt)
            break
        x = nxt

    return IterationTrace(function_text, x0, k, tuple(iterates), outcome)


# ---------------------------------------------------------------------------
# Serialization (stable field order; used verbatim by both CLI and API)
# ---------------------------------------------------------------------------


def outcome_to_dict(outcome: Outcome) -> dict:
    if isinstance(outcome, Converged):
        return {"kind": outcome.kind, "root": outcome.root, "at_iter": outcome.at_iter}
    if isinstance(outcome, Cycle):
        return {"kind": outcome.kind, "period": outcome.period, "first_iter": outcome.first_iter}
    if isinstance(outcome, Diverged):
        return {"kind": outcome.kind, "at_iter": outcome.at_iter}
    if isinstance(outcome, DerivativeTooSmall):
        return {"kind": outcome.kind, "at_iter": outcome.at_iter}
    if isinstance(outcome, DomainExit):
        return {
            "kind": outcome.kind,
            "at_iter": outcome.at_iter,
            "offending_x": outcome.offending_x,
        }
    if isinstance(outcome, EvaluationFault):
        return {
            "kind": outcome.kind,
            "at_iter": outcome.at_iter,
            "fault": {"kind": outcome.fault.kind},
        }
    return {"kind": outcome.kind}


def trace_to_dict(trace: IterationTrace) -> dict:
    return {
        "function": trace.function,
        "x0": trace.x0,
        "k": trace.requested_k,
        "iterates": [{"x": it.x, "fx": it.fx, "dfx": it.dfx} for it in trace.iterates],
        "outcome": outcome_to_dict(trace.outcome),
    }


def trace_to_json(trace: IterationTrace) -> str:
    return json.dumps(trace_to_dict(trace), allow_nan=False, separators=(",", ":"))
