import json
import math

import pytest

from newton_lens.engine import (
    Converged,
    Cycle,
    DEFAULT_TOLERANCES,
    DerivativeTooSmall,
    Diverged,
    DomainExit,
    EvaluationFault,
    Inconclusive,
    Iterate,
    NewtonProblem,
    StepFault,
    classify,
    newton_step,
    run,
    trace_to_dict,
    trace_to_json,
)
from newton_lens.expr import parse

from conftest import INV_SQRT5


def xs_of(trace):
    return [it.x for it in trace.iterates]


# ---------------------------------------------------------------------------
# newton_step
# ---------------------------------------------------------------------------


def test_step_cube_root(cube_root_problem):
    nxt = newton_step(cube_root_problem, 0.2)
    assert nxt == pytest.approx(-0.4, rel=1e-12)


def test_step_cubic_half(cubic_problem):
    assert newton_step(cubic_problem, 0.5) == -1.0


def test_step_fixed_point_at_root(cubic_problem):
    assert newton_step(cubic_problem, 1.0) == 1.0


def test_step_faults_are_values(reciprocal_problem):
    out = newton_step(reciprocal_problem, 0.0)
    assert isinstance(out, StepFault)
    assert out.kind == "evaluation-fault"
    flat = NewtonProblem.from_text("x^2 + 1")
    out = newton_step(flat, 0.0)
    assert isinstance(out, StepFault)
    assert out.kind == "derivative-too-small"


def test_run_iterates_follow_newton_step(sigmoid_problem):
    trace = run(sigmoid_problem, 0.7, 10)
    for a, b in zip(trace.iterates, trace.iterates[1:]):
        assert newton_step(sigmoid_problem, a.x) == b.x


# ---------------------------------------------------------------------------
# run: outcomes from the worked examples
# ---------------------------------------------------------------------------


def test_domain_exit_records_offending_point(reciprocal_problem):
    trace = run(reciprocal_problem, 2.0, 5)
    assert xs_of(trace) == [2.0, 0.0]
    assert trace.outcome == DomainExit(1, 0.0)
    assert trace.iterates[1].fx is None


def test_two_cycle_of_bounded_sigmoid(sigmoid_problem):
    trace = run(sigmoid_problem, 1.0, 6)
    out = trace.outcome
    assert isinstance(out, Cycle)
    assert out.period == 2
    for i, it in enumerate(trace.iterates):
        assert abs(abs(it.x) - 1.0) < 1e-9
        assert (it.x > 0) == (i % 2 == 0)


def test_two_thirds_power_converges_halving(two_thirds_problem):
    trace = run(two_thirds_problem, 1.0, 100)
    assert isinstance(trace.outcome, Converged)
    assert abs(trace.outcome.root) < 1e-12
    xs = xs_of(trace)
    for j in range(min(len(xs), 40)):
        assert xs[j] == pytest.approx((-0.5) ** j, rel=1e-12)


def test_divergence_of_cube_root(cube_root_problem):
    trace = run(cube_root_problem, 0.2, 30)
    assert isinstance(trace.outcome, Diverged)
    assert trace.outcome.at_iter == len(trace.iterates) - 1
    threshold = DEFAULT_TOLERANCES.divergence_threshold(0.2)
    assert abs(xs_of(trace)[-1]) > threshold


def test_cubic_converges_in_one_iteration_from_half(cubic_problem):
    trace = run(cubic_problem, 0.5, 20)
    assert trace.outcome == Converged(-1.0, 1)
    assert xs_of(trace) == [0.5, -1.0]


def test_cubic_cycle_at_inv_sqrt5(cubic_problem):
    trace = run(cubic_problem, INV_SQRT5, 20)
    out = trace.outcome
    assert isinstance(out, Cycle) and out.period == 2
    for it in trace.iterates:
        assert abs(abs(it.x) - INV_SQRT5) < 1e-9


def test_cubic_near_critical_preimage_shoots_far(cubic_problem):
    trace = run(cubic_problem, 0.4656, 20)
    assert abs(trace.iterates[2].x) > 1e3 or isinstance(
        trace.outcome, DerivativeTooSmall
    )


def test_derivative_too_small_at_exact_critical_point():
    problem = NewtonProblem.from_text("x^2 + 1")
    trace = run(problem, 0.0, 10)
    assert trace.outcome == DerivativeTooSmall(0)


def test_flat_tail_escape_is_divergence(sigmoid_problem):
    trace = run(sigmoid_problem, 1.02, 60)
    assert isinstance(trace.outcome, Diverged)


def test_evaluation_fault_outcome():
    problem = NewtonProblem.from_text("ln(x)")
    trace = run(problem, 3.0, 10)
    out = trace.outcome
    assert isinstance(out, EvaluationFault)
    assert out.at_iter == 1
    assert out.fault.kind == "log-of-zero"
    assert trace.iterates[1].fx is None


def test_excluded_point_is_domain_exit():
    problem = NewtonProblem.from_text("x - 1", excluded=(1.0,))
    trace = run(problem, 5.0, 10)
    assert trace.outcome == DomainExit(1, 1.0)


def test_near_excluded_point_is_domain_exit():
    # landing within tol_x of a puncture counts as leaving the domain
    problem = NewtonProblem.from_text("x - 1.0000000000001", excluded=(1.0,))
    trace = run(problem, 5.0, 10)
    out = trace.outcome
    assert isinstance(out, DomainExit)
    assert out.offending_x == pytest.approx(1.0, abs=1e-12)


def test_start_outside_domain_is_domain_exit(reciprocal_problem):
    trace = run(reciprocal_problem, -1.0, 10)
    assert trace.outcome == DomainExit(0, -1.0)
    assert len(trace.iterates) == 1


def test_inconclusive_when_budget_exhausted(cube_problem):
    trace = run(cube_problem, 1.0, 3)
    assert isinstance(trace.outcome, Inconclusive)
    assert len(trace.iterates) == 4


def test_run_rejects_bad_k(cube_problem):
    with pytest.raises(ValueError):
        run(cube_problem, 1.0, 0)


# ---------------------------------------------------------------------------
# classify on synthetic prefixes
# ---------------------------------------------------------------------------


def _prefix(xs, fxs=None, dfxs=None):
    fxs = fxs or [1.0] * len(xs)
    dfxs = dfxs or [1.0] * len(xs)
    return [Iterate(x, fx, dfx) for x, fx, dfx in zip(xs, fxs, dfxs)]


def test_classify_diverged_on_huge_iterate():
    out = classify(_prefix([1.0, 2.0, 2e12]), x0=1.0)
    assert isinstance(out, Diverged) and out.at_iter == 2


def test_classify_cycle_needs_confirmation():
    xs = [0.3, -0.3, 0.3]
    assert classify(_prefix(xs), x0=0.3) is None  # first match only
    out = classify(_prefix(xs + [-0.3]), x0=0.3)
    assert out == Cycle(2, 0)


def test_classify_cycle_requires_non_stationary():
    # a slowly drifting tail matches period 1 and must not become a cycle
    xs = [1.0, 0.5, 0.5 + 1e-12, 0.5 + 2e-12, 0.5 + 3e-12]
    assert classify(_prefix(xs), x0=1.0) is None


def test_classify_converged_stationary_at_root():
    its = _prefix([1.0, 0.5, 0.5 + 1e-13], fxs=[1.0, 1e-3, 1e-13])
    out = classify(its, x0=1.0)
    assert isinstance(out, Converged)
    assert out.at_iter == 2


def test_classify_priority_converged_before_cycle():
    # exact zero residual on an alternating orbit reports convergence
    its = _prefix([0.4, -0.4, 0.4, -0.4], fxs=[1.0, 1.0, 1.0, 0.0])
    out = classify(its, x0=0.4)
    assert isinstance(out, Converged)


def test_classify_requires_iterates():
    with pytest.raises(ValueError):
        classify([], x0=0.0)


# ---------------------------------------------------------------------------
# Closed-form oracles (relative 1e-10 while within [1e-300, 1e300])
# ---------------------------------------------------------------------------


def _check_closed_form(trace, closed, rel=1e-10):
    checked = 0
    for j, it in enumerate(trace.iterates):
        want = closed(j)
        if not (1e-300 <= abs(want) <= 1e300):
            continue
        assert it.x == pytest.approx(want, rel=rel), f"iterate {j}"
        checked += 1
    assert checked >= 2


def test_closed_form_cube_root(cube_root_problem):
    trace = run(cube_root_problem, 0.2, 60)
    _check_closed_form(trace, lambda j: (-2.0) ** j * 0.2)


def test_closed_form_two_thirds(two_thirds_problem):
    trace = run(two_thirds_problem, 1.0, 100)
    _check_closed_form(trace, lambda j: (-0.5) ** j)


def test_closed_form_cube(cube_problem):
    trace = run(cube_problem, 1.0, 100)
    _check_closed_form(trace, lambda j: (2.0 / 3.0) ** j)


def test_closed_form_sigmoid(sigmoid_problem):
    trace = run(sigmoid_problem, 0.9, 60)
    _check_closed_form(trace, lambda j: (-1.0) ** j * 0.9 ** (3**j))


def test_closed_form_reciprocal(reciprocal_problem):
    for x0 in (1.5, 0.5, 1.9):
        trace = run(reciprocal_problem, x0, 40)

        def closed(j, x0=x0):
            return 1.0 - (1.0 - x0) ** (2**j)

        checked = 0
        for j, it in enumerate(trace.iterates):
            err = abs(1.0 - x0) ** (2**j)
            if err <= 1e-13:
                continue
            assert it.x == pytest.approx(closed(j), rel=1e-10)
            checked += 1
        assert checked >= 4


# ---------------------------------------------------------------------------
# Scaling invariance
# ---------------------------------------------------------------------------

_FIXTURES = [
    ("x^(1/3)", 0.2, 30, None, ()),
    ("x^(2/3)", 1.0, 100, None, ()),
    ("x^3", 1.0, 100, None, ()),
    ("x / sqrt(1 + x^2)", 0.9, 60, None, ()),
    ("x / sqrt(1 + x^2)", 1.0, 60, None, ()),
    ("x / sqrt(1 + x^2)", 1.02, 60, None, ()),
    ("1 - 1/x", 2.0, 40, (0.0, math.inf), ()),
    ("1 - 1/x", 1.5, 40, (0.0, math.inf), ()),
    ("x^3 - x", 0.5, 20, None, ()),
    ("x^3 - x", INV_SQRT5, 20, None, ()),
    ("x^3 - x", 0.4656, 20, None, ()),
    ("abs(x)^x + exp(x) + ln(abs(x)) + cbrt(x)", -0.65, 25, None, (0.0,)),
    ("abs(x)^x + exp(x) + ln(abs(x)) + cbrt(x)", -0.6, 30, None, (0.0,)),
]


def _problem_for(fn, domain, excluded, scale=None):
    text = fn if scale is None else f"{scale}*({fn})"
    return NewtonProblem.from_text(text, domain=domain or (-math.inf, math.inf), excluded=excluded)


@pytest.mark.parametrize("fn,x0,k,domain,excluded", _FIXTURES)
def test_power_of_two_scaling_is_bitwise(fn, x0, k, domain, excluded):
    base = run(_problem_for(fn, domain, excluded), x0, k)
    for c in ("4", "0.5", "-2"):
        scaled = run(_problem_for(fn, domain, excluded, c), x0, k)
        assert xs_of(scaled) == xs_of(base), f"c={c}"
        assert type(scaled.outcome) is type(base.outcome)


@pytest.mark.parametrize("fn,x0,k,domain,excluded", _FIXTURES[:6])
def test_general_scaling_within_tolerance(fn, x0, k, domain, excluded):
    base = run(_problem_for(fn, domain, excluded), x0, k)
    scaled = run(_problem_for(fn, domain, excluded, "3"), x0, k)
    for a, b in zip(xs_of(base), xs_of(scaled)):
        assert b == pytest.approx(a, rel=1e-12, abs=1e-300)


def test_root_fixed_point_invariant(cubic_problem):
    for root in (-1.0, 0.0, 1.0):
        trace = run(cubic_problem, root, 10)
        assert trace.outcome == Converged(root, 0)
        assert len(trace.iterates) == 1


@pytest.mark.parametrize("fn,x0,k,domain,excluded", _FIXTURES)
def test_trace_length_and_outcome_index(fn, x0, k, domain, excluded):
    trace = run(_problem_for(fn, domain, excluded), x0, k)
    assert len(trace.iterates) <= k + 1
    at = getattr(trace.outcome, "at_iter", None)
    if at is not None:
        assert 0 <= at < len(trace.iterates)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def test_trace_json_schema_and_field_order(cubic_problem):
    trace = run(cubic_problem, 0.5, 20)
    doc = trace_to_dict(trace)
    assert list(doc.keys()) == ["function", "x0", "k", "iterates", "outcome"]
    assert doc["function"] == "x^3 - x"
    assert doc["x0"] == 0.5
    assert doc["k"] == 20
    assert doc["iterates"][0] == {"x": 0.5, "fx": -0.375, "dfx": -0.25}
    assert doc["outcome"] == {"kind": "converged", "root": -1.0, "at_iter": 1}
    parsed = json.loads(trace_to_json(trace))
    assert parsed == doc


def test_trace_json_null_for_unavailable_values(reciprocal_problem):
    doc = trace_to_dict(run(reciprocal_problem, 2.0, 5))
    assert doc["iterates"][1]["fx"] is None
    assert doc["outcome"] == {"kind": "domain-exit", "at_iter": 1, "offending_x": 0.0}


def test_outcome_kinds_serialize(cube_root_problem, sigmoid_problem):
    assert trace_to_dict(run(cube_root_problem, 0.2, 30))["outcome"]["kind"] == "diverged"
    assert trace_to_dict(run(sigmoid_problem, 1.0, 10))["outcome"]["kind"] == "cycle"
    flat = NewtonProblem.from_text("x^2 + 1")
    assert (
        trace_to_dict(run(flat, 0.0, 5))["outcome"]["kind"] == "derivative-too-small"
    )
    bad = NewtonProblem.from_text("ln(x)")
    out = trace_to_dict(run(bad, 3.0, 5))["outcome"]
    assert out["kind"] == "evaluation-fault"
    assert out["fault"] == {"kind": "log-of-zero"}


def test_problem_validation():
    with pytest.raises(ValueError):
        NewtonProblem.from_text("x", domain=(1.0, -1.0))
    with pytest.raises(ValueError):
        NewtonProblem.from_text("x", domain=(0.0, 1.0), excluded=(5.0,))
