"""Interactive Newton's-method laboratory.

Parse real functions of one variable, run and classify Newton iterations
with full geometric traces, quantify convergence (order, Lipschitz radius,
error bounds, basins of attraction), and export tangent-cascade scenes as
SVG or JSON.  A CLI (`newton-lens`) and a stateless HTTP API front the same
operations.
"""

from .analysis import (
    BasinMap,
    BasinSample,
    ConvergenceRadius,
    ConvergenceReport,
    ErrorBoundRow,
    InsufficientSamples,
    RateEstimate,
    RootEstimate,
    check_error_bound,
    convergence_radius,
    estimate_delta,
    estimate_lipschitz,
    estimate_order,
    find_roots,
    sample_basin,
)
from .engine import (
    Converged,
    Cycle,
    DerivativeTooSmall,
    Diverged,
    DomainExit,
    EvaluationFault,
    Inconclusive,
    Iterate,
    IterationTrace,
    NewtonProblem,
    Outcome,
    Tolerances,
    classify,
    newton_step,
    run,
    trace_to_json,
)
from .expr import (
    Binary,
    Constant,
    DomainFault,
    EvalResult,
    Expression,
    ParseError,
    Unary,
    Variable,
    differentiate,
    evaluate,
    format_expression,
    parse,
    simplify,
)
from .scene import Scene, SvgStyle, Viewport, build_scene, scene_from_json, to_json, to_svg

__version__ = "0.1.0"
