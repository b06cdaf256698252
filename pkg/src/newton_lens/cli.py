"""Command-line front door: iterate, render, basin, radius, serve.

Every subcommand is deterministic: identical argv produces byte-identical
output files.  Exit codes: 0 success (iterate: converged), 1 usage/parse/IO
errors, 2 iterate finished with a non-converged outcome or no root found.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import analysis, engine, scene
from .expr import ParseError, parse

DEFAULT_K = 20
DEFAULT_GRID = 400
DEFAULT_PROBES = 200


def _parse_domain(text: str) -> tuple[float, float]:
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    parts = s.split(",")
    if len(parts) != 2:
        raise ValueError(f"domain must look like \"(lo,hi)\", got {text!r}")

    def side(p: str, sign: float) -> float:
        p = p.strip().lower()
        if p in ("inf", "+inf", "infinity"):
            return math.inf
        if p == "-inf":
            return -math.inf
        return float(p)

    lo, hi = side(parts[0], -1.0), side(parts[1], 1.0)
    return lo, hi


def _parse_interval(text: str) -> tuple[float, float]:
    lo, hi = _parse_domain(text)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"interval bounds must be finite, got {text!r}")
    return lo, hi


def _parse_excluded(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _build_problem(args: argparse.Namespace) -> engine.NewtonProblem:
    domain = _parse_domain(args.domain) if args.domain else (-math.inf, math.inf)
    excluded = _parse_excluded(args.exclude) if args.exclude else ()
    return engine.NewtonProblem.from_expression(parse(args.function), None, domain, excluded)


def _tolerances(args: argparse.Namespace) -> engine.Tolerances:
    tol = engine.DEFAULT_TOLERANCES
    overrides = {}
    if getattr(args, "tol_f", None) is not None:
        overrides["tol_f_rel"] = args.tol_f
    if getattr(args, "tol_x", None) is not None:
        overrides["tol_x"] = args.tol_x
    if overrides:
        from dataclasses import replace

        tol = replace(tol, **overrides)
    return tol


def _use_color(args: argparse.Namespace) -> bool:
    if os.environ.get("NEWTON_LENS_NO_COLOR"):
        return False
    return args.out is None and sys.stdout.isatty()


def _emit(args: argparse.Namespace, payload: str | bytes) -> None:
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        if not payload.endswith(b"\n"):
            sys.stdout.buffer.write(b"\n")
        sys.stdout.buffer.flush()


def _outcome_line(outcome: engine.Outcome) -> str:
    if isinstance(outcome, engine.Converged):
        return f"outcome: converged at iter {outcome.at_iter}, root {outcome.root!r}"
    if isinstance(outcome, engine.Cycle):
        return f"outcome: cycle period {outcome.period} from iter {outcome.first_iter}"
    if isinstance(outcome, engine.Diverged):
        return f"outcome: diverged at iter {outcome.at_iter}"
    if isinstance(outcome, engine.DerivativeTooSmall):
        return f"outcome: derivative-too-small at iter {outcome.at_iter}"
    if isinstance(outcome, engine.DomainExit):
        return f"outcome: domain-exit at iter {outcome.at_iter}"
    if isinstance(outcome, engine.EvaluationFault):
        return f"outcome: evaluation-fault at iter {outcome.at_iter} ({outcome.fault.kind})"
    return "outcome: inconclusive"


def _trace_table(trace: engine.IterationTrace, color: bool) -> str:
    dfx_header = "f'(x)"
    lines = [f"f(x) = {trace.function}"]
    lines.append(f"{'k':>4}  {'x':>24}  {'f(x)':>24}  {dfx_header:>24}")
    for i, it in enumerate(trace.iterates):
        fx = "-" if it.fx is None else f"{it.fx!r}"
        dfx = "-" if it.dfx is None else f"{it.dfx!r}"
        lines.append(f"{i:>4}  {it.x!r:>24}  {fx:>24}  {dfx:>24}")
    line = _outcome_line(trace.outcome)
    if color:
        code = "32" if isinstance(trace.outcome, engine.Converged) else "31"
        line = f"\x1b[{code}m{line}\x1b[0m"
    lines.append(line)
    return "\n".join(lines) + "\n"


def cmd_iterate(args: argparse.Namespace) -> int:
    problem = _build_problem(args)
    trace = engine.run(problem, args.x0, args.k, _tolerances(args))
    if args.format == "json":
        _emit(args, engine.trace_to_json(trace))
    else:
        _emit(args, _trace_table(trace, _use_color(args)))
    return 0 if isinstance(trace.outcome, engine.Converged) else 2


def cmd_render(args: argparse.Namespace) -> int:
    problem = _build_problem(args)
    trace = engine.run(problem, args.x0, args.k, _tolerances(args))
    viewport = None
    if args.viewport:
        xmin, xmax, ymin, ymax = (float(v) for v in args.viewport.split(","))
        viewport = scene.Viewport(xmin, xmax, ymin, ymax)
    built = scene.build_scene(problem, trace, viewport, args.samples or DEFAULT_GRID)
    if args.format == "json":
        _emit(args, scene.to_json(built))
    else:
        _emit(args, scene.to_svg(built))
    return 0


def cmd_basin(args: argparse.Namespace) -> int:
    if args.samples is None or args.samples < 2:
        raise _UsageError("basin requires -n/--samples >= 2")
    if not args.interval:
        raise _UsageError("basin requires --interval \"(lo,hi)\"")
    problem = _build_problem(args)
    interval = _parse_interval(args.interval)
    basin = analysis.sample_basin(problem, interval, args.samples, args.k, _tolerances(args))
    if args.format == "csv":
        _emit(args, analysis.basin_to_csv(basin))
    else:
        _emit(args, analysis.basin_to_json(basin))
    return 0


def cmd_radius(args: argparse.Namespace) -> int:
    problem = _build_problem(args)
    lo, hi = problem.domain
    scan_lo = max(lo, -10.0) if math.isfinite(lo) else -10.0
    scan_hi = min(hi, 10.0) if math.isfinite(hi) else 10.0
    if args.interval:
        scan = _parse_interval(args.interval)
    else:
        scan = (scan_lo, scan_hi)
    grid = args.samples or DEFAULT_GRID
    roots = analysis.find_roots(problem, scan, grid)
    if not roots:
        print("no root found in scan interval", file=sys.stderr)
        return 2
    if args.x0 is not None:
        root = min(roots, key=lambda r: abs(r.x_star - args.x0))
    else:
        root = roots[0]
    radius = analysis.convergence_radius(
        _estimate_k(problem, root, args, grid), problem, root
    )
    _emit(args, analysis.radius_to_json(radius, root))
    return 0


def _estimate_k(problem, root, args, grid) -> float:
    if args.interval:
        est_interval = _parse_interval(args.interval)
    else:
        lo, hi = problem.domain
        kappa = min(root.x_star - lo, hi - root.x_star)
        for p in problem.excluded:
            kappa = min(kappa, abs(root.x_star - p))
        half = 2.0 if not math.isfinite(kappa) else min(2.0, kappa / 2.0)
        est_interval = (root.x_star - half, root.x_star + half)
    return analysis.estimate_lipschitz(problem, root, est_interval, grid)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    listen = args.listen or os.environ.get("NEWTON_LENS_LISTEN") or "127.0.0.1:8765"
    host, _, port = listen.partition(":")
    app = create_app(ui_dir=args.ui)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or "8765"))
    return 0


class _UsageError(ValueError):
    pass


def _add_common(p: argparse.ArgumentParser, *, needs_x0: bool = False) -> None:
    p.add_argument("-f", "--function", required=True, help="expression in x, e.g. \"x^3 - x\"")
    p.add_argument("--x0", type=float, required=needs_x0, help="initial point")
    p.add_argument("-k", "--iters", dest="k", type=int, default=DEFAULT_K, help="max iterations")
    p.add_argument("--domain", help='open domain "(lo,hi)"; "inf" allowed')
    p.add_argument("--exclude", help="comma-separated puncture points, e.g. \"0\"")
    p.add_argument("--interval", help='analysis interval "(lo,hi)"')
    p.add_argument("-n", "--samples", type=int, help="sample/grid count")
    p.add_argument("-o", "--out", help="output path (defaults to stdout)")
    p.add_argument("--format", choices=("text", "json", "svg", "csv"), help="output format")
    p.add_argument("--seed", type=int, help="accepted for compatibility; sampling is seeded")
    p.add_argument("--tol-f", dest="tol_f", type=float, help="override relative f tolerance")
    p.add_argument("--tol-x", dest="tol_x", type=float, help="override step tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newton-lens",
        description="Newton's-method laboratory: traces, scenes, basins, radii.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iterate", help="run the iteration and print the trace")
    _add_common(p, needs_x0=True)
    p.set_defaults(func=cmd_iterate, format_default="text")

    p = sub.add_parser("render", help="render the tangent cascade as SVG (or scene JSON)")
    _add_common(p, needs_x0=True)
    p.add_argument("--viewport", help='explicit viewport "xmin,xmax,ymin,ymax"')
    p.set_defaults(func=cmd_render, format_default="svg")

    p = sub.add_parser("basin", help="sample a basin of attraction over an interval")
    _add_common(p)
    p.set_defaults(func=cmd_basin, format_default="json")

    p = sub.add_parser("radius", help="Lipschitz convergence radius around a root")
    _add_common(p)
    p.set_defaults(func=cmd_radius, format_default="json")

    p = sub.add_parser("serve", help="serve the HTTP API (and optionally the UI)")
    p.add_argument("--listen", help="host:port (or env NEWTON_LENS_LISTEN)")
    p.add_argument("--ui", help="directory of built frontend assets to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; remap
        return 0 if exc.code == 0 else 1
    if hasattr(args, "format") and args.format is None:
        args.format = getattr(args, "format_default", "text")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
