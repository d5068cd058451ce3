"""Command-line interface: ``ifbf plan | run | check | compare``.

Exit codes:

    0   success (feasible plan, converged run, all checks pass)
    2   infeasible planner inputs
    3   run stopped at the iteration cap
    4   numerical or subproblem failure during a run
    5   a trace check failed
    64  unreadable or malformed input
    65  unsupported prox/generator or variant/problem pairing
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

from . import diagnostics
from .config import ConfigError, build_setup, load_json, plan_from_config
from .core import FeasibilityError, UnsupportedGeneratorError, UnsupportedProxError
from .solver import CONVERGED, MAX_ITERATIONS, VARIANTS, VariantError, run_variant

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_MAX_ITER = 3
EXIT_NUMERICAL = 4
EXIT_CHECK_FAILED = 5
EXIT_USAGE = 64
EXIT_UNSUPPORTED = 65

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("ifbf")


def _clean(obj):
    """Make floats JSON-safe: non-finite values become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(obj, out) -> None:
    out.write(json.dumps(_clean(obj), indent=2) + "\n")


def _status_code(status: str) -> int:
    if status == CONVERGED:
        return EXIT_OK
    if status == MAX_ITERATIONS:
        return EXIT_MAX_ITER
    return EXIT_NUMERICAL


def cmd_plan(args, out) -> int:
    report = plan_from_config(load_json(args.config))
    _emit(report.to_dict(), out)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_run(args, out) -> int:
    setup = build_setup(load_json(args.config), seed=args.seed, max_iterations=args.max_iters)
    result = run_variant(args.variant, setup.problem, setup.generator, setup.solver, setup.plan,
                         setup.x0, setup.x1, unsafe=setup.unsafe)
    if args.trace:
        diagnostics.emit_csv(result.trace, args.trace)
    doc = result.to_dict()
    doc["variant"] = args.variant
    doc["constants"] = setup.plan.to_dict()
    _emit(doc, out)
    return _status_code(result.status)


def _constants(args):
    if args.constants:
        doc = load_json(args.constants)
        doc = doc.get("constants", doc)
        try:
            return float(doc["m1"]), float(doc["m2"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("constants file lacks numeric 'm1' and 'm2'") from None
    if args.m1 is None or args.m2 is None:
        raise ConfigError("check needs --constants FILE or both --m1 and --m2")
    return args.m1, args.m2


def cmd_check(args, out) -> int:
    m1, m2 = _constants(args)
    try:
        trace = diagnostics.read_csv(args.trace)
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    if len(trace) == 0:
        raise ConfigError("trace has no rows")
    reports = diagnostics.trace_report(trace, m1, m2, args.rel_slack)
    ok = diagnostics.all_ok(reports)
    _emit({"ok": ok, "rows": len(trace), "checks": [r.to_dict() for r in reports]}, out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_compare(args, out) -> int:
    doc = load_json(args.config)
    variants = sorted(v.strip() for v in args.variants.split(",") if v.strip())
    setup = build_setup(doc, seed=args.seed, max_iterations=args.max_iters)
    rows = []
    for name in variants:
        result = run_variant(name, setup.problem, setup.generator, setup.solver, setup.plan,
                             setup.x0, setup.x1, unsafe=setup.unsafe)
        rows.append({"variant": name, "status": result.status, "iterations": result.iterations,
                     "objective": result.objective,
                     "x_star": [float(v) for v in result.x_star]})
    _emit(rows, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifbf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="check step-size feasibility and pick lambda_hi")
    p.add_argument("config")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="run the solver on a configuration")
    p.add_argument("config")
    p.add_argument("--trace", help="write the per-iteration trace CSV here")
    p.add_argument("--variant", default="inertial-fbf", choices=VARIANTS)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="verify a trace against the descent inequalities")
    p.add_argument("trace")
    p.add_argument("--constants", help="JSON from 'plan' or 'run' holding m1 and m2")
    p.add_argument("--m1", type=float)
    p.add_argument("--m2", type=float)
    p.add_argument("--rel-slack", type=float, default=1e-9)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", help="run several variants on one configuration")
    p.add_argument("config")
    p.add_argument("--variants", default="inertial-fbf,tseng-plain")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare)
    return parser


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("IFBF_LOG", "quiet"), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def main(argv=None, out=None) -> int:
    _setup_logging()
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (UnsupportedGeneratorError, UnsupportedProxError, VariantError) as exc:
        log.error("%s", exc)
        return EXIT_UNSUPPORTED
    except FeasibilityError as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        log.error("bad input: %s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
