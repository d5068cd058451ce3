"""JSON run configurations.

A configuration is one JSON object::

    {
      "problem":   {"type": "sparse_ls" | "l1_ls" | "box_quad" | "prox_only", ...},
      "generator": {"type": "euclidean"} | {"type": "diagonal", "weights": [...]},
      "planner":   {"nu", "mu", "alpha", "lambda_lo", "lipschitz_h", "sigma",
                    "lipschitz_u", "safety", "tolerance"},          # all optional
      "schedule":  {"lambda": r, "alpha": r},                       # optional
      "solver":    {"max_iterations", "residual_tolerance", "certificate_tolerance"},
      "x0": [...], "x1": [...], "jitter": r, "unsafe": false
    }

Problem fields follow the constructors in :mod:`ifbf.problems`: ``A``, ``b``,
``kappa`` for the least-squares families, ``Q``, ``c``, ``lo``, ``hi`` for
``box_quad``, and ``m``, ``prox`` plus ``kappa`` or ``lo``/``hi`` for
``prox_only``. Missing planner Lipschitz/convexity constants are taken from
the problem and generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import problems
from .bregman import BregmanGenerator, make_diagonal_generator, make_euclidean_generator
from .core import (
    CompositeProblem,
    NonsmoothFunction,
    SolverConfig,
    StepSchedule,
    UnsupportedGeneratorError,
    UnsupportedProxError,
    as_vector,
)
from .planner import DEFAULT_SAFETY, DEFAULT_TOLERANCE, PlannerReport, auto_plan
from .rng import XorShift64Star


class ConfigError(ValueError):
    pass


@dataclass
class Setup:
    problem: CompositeProblem
    generator: BregmanGenerator
    plan: PlannerReport
    solver: SolverConfig
    x0: np.ndarray
    x1: np.ndarray
    unsafe: bool


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    return doc


def _matrix(spec: dict, key: str) -> np.ndarray:
    try:
        return np.atleast_2d(np.asarray(spec[key], dtype=float))
    except KeyError:
        raise ConfigError(f"problem is missing {key!r}") from None


def _nonsmooth(spec: dict, m: int) -> NonsmoothFunction:
    kind = spec.get("prox", "zero")
    if kind == "zero":
        return NonsmoothFunction.zero()
    if kind == "l0":
        return NonsmoothFunction.counting_norm(float(spec["kappa"]))
    if kind == "l1":
        return NonsmoothFunction.one_norm(float(spec["kappa"]))
    if kind == "box":
        return NonsmoothFunction.box_indicator(as_vector(spec["lo"], m), as_vector(spec["hi"], m))
    raise UnsupportedProxError(f"prox {kind!r} is not available from a configuration")


def build_problem(spec: dict) -> CompositeProblem:
    kind = spec.get("type")
    if kind == "sparse_ls":
        return problems.sparse_least_squares(_matrix(spec, "A"), spec["b"], float(spec["kappa"]))
    if kind == "l1_ls":
        return problems.l1_least_squares(_matrix(spec, "A"), spec["b"], float(spec["kappa"]))
    if kind == "box_quad":
        Q = _matrix(spec, "Q")
        c = spec.get("c", [0.0] * Q.shape[0])
        return problems.box_constrained_quadratic(Q, c, spec["lo"], spec["hi"])
    if kind == "prox_only":
        m = int(spec["m"])
        f = _nonsmooth(spec, m)
        return problems.prox_only(m, f, coercive=f.prox.kind in ("l1", "box"))
    raise ConfigError(f"unknown problem type {kind!r}")


def build_generator(spec: Optional[dict], m: int) -> BregmanGenerator:
    spec = spec or {"type": "euclidean"}
    kind = spec.get("type")
    if kind == "euclidean":
        return make_euclidean_generator(m)
    if kind == "diagonal":
        weights = as_vector(spec["weights"], m)
        return make_diagonal_generator(weights)
    raise UnsupportedGeneratorError(f"generator {kind!r} has no closed-form backward step")


def build_plan(spec: dict, lipschitz_h=None, sigma=None, lipschitz_u=None) -> PlannerReport:
    def pick(key, fallback):
        val = spec.get(key, fallback)
        if val is None:
            raise ConfigError(f"planner needs {key!r}")
        return float(val)

    opt = {k: (None if spec.get(k) is None else float(spec[k])) for k in ("nu", "mu", "lambda_lo")}
    return auto_plan(
        pick("lipschitz_h", lipschitz_h),
        pick("sigma", sigma),
        pick("lipschitz_u", lipschitz_u),
        alpha=float(spec.get("alpha", 0.0)),
        safety=float(spec.get("safety", DEFAULT_SAFETY)),
        tolerance=float(spec.get("tolerance", DEFAULT_TOLERANCE)),
        **opt,
    )


def plan_from_config(doc: dict) -> PlannerReport:
    spec = doc.get("planner", {})
    if "problem" in doc:
        problem = build_problem(doc["problem"])
        gen = build_generator(doc.get("generator"), problem.dim)
        return build_plan(spec, problem.smooth.lipschitz, gen.sigma, gen.lipschitz)
    return build_plan(spec)


def build_setup(doc: dict, seed: int = 0, max_iterations: Optional[int] = None) -> Setup:
    if "problem" not in doc:
        raise ConfigError("configuration has no 'problem'")
    problem = build_problem(doc["problem"])
    m = problem.dim
    gen = build_generator(doc.get("generator"), m)
    plan = build_plan(doc.get("planner", {}), problem.smooth.lipschitz, gen.sigma, gen.lipschitz)
    unsafe = bool(doc.get("unsafe", False))

    sched = doc.get("schedule", {})
    lam = sched.get("lambda")
    alpha = sched.get("alpha")
    if plan.feasible:
        schedule = StepSchedule(plan.input.lambda_lo, plan.lambda_hi, plan.input.alpha,
                                step=None if lam is None else float(lam),
                                inertia=None if alpha is None else float(alpha))
    else:
        if lam is None:
            raise ConfigError("infeasible plan: the schedule needs an explicit 'lambda'")
        a = float(alpha if alpha is not None else plan.input.alpha)
        schedule = StepSchedule(float(lam), float(lam), a)

    sol = dict(doc.get("solver", {}))
    if max_iterations is not None:
        sol["max_iterations"] = max_iterations
    solver = SolverConfig(
        schedule,
        max_iterations=int(sol.get("max_iterations", 10_000)),
        residual_tolerance=float(sol.get("residual_tolerance", 1e-9)),
        certificate_tolerance=float(sol.get("certificate_tolerance", 1e-7)),
    )
    x0 = as_vector(doc.get("x0", np.zeros(m)), m)
    x1 = as_vector(doc.get("x1", x0), m)
    jitter = float(doc.get("jitter", 0.0))
    if jitter:
        x1 = x1 + XorShift64Star(seed).uniform(-jitter, jitter, m)
    return Setup(problem, gen, plan, solver, x0, x1, unsafe)
