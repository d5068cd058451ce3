"""Inertial forward-backward-forward iteration with Bregman backward steps.

One iteration, for ``n >= 1``::

    p_n     in argmin f(x) + D_u(x, x_n)/lam_n + <x, grad h(x_n)> + (alpha_n/lam_n) <x, x_{n-1} - x_n>
    x_{n+1} =  p_n + lam_n (grad h(x_n) - grad h(p_n))

From ``n = 2`` on, the vector ``s_n`` built from the last two iterations is a
limiting subgradient of ``f + h`` at ``p_n``; its norm drives the stopping rule.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bregman import BregmanGenerator
from .core import (
    CompositeProblem,
    FeasibilityError,
    IFBFError,
    SolverConfig,
    StepSchedule,
    UnsupportedGeneratorError,
    Vector,
    as_vector,
    evaluate_objective,
)
from .diagnostics import Trace, TraceRow
from .planner import PlannerReport
from .prox import reduce_subproblem, solve_subproblem

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERATIONS = "max-iterations"
SUBPROBLEM_FAILURE = "subproblem-failure"
NUMERICAL_FAILURE = "numerical-failure"

VARIANTS = ("inertial-fbf", "inertial-proximal-point", "tseng-plain")


class SubproblemFailure(IFBFError):
    pass


class VariantError(IFBFError, ValueError):
    """The requested variant's restrictions do not hold for this problem."""


@dataclass(frozen=True)
class IterateState:
    """Everything known after iteration ``n``.

    ``x_next`` is ``x_{n+1}``; the ``n = 0`` start state only carries
    ``x = x_0`` and ``x_next = x_1``.
    """

    n: int
    x_prev: Optional[Vector]
    x: Vector
    x_next: Vector
    p: Optional[Vector] = None
    grad_x: Optional[Vector] = None
    grad_p: Optional[Vector] = None
    s: Optional[Vector] = None
    lam: float = math.nan
    alpha: float = math.nan
    residual: float = math.nan
    objective: float = math.nan
    merit: float = math.nan
    cert_bound: float = math.nan

    @property
    def certificate_norm(self) -> float:
        return math.nan if self.s is None else float(np.linalg.norm(self.s))


@dataclass
class SolveResult:
    status: str
    x_star: Vector
    certificate_norm: float
    iterations: int
    residual: float
    objective: float
    trace: Optional[Trace] = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "x_star": [float(v) for v in self.x_star],
            "certificate_norm": self.certificate_norm,
            "residual": self.residual,
            "objective": self.objective,
            "iterations": self.iterations,
            "message": self.message,
        }


def start_state(x0, x1) -> IterateState:
    x0, x1 = as_vector(x0), as_vector(x1)
    if x0.shape != x1.shape:
        raise ValueError("x0 and x1 differ in length")
    return IterateState(n=0, x_prev=None, x=x0, x_next=x1)


def compute_certificate(gen: BregmanGenerator, lam: float, lam_prev: float, alpha: float,
                        x, p, grad_x, grad_p, x_prev, p_prev, grad_x_prev, grad_p_prev) -> Vector:
    """Subgradient of ``f + h`` at ``p_n`` assembled from iterations ``n`` and ``n - 1``."""
    return ((gen.gradient(x) - gen.gradient(p)) / lam
            + grad_p - grad_x
            + (alpha / lam) * (p_prev - x_prev)
            + (alpha * lam_prev / lam) * (grad_x_prev - grad_p_prev))


def certificate_bound(lam: float, lam_prev: float, alpha: float, lipschitz_u: float,
                      lipschitz_h: float, residual: float, residual_prev: float) -> float:
    return ((lipschitz_u / lam + lipschitz_h) * residual
            + (alpha / lam) * (1 + lam_prev * lipschitz_h) * residual_prev)


def step(problem: CompositeProblem, gen: BregmanGenerator, schedule: StepSchedule,
         state: IterateState, constants: PlannerReport) -> IterateState:
    """Run iteration ``state.n + 1``."""
    n = state.n + 1
    lam, alpha = schedule.lam(n), schedule.alpha(n)
    h = problem.smooth
    x_prev, x = state.x, state.x_next
    grad_x = h.gradient(x)
    target = reduce_subproblem(gen, lam, alpha, x, x_prev, grad_x)
    try:
        p = solve_subproblem(problem.nonsmooth, target)
    except (ArithmeticError, ValueError) as exc:
        raise SubproblemFailure(f"backward step failed at n={n}: {exc}") from exc
    grad_p = h.gradient(p)
    x_next = p + lam * (grad_x - grad_p)
    d = x - p
    residual = float(np.sqrt(d @ d))
    objective = evaluate_objective(problem, p)
    m2 = constants.m2 if constants.m2 is not None else 0.0
    merit = objective + m2 * residual ** 2 if objective != math.inf else math.inf

    s, bound = None, math.nan
    if n >= 2:
        s = compute_certificate(gen, lam, state.lam, alpha, x, p, grad_x, grad_p,
                                x_prev, state.p, state.grad_x, state.grad_p)
        bound = certificate_bound(lam, state.lam, alpha, gen.lipschitz, h.lipschitz,
                                  residual, state.residual)
    return IterateState(n=n, x_prev=x_prev, x=x, x_next=x_next, p=p, grad_x=grad_x,
                        grad_p=grad_p, s=s, lam=lam, alpha=alpha, residual=residual,
                        objective=objective, merit=merit, cert_bound=bound)


def _check_constants(schedule: StepSchedule, constants: PlannerReport, unsafe: bool) -> None:
    if unsafe:
        return
    if not constants.feasible:
        raise FeasibilityError("planner constants are infeasible", constants.lhs,
                               constants.input.sigma)
    inp = constants.input
    eps = 1e-15
    if (schedule.lambda_lo < inp.lambda_lo * (1 - eps)
            or schedule.lambda_hi > constants.lambda_hi * (1 + eps)
            or schedule.alpha_max > inp.alpha * (1 + eps) + eps):
        raise FeasibilityError("schedule exceeds the planned step/inertia box",
                               constants.lhs, inp.sigma)


def _finite(state: IterateState) -> bool:
    vals = [state.p, state.x_next]
    if state.s is not None:
        vals.append(state.s)
    return all(np.all(np.isfinite(v)) for v in vals) and math.isfinite(state.merit)


def run(problem: CompositeProblem, gen: BregmanGenerator, config: SolverConfig,
        constants: PlannerReport, x0, x1=None, unsafe: bool = False) -> SolveResult:
    """Iterate until residual and certificate are both below tolerance.

    ``x1`` defaults to ``x0``. The returned ``x_star`` is the last ``p_n``.
    """
    if not gen.is_quadratic:
        raise UnsupportedGeneratorError(f"generator kind {gen.kind!r} not supported by the solver")
    _check_constants(config.schedule, constants, unsafe)
    m = problem.dim
    x0 = as_vector(x0, m)
    x1 = x0.copy() if x1 is None else as_vector(x1, m)
    state = start_state(x0, x1)
    trace = Trace() if config.record_trace else None
    cum_res2 = 0.0
    dx = x1 - x0
    cum_dx2 = float(dx @ dx)
    status = MAX_ITERATIONS
    message = ""

    # overflow is reported through the status, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(config.max_iterations):
            try:
                new = step(problem, gen, config.schedule, state, constants)
            except SubproblemFailure as exc:
                status, message = SUBPROBLEM_FAILURE, str(exc)
                break
            if new.objective == math.inf:
                state = new
                status, message = SUBPROBLEM_FAILURE, f"backward step left dom f at n={new.n}"
                break
            if not _finite(new):
                state = new
                status, message = NUMERICAL_FAILURE, f"non-finite iterate at n={new.n}"
                break
            state = new
            cum_res2 += state.residual ** 2
            dx = state.x_next - state.x
            cum_dx2 += float(dx @ dx)
            if trace is not None:
                trace.append(TraceRow(state.n, state.lam, state.alpha, state.objective,
                                      state.residual, state.merit, state.certificate_norm,
                                      state.cert_bound, cum_res2, cum_dx2))
            log.debug("n=%d obj=%.17g res=%.3e cert=%.3e", state.n, state.objective,
                      state.residual, state.certificate_norm)
            if (state.n >= 2 and state.residual <= config.residual_tolerance
                    and state.certificate_norm <= config.certificate_tolerance):
                status = CONVERGED
                break

    if state.p is None:
        x_star, obj = state.x_next, math.nan
    else:
        x_star, obj = state.p, state.objective
    log.info("finished: status=%s iterations=%d", status, state.n)
    return SolveResult(status, np.array(x_star, dtype=float), state.certificate_norm, state.n,
                       state.residual, obj, trace, message)


def variant_config(variant: str, problem: CompositeProblem, gen: BregmanGenerator,
                   config: SolverConfig) -> SolverConfig:
    """Apply the restrictions defining ``variant``; raise :class:`VariantError` if it cannot apply."""
    if variant not in VARIANTS:
        raise VariantError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    if variant == "inertial-fbf":
        return config
    if gen.kind != "euclidean":
        raise VariantError(f"variant {variant!r} is defined for the euclidean generator only")
    if variant == "tseng-plain":
        return replace(config, schedule=replace(config.schedule, inertia=0.0))
    if not problem.smooth.identically_zero:
        raise VariantError("inertial-proximal-point requires h identically zero")
    return config


def run_variant(variant: str, problem: CompositeProblem, gen: BregmanGenerator,
                config: SolverConfig, constants: PlannerReport, x0, x1=None,
                unsafe: bool = False) -> SolveResult:
    cfg = variant_config(variant, problem, gen, config)
    return run(problem, gen, cfg, constants, x0, x1, unsafe)


def critical_point_residual(problem: CompositeProblem, gen: BregmanGenerator, x,
                            lam: float) -> float:
    """``|P(x) - x|`` for the (non-inertial) prox-gradient map ``P`` with step ``lam``."""
    x = as_vector(x, problem.dim)
    target = reduce_subproblem(gen, lam, 0.0, x, x, problem.smooth.gradient(x))
    return float(np.linalg.norm(solve_subproblem(problem.nonsmooth, target) - x))
