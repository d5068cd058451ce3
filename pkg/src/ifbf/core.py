"""Domain types shared by the solver, planner and diagnostics.

Extended-real values use IEEE ``math.inf`` as the "+infinity" tag; the
nonsmooth part of a problem may return it, nothing may return ``-inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .rng import XorShift64Star

Vector = np.ndarray
Rule = Union[float, Callable[[int], float]]

PROX_KINDS = ("zero", "l0", "l1", "box", "custom-scalar")


class IFBFError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(IFBFError, ValueError):
    pass


class UnsupportedGeneratorError(IFBFError):
    pass


class UnsupportedProxError(IFBFError):
    pass


class FeasibilityError(IFBFError):
    """Planner inputs violate the step-size feasibility inequality."""

    def __init__(self, message: str, lhs: float = math.nan, sigma: float = math.nan):
        super().__init__(message)
        self.lhs = lhs
        self.sigma = sigma


class NumericalError(IFBFError):
    pass


def as_vector(x, m: Optional[int] = None) -> Vector:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if m is not None and v.shape[0] != m:
        raise DimensionError(f"expected length {m}, got {v.shape[0]}")
    return v


@dataclass(frozen=True)
class SmoothFunction:
    """The smooth part ``h`` with an ``L``-Lipschitz gradient."""

    dim: int
    value: Callable[[Vector], float]
    gradient: Callable[[Vector], Vector]
    lipschitz: float
    identically_zero: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be a positive integer")
        if not self.lipschitz >= 0:
            raise ValueError("gradient Lipschitz constant must be >= 0")

    @classmethod
    def zero(cls, m: int) -> "SmoothFunction":
        return cls(m, lambda x: 0.0, lambda x: np.zeros(m), 0.0, identically_zero=True)

    @classmethod
    def linear(cls, c) -> "SmoothFunction":
        c = as_vector(c)
        return cls(c.size, lambda x: float(c @ x), lambda x: c.copy(), 0.0)

    @classmethod
    def quadratic(cls, Q, c=None, lipschitz: Optional[float] = None) -> "SmoothFunction":
        """``h(x) = 0.5 x'Qx + c'x`` for symmetric ``Q``."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        m = Q.shape[0]
        c = np.zeros(m) if c is None else as_vector(c, m)
        if lipschitz is None:
            lipschitz = float(np.max(np.abs(np.linalg.eigvalsh(Q))))
        return cls(
            m,
            lambda x: float(0.5 * x @ (Q @ x) + c @ x),
            lambda x: Q @ x + c,
            lipschitz,
        )


@dataclass(frozen=True)
class ProxSpec:
    """Names the separable prox family used for the backward step.

    ``custom-scalar`` carries ``scalar_value`` (the per-coordinate function)
    and ``scalar_prox(w, lam, d)``, which must return a minimizer of
    ``phi(x) + d / (2 lam) (x - w)^2``.
    """

    kind: str
    kappa: float = 0.0
    lo: Optional[Vector] = None
    hi: Optional[Vector] = None
    scalar_value: Optional[Callable[[float], float]] = None
    scalar_prox: Optional[Callable[[float, float, float], float]] = None

    def __post_init__(self):
        if self.kind not in PROX_KINDS:
            raise UnsupportedProxError(f"unknown prox family {self.kind!r}")


@dataclass(frozen=True)
class NonsmoothFunction:
    """The proper, lsc, bounded-below part ``f`` (may take ``+inf``)."""

    value: Callable[[Vector], float]
    prox: ProxSpec
    bounded_below: bool = True

    def __post_init__(self):
        if not self.bounded_below:
            raise ValueError("the nonsmooth part must be bounded from below")

    @classmethod
    def zero(cls) -> "NonsmoothFunction":
        return cls(lambda x: 0.0, ProxSpec("zero"))

    @classmethod
    def counting_norm(cls, kappa: float) -> "NonsmoothFunction":
        if kappa <= 0:
            raise ValueError("kappa must be positive for the counting norm")
        return cls(lambda x: kappa * float(np.count_nonzero(x)), ProxSpec("l0", kappa=kappa))

    @classmethod
    def one_norm(cls, kappa: float) -> "NonsmoothFunction":
        if kappa < 0:
            raise ValueError("kappa must be nonnegative")
        return cls(lambda x: kappa * float(np.sum(np.abs(x))), ProxSpec("l1", kappa=kappa))

    @classmethod
    def box_indicator(cls, lo, hi) -> "NonsmoothFunction":
        lo, hi = as_vector(lo), as_vector(hi)
        if lo.shape != hi.shape:
            raise DimensionError("box bounds differ in length")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")

        def value(x):
            return 0.0 if np.all((x >= lo) & (x <= hi)) else math.inf

        return cls(value, ProxSpec("box", lo=lo, hi=hi))

    @classmethod
    def separable(cls, phi: Callable[[float], float],
                  scalar_prox: Callable[[float, float, float], float]) -> "NonsmoothFunction":
        def value(x):
            return math.fsum(phi(float(t)) for t in x)

        return cls(value, ProxSpec("custom-scalar", scalar_value=phi, scalar_prox=scalar_prox))


@dataclass(frozen=True)
class CompositeProblem:
    smooth: SmoothFunction
    nonsmooth: NonsmoothFunction
    coercive: bool = False
    semialgebraic: bool = False
    lower_bound: float = -math.inf
    name: str = "custom"

    def __post_init__(self):
        box = self.nonsmooth.prox
        if box.kind == "box" and box.lo.size != self.dim:
            raise DimensionError("box bounds and smooth part differ in dimension")

    @property
    def dim(self) -> int:
        return self.smooth.dim


def _resolve(rule: Rule, n: int) -> float:
    return float(rule(n)) if callable(rule) else float(rule)


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes ``lambda_n`` in ``[lambda_lo, lambda_hi]`` and inertia ``alpha_n`` in ``[0, alpha_max]``.

    ``step`` and ``inertia`` are either constants or callables of ``n``;
    they default to ``lambda_hi`` and ``alpha_max``.
    """

    lambda_lo: float
    lambda_hi: float
    alpha_max: float = 0.0
    step: Optional[Rule] = None
    inertia: Optional[Rule] = None

    def __post_init__(self):
        if not self.lambda_lo > 0:
            raise ValueError("lambda_lo must be positive")
        if not self.lambda_hi >= self.lambda_lo:
            raise ValueError("lambda_hi must be >= lambda_lo")
        if not self.alpha_max >= 0:
            raise ValueError("alpha_max must be nonnegative")

    def lam(self, n: int) -> float:
        val = self.lambda_hi if self.step is None else _resolve(self.step, n)
        if not self.lambda_lo <= val <= self.lambda_hi:
            raise ValueError(f"lambda_{n}={val} outside [{self.lambda_lo}, {self.lambda_hi}]")
        return val

    def alpha(self, n: int) -> float:
        val = self.alpha_max if self.inertia is None else _resolve(self.inertia, n)
        if not 0.0 <= val <= self.alpha_max:
            raise ValueError(f"alpha_{n}={val} outside [0, {self.alpha_max}]")
        return val


@dataclass(frozen=True)
class SolverConfig:
    schedule: StepSchedule
    max_iterations: int = 10_000
    residual_tolerance: float = 1e-9
    certificate_tolerance: float = 1e-7
    record_trace: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not (self.residual_tolerance > 0 and self.certificate_tolerance > 0):
            raise ValueError("tolerances must be strictly positive")


def evaluate_objective(problem: CompositeProblem, x) -> float:
    """Return ``f(x) + h(x)``; ``+inf`` outside the domain of ``f``."""
    x = as_vector(x, problem.dim)
    fx = float(problem.nonsmooth.value(x))
    if fx == math.inf:
        return math.inf
    return fx + float(problem.smooth.value(x))


@dataclass
class Violation:
    kind: str
    x: Vector
    y: Vector
    lhs: float
    rhs: float


@dataclass
class ValidationReport:
    samples: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def sample_pairs(m: int, count: int, seed: int, scale: float = 10.0):
    """Yield ``count`` pairs of points drawn uniformly from ``[-scale, scale]^m``."""
    rng = XorShift64Star(seed)
    for _ in range(count):
        yield rng.uniform(-scale, scale, m), rng.uniform(-scale, scale, m)


def lipschitz_gap(h: SmoothFunction, x: Vector, y: Vector):
    lhs = float(np.linalg.norm(h.gradient(x) - h.gradient(y)))
    rhs = h.lipschitz * float(np.linalg.norm(x - y))
    return lhs, rhs


def descent_gap(h: SmoothFunction, x: Vector, y: Vector):
    """Both sides of ``h(y) <= h(x) + <grad h(x), y - x> + L/2 |y - x|^2``."""
    d = y - x
    lhs = float(h.value(y))
    hx = float(h.value(x))
    lin = float(h.gradient(x) @ d)
    quad = 0.5 * h.lipschitz * float(d @ d)
    # slack scale: magnitude of every term summed on the right
    scale = abs(lhs) + abs(hx) + abs(lin) + quad
    return lhs, hx + lin + quad, scale


def validate_problem(problem: CompositeProblem, sample_count: int = 100, seed: int = 0,
                     rel_slack: float = 1e-8, scale: float = 10.0) -> ValidationReport:
    """Spot-check the gradient Lipschitz bound and the descent inequality.

    Violations are collected with their witness pairs, never raised.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    h = problem.smooth
    report = ValidationReport(samples=sample_count)
    for x, y in sample_pairs(problem.dim, sample_count, seed, scale):
        lhs, rhs = lipschitz_gap(h, x, y)
        if lhs > rhs + rel_slack * (1.0 + rhs):
            report.violations.append(Violation("lipschitz", x, y, lhs, rhs))
        lhs, rhs, mag = descent_gap(h, x, y)
        if lhs > rhs + rel_slack * (1.0 + mag):
            report.violations.append(Violation("descent", x, y, lhs, rhs))
    return report
