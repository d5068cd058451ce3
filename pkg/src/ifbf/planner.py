"""Step-size and inertia feasibility planning.

The descent constants are

    M1 = sigma/(2 lam_hi) - L_h - nu - (alpha/lam_lo) mu
    M2 = lam_hi^2 L_h^2 (L_h^2/(2 nu) + nu + L_h + L_u/(2 lam_lo))
         + (alpha/lam_lo) (mu lam_hi^2 L_h^2 + (1 + lam_hi L_h)^2 / (2 mu))

and a choice ``(nu, mu, alpha, lam_lo)`` is feasible when ``M1 > M2`` holds
already at ``lam_hi = lam_lo``; some ``lam_hi > lam_lo`` then keeps it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .core import FeasibilityError

DEFAULT_SAFETY = 0.9
DEFAULT_TOLERANCE = 1e-12
_MAX_BISECTIONS = 400


@dataclass(frozen=True)
class PlannerInput:
    nu: float
    mu: float
    alpha: float
    lambda_lo: float
    lipschitz_h: float
    sigma: float
    lipschitz_u: float

    def __post_init__(self):
        for name in ("nu", "mu", "lambda_lo", "sigma", "lipschitz_u"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("alpha", "lipschitz_h"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class PlannerReport:
    input: PlannerInput
    feasible: bool
    lhs: float
    lambda_hi: Optional[float]
    m1: Optional[float]
    m2: Optional[float]

    @property
    def margin(self) -> Optional[float]:
        if self.m1 is None:
            return None
        return self.m1 - self.m2

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "lhs": self.lhs,
            "sigma": self.input.sigma,
            "lambda_lo": self.input.lambda_lo,
            "lambda_hi": self.lambda_hi,
            "alpha": self.input.alpha,
            "m1": self.m1,
            "m2": self.m2,
            "margin": self.margin,
            "input": asdict(self.input),
        }


def default_nu_mu(lipschitz_h: float) -> float:
    return lipschitz_h / 20.0 if lipschitz_h > 0 else 0.05


def feasibility_lhs(inp: PlannerInput) -> float:
    ll, L, nu, mu, a = inp.lambda_lo, inp.lipschitz_h, inp.nu, inp.mu, inp.alpha
    return (2 * ll * (L + nu)
            + ll ** 2 * L ** 2 * (ll * L ** 2 / nu + inp.lipschitz_u + 2 * ll * (L + nu))
            + 2 * a * (mu + mu * ll ** 2 * L ** 2 + (1 + ll * L) ** 2 / (2 * mu)))


def check_feasible(inp: PlannerInput) -> bool:
    return feasibility_lhs(inp) < inp.sigma


def compute_m1(lambda_hi: float, inp: PlannerInput) -> float:
    return (inp.sigma / (2 * lambda_hi) - inp.lipschitz_h - inp.nu
            - inp.alpha / inp.lambda_lo * inp.mu)


def compute_m2(lambda_hi: float, inp: PlannerInput) -> float:
    L, lb, ll = inp.lipschitz_h, lambda_hi, inp.lambda_lo
    return (lb ** 2 * L ** 2 * (L ** 2 / (2 * inp.nu) + inp.nu + L + inp.lipschitz_u / (2 * ll))
            + inp.alpha / ll * (inp.mu * lb ** 2 * L ** 2 + (1 + lb * L) ** 2 / (2 * inp.mu)))


def _gap(lam: float, inp: PlannerInput) -> float:
    return compute_m1(lam, inp) - compute_m2(lam, inp)


def max_feasible_lambda_bar(inp: PlannerInput, safety: float = DEFAULT_SAFETY,
                            tolerance: float = DEFAULT_TOLERANCE) -> PlannerReport:
    """Locate the crossing ``lam*`` of ``M1 = M2`` and back off by ``safety``.

    ``M1`` decreases and ``M2`` increases in ``lam_hi``, so the crossing is
    unique; the returned ``lam_hi = lam_lo + safety (lam* - lam_lo)``.
    """
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    lhs = feasibility_lhs(inp)
    if not lhs < inp.sigma:
        raise FeasibilityError(f"infeasible: lhs={lhs!r} >= sigma={inp.sigma!r}", lhs, inp.sigma)
    lo = inp.lambda_lo
    if not _gap(lo, inp) > 0:
        raise FeasibilityError("numerically marginal: M1 <= M2 at lambda_lo", lhs, inp.sigma)
    hi = 2 * lo
    while _gap(hi, inp) > 0:
        lo, hi = hi, 2 * hi
    for _ in range(_MAX_BISECTIONS):
        if hi - lo <= tolerance:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _gap(mid, inp) > 0:
            lo = mid
        else:
            hi = mid
    lam = inp.lambda_lo + safety * (lo - inp.lambda_lo)
    m1, m2 = compute_m1(lam, inp), compute_m2(lam, inp)
    if not (lam > inp.lambda_lo and m1 > m2):
        raise FeasibilityError("no representable lambda_hi > lambda_lo with M1 > M2", lhs, inp.sigma)
    return PlannerReport(inp, True, lhs, lam, m1, m2)


def plan(inp: PlannerInput, safety: float = DEFAULT_SAFETY,
         tolerance: float = DEFAULT_TOLERANCE) -> PlannerReport:
    """Like :func:`max_feasible_lambda_bar` but returns an infeasible report instead of raising."""
    try:
        return max_feasible_lambda_bar(inp, safety, tolerance)
    except FeasibilityError as exc:
        return PlannerReport(inp, False, exc.lhs, None, None, None)


def max_lambda_lo(lipschitz_h: float, sigma: float, lipschitz_u: float, alpha: float,
                  nu: float, mu: float) -> float:
    """Supremum of ``lam_lo`` keeping the feasibility inequality (it grows with ``lam_lo``)."""
    def lhs(ll):
        return feasibility_lhs(PlannerInput(nu, mu, alpha, ll, lipschitz_h, sigma, lipschitz_u))

    if not 2 * alpha * (mu + 1 / (2 * mu)) < sigma:
        raise FeasibilityError("inertia too large for any step size", math.inf, sigma)
    lo, hi = 0.0, 1.0
    while lhs(hi) < sigma:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lhs(mid) < sigma:
            lo = mid
        else:
            hi = mid
    return lo


def auto_plan(lipschitz_h: float, sigma: float, lipschitz_u: float, alpha: float = 0.0,
              lambda_lo: Optional[float] = None, nu: Optional[float] = None,
              mu: Optional[float] = None, safety: float = DEFAULT_SAFETY,
              tolerance: float = DEFAULT_TOLERANCE, lo_fraction: float = 0.5) -> PlannerReport:
    """Fill unspecified planner inputs with defaults and search ``lam_hi``.

    Missing ``lambda_lo`` becomes ``lo_fraction`` times the largest feasible one.
    """
    nu = default_nu_mu(lipschitz_h) if nu is None else nu
    mu = default_nu_mu(lipschitz_h) if mu is None else mu
    if lambda_lo is None:
        lambda_lo = lo_fraction * max_lambda_lo(lipschitz_h, sigma, lipschitz_u, alpha, nu, mu)
    inp = PlannerInput(nu, mu, alpha, lambda_lo, lipschitz_h, sigma, lipschitz_u)
    return plan(inp, safety, tolerance)
