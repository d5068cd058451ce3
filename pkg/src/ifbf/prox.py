"""Backward step: Bregman-prox subproblem for quadratic generators.

For ``u(x) = 0.5 * sum(d_i x_i^2)`` the subproblem

    argmin_x f(x) + D_u(x, x_n)/lam + <x, grad h(x_n)> + (alpha/lam) <x, x_prev - x_n>

has the same minimizers as ``f(x) + sum_i d_i/(2 lam) (x_i - w_i)^2`` with
``w = x_n - (lam/d) grad h(x_n) + (alpha/d)(x_n - x_prev)``. Separable ``f``
then reduces to one scalar prox per coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bregman import BregmanGenerator, bregman_distance
from .core import (
    NonsmoothFunction,
    UnsupportedGeneratorError,
    UnsupportedProxError,
    Vector,
    as_vector,
)


@dataclass(frozen=True)
class SubproblemTarget:
    w: Vector
    lam: float
    weights: Vector

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("step size must be positive")
        if np.any(~(self.weights > 0)):
            raise ValueError("weights must be positive")


def reduce_subproblem(gen: BregmanGenerator, lam: float, alpha: float, x_n, x_prev,
                      grad_h_xn) -> SubproblemTarget:
    if not gen.is_quadratic:
        raise UnsupportedGeneratorError(
            f"generator kind {gen.kind!r} has no closed-form backward step"
        )
    d = gen.weights
    w = x_n - (lam / d) * grad_h_xn + (alpha / d) * (x_n - x_prev)
    return SubproblemTarget(w=w, lam=lam, weights=d)


def prox_counting_norm(w, tau):
    """Hard threshold: keep ``w`` iff ``|w| > tau``; ties go to 0."""
    w = np.asarray(w, dtype=float)
    return np.where(np.abs(w) > tau, w, 0.0)


def prox_one_norm(w, t):
    """Soft threshold ``sign(w) max(|w| - t, 0)``."""
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.maximum(np.abs(w) - t, 0.0)


def prox_box(w, lo, hi):
    return np.clip(np.asarray(w, dtype=float), lo, hi)


def solve_subproblem(f: NonsmoothFunction, target: SubproblemTarget) -> Vector:
    """Return one minimizer of ``f(x) + sum d_i/(2 lam) (x_i - w_i)^2``."""
    spec = f.prox
    w, lam, d = target.w, target.lam, target.weights
    if spec.kind == "zero":
        return np.array(w, dtype=float)
    if spec.kind == "l0":
        return prox_counting_norm(w, np.sqrt(2.0 * lam * spec.kappa / d))
    if spec.kind == "l1":
        return prox_one_norm(w, lam * spec.kappa / d)
    if spec.kind == "box":
        return prox_box(w, spec.lo, spec.hi)
    if spec.kind == "custom-scalar":
        return np.array([float(spec.scalar_prox(wi, lam, di)) for wi, di in zip(w, d)])
    raise UnsupportedProxError(f"no registered prox for {spec.kind!r}")


def subproblem_objective(f: NonsmoothFunction, gen: BregmanGenerator, lam: float, alpha: float,
                         x_n, x_prev, grad_h_xn, x) -> float:
    """The unreduced backward-step objective, evaluated term by term."""
    x = as_vector(x)
    fx = float(f.value(x))
    return (fx + bregman_distance(gen, x, x_n) / lam + float(x @ grad_h_xn)
            + (alpha / lam) * float(x @ (x_prev - x_n)))


def brute_force_prox(f_scalar, w: float, lam: float, d: float, lo: float, hi: float,
                     step: float) -> float:
    """Grid-search minimizer of ``f_scalar(x) + d/(2 lam)(x - w)^2`` on ``[lo, hi]``.

    ``w`` and ``0`` are always added to the grid. Ties go to the smaller ``|x|``.
    ``f_scalar`` is applied to the whole grid when it accepts arrays.
    """
    if not step > 0:
        raise ValueError("grid step must be positive")
    if hi < lo:
        raise ValueError("empty grid")
    grid = np.concatenate([np.arange(lo, hi + 0.5 * step, step), [0.0, w]])
    try:
        fv = np.asarray(f_scalar(grid), dtype=float)
    except (TypeError, ValueError):
        fv = None
    if fv is None or fv.shape != grid.shape:
        fv = np.vectorize(f_scalar, otypes=[float])(grid)
    obj = fv + d / (2.0 * lam) * (grid - w) ** 2
    best = np.flatnonzero(obj == obj.min())
    return float(grid[best[np.argmin(np.abs(grid[best]))]])
