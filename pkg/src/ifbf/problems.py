"""Coercive, semi-algebraic test problems with certified gradient Lipschitz constants."""

from __future__ import annotations

import math

import numpy as np

from .core import (
    CompositeProblem,
    NonsmoothFunction,
    NumericalError,
    SmoothFunction,
    as_vector,
)
from .rng import XorShift64Star

INFLATION = 1e-6
MAX_POWER_ITERATIONS = 100_000


def _largest_eigenvalue(S: np.ndarray, tolerance: float) -> float:
    """Power iteration for the top eigenvalue of a symmetric PSD matrix."""
    n = S.shape[0]
    if not np.any(S):
        return 0.0
    rng = XorShift64Star(0)
    v = rng.uniform(0.5, 1.5, n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(MAX_POWER_ITERATIONS):
        w = S @ v
        new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(new - est) <= tolerance * abs(new):
            return max(new, float(norm))
        est = new
    raise NumericalError("power iteration did not converge")


def spectral_norm(M, tolerance: float = 1e-10) -> float:
    """Largest eigenvalue of ``M'M`` (i.e. ``|M|_2^2``), inflated by ``1 + 1e-6``.

    This is the gradient Lipschitz constant of ``0.5 |Mx - b|^2``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return _largest_eigenvalue(M.T @ M, tolerance) * (1 + INFLATION)


def _check_full_column_rank(A: np.ndarray) -> None:
    if not np.any(A):
        raise ValueError("A must be nonzero")
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise ValueError("A must have full column rank (coercivity is not certified otherwise)")


def _least_squares(A: np.ndarray, b: np.ndarray) -> SmoothFunction:
    lip = spectral_norm(A)

    def value(x):
        r = A @ x - b
        return 0.5 * float(r @ r)

    def gradient(x):
        return A.T @ (A @ x - b)

    return SmoothFunction(A.shape[1], value, gradient, lip)


def sparse_least_squares(A, b, kappa: float) -> CompositeProblem:
    """``kappa |x|_0 + 0.5 |Ax - b|^2``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = as_vector(b, A.shape[0])
    _check_full_column_rank(A)
    return CompositeProblem(_least_squares(A, b), NonsmoothFunction.counting_norm(kappa),
                            coercive=True, semialgebraic=True, lower_bound=0.0,
                            name="sparse_ls")


def l1_least_squares(A, b, kappa: float) -> CompositeProblem:
    """``kappa |x|_1 + 0.5 |Ax - b|^2``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = as_vector(b, A.shape[0])
    _check_full_column_rank(A)
    return CompositeProblem(_least_squares(A, b), NonsmoothFunction.one_norm(kappa),
                            coercive=True, semialgebraic=True, lower_bound=0.0,
                            name="l1_ls")


def box_constrained_quadratic(Q, c, lo, hi) -> CompositeProblem:
    """``0.5 x'Qx + c'x`` over a box; ``Q`` may be indefinite."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    m = Q.shape[0]
    if Q.shape != (m, m) or not np.allclose(Q, Q.T, rtol=0, atol=0):
        raise ValueError("Q must be square and symmetric")
    c = as_vector(c, m)
    lo, hi = as_vector(lo, m), as_vector(hi, m)
    if np.any(lo > hi):
        raise ValueError("lo > hi in some coordinate")
    lip = math.sqrt(_largest_eigenvalue(Q.T @ Q, 1e-10)) * (1 + INFLATION)
    h = SmoothFunction.quadratic(Q, c, lipschitz=lip)
    radius = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))
    bound = -0.5 * lip * radius ** 2 - float(np.linalg.norm(c)) * radius
    return CompositeProblem(h, NonsmoothFunction.box_indicator(lo, hi), coercive=True,
                            semialgebraic=True, lower_bound=bound, name="box_quad")


def prox_only(m: int, nonsmooth: NonsmoothFunction, coercive: bool = False,
              lower_bound: float = 0.0) -> CompositeProblem:
    """A problem with ``h = 0``, as used by the inertial proximal-point variant."""
    return CompositeProblem(SmoothFunction.zero(m), nonsmooth, coercive=coercive,
                            semialgebraic=nonsmooth.prox.kind in ("zero", "l0", "l1", "box"),
                            lower_bound=lower_bound, name="prox_only")
