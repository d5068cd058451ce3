"""Bregman generators and distances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DimensionError, Vector, as_vector, sample_pairs

QUADRATIC_KINDS = ("euclidean", "diagonal-quadratic")


@dataclass(frozen=True)
class BregmanGenerator:
    """A ``sigma``-strongly convex ``u`` whose gradient is ``lipschitz``-Lipschitz.

    Quadratic kinds keep their diagonal in ``weights`` so the backward step
    can be reduced to a coordinatewise prox.
    """

    value: Callable[[Vector], float]
    gradient: Callable[[Vector], Vector]
    sigma: float
    lipschitz: float
    kind: str = "custom"
    weights: Optional[Vector] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.lipschitz >= self.sigma:
            raise ValueError("need sigma <= L_grad_u")

    @property
    def is_quadratic(self) -> bool:
        return self.kind in QUADRATIC_KINDS


def bregman_distance(gen: BregmanGenerator, x, y) -> float:
    """``D_u(x, y) = u(x) - u(y) - <grad u(y), x - y>``."""
    x, y = as_vector(x), as_vector(y)
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    return float(gen.value(x) - gen.value(y) - gen.gradient(y) @ (x - y))


def sandwich_bounds(gen: BregmanGenerator, x, y):
    """Return ``(sigma/2 |x-y|^2, D_u(x, y), L/2 |x-y|^2)``."""
    x, y = as_vector(x), as_vector(y)
    sq = float((x - y) @ (x - y))
    return 0.5 * gen.sigma * sq, bregman_distance(gen, x, y), 0.5 * gen.lipschitz * sq


def make_euclidean_generator(m: int) -> BregmanGenerator:
    if m < 1:
        raise ValueError("dimension must be >= 1")
    return BregmanGenerator(
        value=lambda x: 0.5 * float(x @ x),
        gradient=lambda x: np.array(x, dtype=float),
        sigma=1.0,
        lipschitz=1.0,
        kind="euclidean",
        weights=np.ones(m),
    )


def make_diagonal_generator(weights) -> BregmanGenerator:
    """``u(x) = 0.5 * sum(d_i x_i^2)`` with ``sigma = min d``, ``L = max d``."""
    d = as_vector(weights)
    if np.any(~(d > 0)):
        raise ValueError("diagonal weights must be strictly positive")
    d = d.copy()
    return BregmanGenerator(
        value=lambda x: 0.5 * float(d @ (x * x)),
        gradient=lambda x: d * x,
        sigma=float(d.min()),
        lipschitz=float(d.max()),
        kind="diagonal-quadratic",
        weights=d,
    )


def make_custom_generator(value, gradient, sigma: float, lipschitz: float, dim: int,
                          sample_count: int = 200, seed: int = 0,
                          rel_slack: float = 1e-9) -> BregmanGenerator:
    """Wrap user oracles after a sampled check of the sandwich inequality.

    Custom generators are accepted for distance computations; the solver
    rejects them since their backward step has no closed form here.
    """
    gen = BregmanGenerator(value, gradient, sigma, lipschitz, kind="custom")
    for x, y in sample_pairs(dim, sample_count, seed):
        lo, dist, hi = sandwich_bounds(gen, x, y)
        tol = rel_slack * (1.0 + abs(value(x)) + abs(value(y)))
        if not lo - tol <= dist <= hi + tol:
            raise ValueError(
                f"declared sigma/L inconsistent with u at x={x}, y={y}: {lo} <= {dist} <= {hi} fails"
            )
    return gen
