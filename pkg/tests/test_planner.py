import numpy as np
import pytest

from ifbf import FeasibilityError
from ifbf.planner import (
    PlannerInput,
    auto_plan,
    check_feasible,
    compute_m1,
    compute_m2,
    default_nu_mu,
    feasibility_lhs,
    max_feasible_lambda_bar,
    max_lambda_lo,
    plan,
)


def inp(**kw):
    base = dict(nu=0.05, mu=0.05, alpha=0.0, lambda_lo=0.1, lipschitz_h=1.0, sigma=1.0,
                lipschitz_u=1.0)
    base.update(kw)
    return PlannerInput(**base)


class TestLhs:
    def test_no_inertia(self):
        assert feasibility_lhs(inp()) == pytest.approx(0.2421, rel=1e-14)

    def test_with_inertia(self):
        assert feasibility_lhs(inp(alpha=0.01)) == pytest.approx(0.48511, rel=1e-14)

    def test_first_summand_alone_exceeds_sigma(self):
        assert feasibility_lhs(inp(lambda_lo=0.5)) >= 1.05
        assert not check_feasible(inp(lambda_lo=0.5))

    def test_feasible_cases(self):
        assert check_feasible(inp())
        assert check_feasible(inp(lambda_lo=1e-6))


class TestConstants:
    def test_m1(self):
        assert compute_m1(0.2, inp()) == pytest.approx(1.45, rel=1e-14)
        assert compute_m1(0.2, inp(nu=3.0)) == pytest.approx(-1.5, rel=1e-14)
        assert compute_m1(1.0, inp(lipschitz_h=0.0)) == pytest.approx(0.45, rel=1e-14)

    def test_m2(self):
        assert compute_m2(0.2, inp()) == pytest.approx(0.642, rel=1e-13)
        assert compute_m2(0.7, inp(lipschitz_h=0.0)) == 0.0
        assert compute_m2(0.2, inp(alpha=0.01)) == pytest.approx(2.0822, rel=1e-13)

    def test_boundary_equivalence(self):
        # feasibility at lambda_lo is exactly M1(lambda_lo) > M2(lambda_lo)
        rng = np.random.default_rng(3)
        for _ in range(500):
            p = inp(nu=rng.uniform(0.01, 1), mu=rng.uniform(0.01, 2), alpha=rng.uniform(0, 0.2),
                    lambda_lo=rng.uniform(0.001, 0.6), lipschitz_h=rng.uniform(0, 3),
                    sigma=rng.uniform(0.5, 2), lipschitz_u=rng.uniform(2, 4))
            gap = compute_m1(p.lambda_lo, p) - compute_m2(p.lambda_lo, p)
            lhs = feasibility_lhs(p)
            assert gap * 2 * p.lambda_lo == pytest.approx(p.sigma - lhs, abs=1e-12 * (1 + lhs))

    def test_monotone_in_lambda_hi(self):
        p = inp(alpha=0.01)
        grid = np.linspace(0.1, 2.0, 200)
        m1 = np.array([compute_m1(g, p) for g in grid])
        m2 = np.array([compute_m2(g, p) for g in grid])
        assert np.all(np.diff(m1) < 0) and np.all(np.diff(m2) >= 0)


def cubic_root():
    # M1 = M2 <=> 1/(2 lam) - 1.05 = 16.05 lam^2 <=> 16.05 lam^3 + 1.05 lam - 0.5 = 0
    roots = np.roots([16.05, 0.0, 1.05, -0.5])
    return float(roots[np.abs(roots.imag) < 1e-12].real.max())


class TestSearch:
    def test_root_of_the_cubic(self):
        lam_star = cubic_root()
        assert 0.24 < lam_star < 0.25
        rep = max_feasible_lambda_bar(inp(), safety=1 - 1e-6)
        assert rep.lambda_hi == pytest.approx(0.1 + (1 - 1e-6) * (lam_star - 0.1), abs=1e-11)
        assert rep.m1 > rep.m2 and rep.lambda_hi > 0.1

    def test_default_safety(self):
        rep = max_feasible_lambda_bar(inp())
        assert rep.lambda_hi == pytest.approx(0.1 + 0.9 * (cubic_root() - 0.1), abs=1e-11)

    def test_pure_proximal_point_closed_form(self):
        p = inp(lipschitz_h=0.0)
        root = p.sigma / (2 * p.nu)
        for safety in (1.0, 0.9):
            rep = max_feasible_lambda_bar(p, safety=safety)
            assert rep.lambda_hi == pytest.approx(p.lambda_lo + safety * (root - p.lambda_lo), rel=1e-12)
            assert rep.m2 == 0.0 and rep.m1 > 0

    def test_infeasible_raises(self):
        with pytest.raises(FeasibilityError) as err:
            max_feasible_lambda_bar(inp(lambda_lo=0.5))
        assert err.value.lhs >= 1.05 and err.value.sigma == 1.0
        rep = plan(inp(lambda_lo=0.5))
        assert not rep.feasible and rep.lambda_hi is None

    def test_bad_safety(self):
        with pytest.raises(ValueError):
            max_feasible_lambda_bar(inp(), safety=0.0)


class TestAutoPlan:
    def test_defaults(self):
        assert default_nu_mu(2.0) == 0.1
        assert default_nu_mu(0.0) == 0.05

    def test_lambda_lo_picked_inside_feasible_range(self):
        top = max_lambda_lo(1.0, 1.0, 1.0, 0.01, 0.05, 0.05)
        assert check_feasible(inp(alpha=0.01, lambda_lo=top * 0.999999))
        assert not check_feasible(inp(alpha=0.01, lambda_lo=top * 1.000001))
        rep = auto_plan(1.0, 1.0, 1.0, alpha=0.01)
        assert rep.feasible and rep.input.lambda_lo == pytest.approx(0.5 * top)

    def test_inertia_too_large(self):
        with pytest.raises(FeasibilityError):
            auto_plan(1.0, 1.0, 1.0, alpha=1.0)
