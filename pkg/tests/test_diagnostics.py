import io
import math

import numpy as np
import pytest

from ifbf import CompositeProblem, NonsmoothFunction, SmoothFunction, run
from ifbf.diagnostics import (
    CSV_HEADER,
    Trace,
    TraceRow,
    check_certificate_bound,
    check_descent_lemma,
    check_gradient_fd,
    check_merit_decrease,
    check_objective_convergence,
    check_summability,
    emit_csv,
    merit,
    read_csv,
)
from ifbf.problems import spectral_norm
from conftest import accept_config, accept_plan


def quad1():
    return CompositeProblem(SmoothFunction.quadratic([[1.0]]), NonsmoothFunction.zero())


def make_trace(residuals, merits=None):
    t = Trace()
    c = 0.0
    for i, r in enumerate(residuals, start=1):
        c += r * r
        m = merits[i - 1] if merits is not None else 1.0
        t.append(TraceRow(i, 0.5, 0.0, m, r, m, math.nan if i == 1 else r, 2 * r, c, c))
    return t


class TestMerit:
    def test_zero_gap(self):
        prob = quad1()
        assert merit(prob, 5.0, [0.3], [0.3]) == pytest.approx(0.045)

    def test_formula(self):
        assert merit(quad1(), 0.642, [0.5], [1.0]) == pytest.approx(0.2855, abs=1e-15)

    def test_degenerate_penalty(self):
        assert merit(quad1(), 0.0, [0.5], [1.0]) == 0.125

    def test_infinite(self):
        prob = CompositeProblem(SmoothFunction.zero(1), NonsmoothFunction.box_indicator([0], [1]))
        assert merit(prob, 1.0, [2.0], [0.0]) == math.inf


class TestMeritDecrease:
    def test_feasible_runs_decrease(self, sparse_ls, box_quad, euclid2):
        for prob, x0 in ((sparse_ls, [0.0, 0.0]), (box_quad, [0.6, 0.2])):
            plan = accept_plan(prob, euclid2)
            res = run(prob, euclid2, accept_config(plan, 0.01), plan, x0)
            h1 = res.trace.rows[0].merit
            rep = check_merit_decrease(res.trace, plan.m1, plan.m2, rel_slack=1e-9)
            assert rep.ok and not rep.violations and not rep.advisory
            assert abs(h1) < 10

    def test_constant_trace_holds_with_equality(self):
        rep = check_merit_decrease(make_trace([0.0] * 5), 1.0, 0.5)
        assert rep.ok

    def test_violation_located(self):
        rep = check_merit_decrease(make_trace([0.1] * 4, merits=[3.0, 2.0, 2.5, 1.0]), 1.0, 0.5)
        assert not rep.ok and rep.first_violation["n"] == 3

    def test_infeasible_is_advisory(self):
        rep = check_merit_decrease(make_trace([0.1] * 4, merits=[3.0, 2.0, 2.5, 1.0]), 0.5, 1.0)
        assert rep.advisory and rep.ok and rep.violations


def test_certificate_bound_check():
    assert check_certificate_bound(make_trace([0.3, 0.2, 0.1])).ok
    t = Trace([TraceRow(1, 0.5, 0, 0, 0.1, 0, math.nan, math.nan, 0, 0),
               TraceRow(2, 0.5, 0, 0, 0.1, 0, 0.5, 0.4, 0, 0)])
    rep = check_certificate_bound(t)
    assert not rep.ok and rep.first_violation["n"] == 2


class TestSummability:
    def test_geometric(self):
        N = 32
        res = [0.75 ** k for k in range(N)]
        rep = check_summability(make_trace(res))
        # oracle: tail quarter of a geometric series with ratio q = 0.75^2
        q = 0.75 ** 2
        k = N - N // 4
        expected = q ** k * (1 - q ** (N - k)) / (1 - q ** N)
        assert rep.details["residual_tail_ratio"] == pytest.approx(expected, rel=1e-9)
        assert rep.ok

    def test_constant_not_flagged(self):
        rep = check_summability(make_trace([1.0] * 40))
        assert rep.details["residual_tail_ratio"] == pytest.approx(0.25)
        assert rep.ok

    def test_all_zero(self):
        rep = check_summability(make_trace([0.0] * 16))
        assert rep.details["residual_tail_ratio"] == 0.0 and rep.ok

    def test_growing_is_flagged(self):
        rep = check_summability(make_trace([1.1 ** k for k in range(40)]))
        assert not rep.ok

    def test_too_short(self):
        with pytest.raises(ValueError):
            check_summability(make_trace([1.0] * 15))


def test_objective_convergence():
    t = make_trace([0.1] * 20, merits=[1.0] * 20)
    assert check_objective_convergence(t).ok
    t = make_trace([0.1] * 20, merits=list(np.linspace(1, 0, 20)))
    assert not check_objective_convergence(t).ok


class TestDescentLemma:
    def test_quadratic_equality(self):
        h = SmoothFunction.quadratic([[1.0]])
        assert h.value(np.array([1.0])) == h.value(np.array([0.0])) + 0 + 0.5
        assert check_descent_lemma(h, 200).ok

    def test_linear(self):
        assert check_descent_lemma(SmoothFunction.linear([1.0, -3.0]), 200).ok

    def test_least_squares_with_power_constant(self):
        rng = np.random.default_rng(4)
        A, b = rng.normal(size=(5, 3)), rng.normal(size=5)
        h = SmoothFunction(3, lambda x: 0.5 * float((A @ x - b) @ (A @ x - b)),
                           lambda x: A.T @ (A @ x - b), spectral_norm(A))
        assert check_descent_lemma(h, 1000).ok

    def test_understated_constant_fails(self):
        h = SmoothFunction(1, lambda x: float(x @ x), lambda x: 2 * x, 1.0)
        assert not check_descent_lemma(h, 50).ok


def test_gradient_fd():
    h = SmoothFunction.quadratic([[2.0, 1.0], [1.0, -1.0]], [0.5, 0.5])
    assert check_gradient_fd(h, 50).ok
    wrong = SmoothFunction(2, h.value, lambda x: 2 * h.gradient(x), h.lipschitz)
    assert not check_gradient_fd(wrong, 5).ok


class TestCsv:
    def test_empty_trace(self):
        buf = io.StringIO()
        emit_csv(Trace(), buf)
        assert buf.getvalue() == ",".join(CSV_HEADER) + "\n"

    def test_line_count(self):
        buf = io.StringIO()
        emit_csv(make_trace([0.3, 0.2, 0.1]), buf)
        assert len(buf.getvalue().splitlines()) == 4

    def test_round_trip_is_exact(self, sparse_ls, euclid2, tmp_path):
        plan = accept_plan(sparse_ls, euclid2)
        tr = run(sparse_ls, euclid2, accept_config(plan, 0.01), plan, [0.0, 0.0]).trace
        path = tmp_path / "t.csv"
        emit_csv(tr, path)
        back = read_csv(path)
        assert len(back) == len(tr)
        for a, b in zip(tr, back):
            for x, y in zip(vars(a).values(), vars(b).values()):
                assert (math.isnan(x) and math.isnan(y)) or x == y

    def test_bad_header(self):
        with pytest.raises(ValueError):
            read_csv(io.StringIO("a,b\n1,2\n"))

    def test_rows_must_increase(self):
        t = make_trace([0.1])
        with pytest.raises(ValueError):
            t.append(t.rows[0])
