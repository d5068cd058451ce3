import json

import numpy as np
import pytest

from ifbf import (
    SolverConfig,
    StepSchedule,
    auto_plan,
    box_constrained_quadratic,
    make_euclidean_generator,
    sparse_least_squares,
)

# Planner inputs used by the acceptance runs. With the default nu = mu = L/20
# the largest step stays below 0.25, where the origin is a fixed point of the
# sparse least-squares problem; these inputs give lambda_hi ~ 0.282.
ACCEPT_PLANNER = {"nu": 0.2, "mu": 0.9, "alpha": 0.02, "lambda_lo": 0.28}

SPARSE_LS_CONFIG = {
    "problem": {"type": "sparse_ls", "A": [[1.0, 0.0], [0.0, 1.0]], "b": [2.0, 0.1], "kappa": 0.5},
    "generator": {"type": "euclidean"},
    "planner": ACCEPT_PLANNER,
    "schedule": {"alpha": 0.01},
    "solver": {"max_iterations": 10000, "residual_tolerance": 1e-9,
               "certificate_tolerance": 1e-7},
    "x0": [0.0, 0.0],
}


@pytest.fixture
def sparse_ls():
    return sparse_least_squares(np.eye(2), [2.0, 0.1], 0.5)


@pytest.fixture
def box_quad():
    return box_constrained_quadratic(np.diag([1.0, -1.0]), [0.0, 0.0], [-1.0, -1.0], [1.0, 1.0])


@pytest.fixture
def euclid2():
    return make_euclidean_generator(2)


def accept_plan(problem, gen):
    return auto_plan(problem.smooth.lipschitz, gen.sigma, gen.lipschitz, **ACCEPT_PLANNER)


def accept_config(plan, alpha, **kw):
    sched = StepSchedule(plan.input.lambda_lo, plan.lambda_hi, plan.input.alpha, inertia=alpha)
    return SolverConfig(sched, **kw)


@pytest.fixture
def config_file(tmp_path):
    def write(doc, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write


_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    prev = _CRITERIA.get(crit[0], (crit[1], True))
    _CRITERIA[crit[0]] = (crit[1], prev[1] and report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}")
