"""Inertial forward-backward-forward splitting with Bregman distances for nonconvex composite problems."""

from .bregman import (
    BregmanGenerator,
    bregman_distance,
    make_custom_generator,
    make_diagonal_generator,
    make_euclidean_generator,
)
from .core import (
    CompositeProblem,
    DimensionError,
    FeasibilityError,
    IFBFError,
    NonsmoothFunction,
    NumericalError,
    ProxSpec,
    SmoothFunction,
    SolverConfig,
    StepSchedule,
    UnsupportedGeneratorError,
    UnsupportedProxError,
    evaluate_objective,
    validate_problem,
)
from .planner import (
    PlannerInput,
    PlannerReport,
    auto_plan,
    check_feasible,
    compute_m1,
    compute_m2,
    feasibility_lhs,
    max_feasible_lambda_bar,
)
from .problems import (
    box_constrained_quadratic,
    l1_least_squares,
    prox_only,
    sparse_least_squares,
)
from .solver import SolveResult, critical_point_residual, run, run_variant

__version__ = "0.1.0"
