"""Random ensembles, low-rank form minimisation and boundary estimation."""

from .boundary import CSV_HEADER, AlphaEstimate, alpha_opt_estimate, parse_grid, proven_lower_bound, sweep_grid, write_csv
from .ensembles import KINDS, random_matrix, random_vector
from .optimize import (
    VIOLATION_TOL,
    RankFactorization,
    SearchReport,
    analytic_gradient,
    batch_objective,
    confirm_violation,
    fd_gradient,
    minimize_form,
    restart_seed,
)

__all__ = [
    "CSV_HEADER",
    "AlphaEstimate",
    "alpha_opt_estimate",
    "parse_grid",
    "proven_lower_bound",
    "sweep_grid",
    "write_csv",
    "KINDS",
    "random_matrix",
    "random_vector",
    "VIOLATION_TOL",
    "RankFactorization",
    "SearchReport",
    "analytic_gradient",
    "batch_objective",
    "confirm_violation",
    "fd_gradient",
    "minimize_form",
    "restart_seed",
]
