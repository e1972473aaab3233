"""Numerical toolkit for partial-trace quadratic forms and Werner-state distillability."""

from .forms import (
    FormSpec,
    diagonal_pair_counterexample,
    creation_annihilation,
    inversion_P_tripartite,
    inversion_Q_bipartite,
    inversion_Q_tripartite,
    kronecker_difference_norm,
    alternating_binomial_sum,
    q_form,
    q_form_breakdown,
)
from .search import alpha_opt_estimate, minimize_form, random_matrix, sweep_grid
from .spectral import hs_inner, numerical_rank, operator_norm, schatten_norm
from .tensorspace import (
    MultipartiteMatrix,
    embed_identity,
    identity,
    load_json,
    partial_trace,
    partial_transpose,
    permute_systems,
    save_json,
)
from .werner import (
    WernerParams,
    psi_from_matrix,
    q_witness_equivalence,
    schmidt_rank,
    werner_ppt_min_eigenvalue,
    werner_state,
    witness_value,
)

__version__ = "0.1.0"

__all__ = [
    "FormSpec",
    "diagonal_pair_counterexample",
    "creation_annihilation",
    "inversion_P_tripartite",
    "inversion_Q_bipartite",
    "inversion_Q_tripartite",
    "kronecker_difference_norm",
    "alternating_binomial_sum",
    "q_form",
    "q_form_breakdown",
    "alpha_opt_estimate",
    "minimize_form",
    "random_matrix",
    "sweep_grid",
    "hs_inner",
    "numerical_rank",
    "operator_norm",
    "schatten_norm",
    "MultipartiteMatrix",
    "embed_identity",
    "identity",
    "load_json",
    "partial_trace",
    "partial_transpose",
    "permute_systems",
    "save_json",
    "WernerParams",
    "psi_from_matrix",
    "q_witness_equivalence",
    "schmidt_rank",
    "werner_ppt_min_eigenvalue",
    "werner_state",
    "witness_value",
]
