"""Singular-value quantities: Schatten norms, Hilbert-Schmidt product, rank."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensorspace import MultipartiteMatrix

__all__ = [
    "SpectralProfile",
    "singular_values",
    "schatten_norm",
    "schatten_norm_array",
    "operator_norm",
    "hs_inner",
    "numerical_rank",
]


def _data(C) -> np.ndarray:
    if isinstance(C, MultipartiteMatrix):
        return C.data
    return np.asarray(C)


def _check_p(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"Schatten index must satisfy p >= 1, got {p}")
    return p


def singular_values(C) -> np.ndarray:
    """Singular values in descending order."""
    return np.linalg.svd(_data(C), compute_uv=False)


def schatten_norm_array(a: np.ndarray, p: float) -> np.ndarray:
    """Schatten p-norm of every matrix in a ``(..., m, m)`` stack."""
    p = _check_p(p)
    s = np.linalg.svd(a, compute_uv=False)
    if math.isinf(p):
        return s[..., 0] if s.shape[-1] else np.zeros(s.shape[:-1])
    if p == 1:
        return s.sum(axis=-1)
    # scale by the largest value to avoid overflow for large p
    top = s[..., :1]
    safe = np.where(top > 0, top, 1.0)
    return safe[..., 0] * np.sum((s / safe) ** p, axis=-1) ** (1.0 / p)


def schatten_norm(C, p: float = 2) -> float:
    r"""Schatten p-norm :math:`(\sum_i \sigma_i^p)^{1/p}`.

    Parameters
    ----------
    C : MultipartiteMatrix or array_like
        Square or rectangular matrix.
    p : float
        Norm index, ``p >= 1``; ``numpy.inf`` gives the operator norm.

    Returns
    -------
    float
    """
    return float(schatten_norm_array(_data(C), p))


def operator_norm(C) -> float:
    return schatten_norm(C, np.inf)


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt product ``tr(A* B)``."""
    a, b = _data(A), _data(B)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


@dataclass(frozen=True)
class SpectralProfile:
    singular_values: np.ndarray
    numerical_rank: int
    tol_used: float


def numerical_rank(C, tol: float | None = None) -> SpectralProfile:
    """Count singular values above ``tol * sigma_max``.

    The default relative tolerance is ``1e-10 * D`` with ``D`` the larger
    matrix side. ``tol_used`` in the returned profile is the absolute
    threshold that was applied.
    """
    a = _data(C)
    s = np.linalg.svd(a, compute_uv=False)
    if tol is None:
        tol = 1e-10 * max(a.shape)
    threshold = float(tol * s[0]) if s.size else 0.0
    rank = int(np.count_nonzero(s > threshold))
    return SpectralProfile(singular_values=s, numerical_rank=rank, tol_used=threshold)
