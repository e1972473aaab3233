"""Seeded random matrix ensembles on multipartite spaces."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..spectral import numerical_rank
from ..tensorspace import MultipartiteMatrix, _check_dims

__all__ = ["KINDS", "as_rng", "gaussian", "random_matrix", "random_vector"]

KINDS = ("ginibre", "hermitian", "psd", "rank_r", "density", "structured_rank1_plus_normal")


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_field(field: str) -> str:
    if field not in ("real", "complex"):
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    return field


def gaussian(rng: np.random.Generator, shape, field: str = "complex") -> np.ndarray:
    """Standard Gaussian array; complex entries have unit variance."""
    if _check_field(field) == "real":
        return rng.standard_normal(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def random_vector(dims: Sequence[int], field: str = "complex", seed=None) -> np.ndarray:
    dims = _check_dims(dims)
    return gaussian(as_rng(seed), math.prod(dims), field)


def _orthonormal(rng, D: int, k: int, field: str) -> np.ndarray:
    q, _ = np.linalg.qr(gaussian(rng, (D, k), field))
    return q


def random_matrix(kind: str, dims: Sequence[int], r: int | None = None, field: str = "complex",
                  seed=None) -> MultipartiteMatrix:
    """Draw a random matrix from one of the ensembles in ``KINDS``.

    Parameters
    ----------
    kind : str
        ``ginibre`` (i.i.d. Gaussian), ``hermitian``, ``psd`` (rank ``r``
        Wishart), ``rank_r`` (product of two ``D x r`` Gaussian factors),
        ``density`` (``psd`` with unit trace) or
        ``structured_rank1_plus_normal``: ``|v_1><w_1| + sum_{i>=2} eps_i |v_i><v_i|``
        with orthogonal ``v_i``, unimodular ``eps_i`` and ``v_1, w_1``
        projected onto the orthogonal complement of the ``v_i``.
    dims : sequence of int
        Subsystem dimensions.
    r : int, optional
        Rank parameter; defaults to the full dimension ``D``.
    field : {"complex", "real"}
    seed : int, Generator or None

    Returns
    -------
    MultipartiteMatrix
    """
    dims = _check_dims(dims)
    _check_field(field)
    D = math.prod(dims)
    if kind not in KINDS:
        raise ValueError(f"unknown ensemble {kind!r}; choose from {', '.join(KINDS)}")
    r = D if r is None else int(r)
    if r < 1 or r > D:
        raise ValueError(f"rank parameter must satisfy 1 <= r <= {D}, got {r}")
    rng = as_rng(seed)

    if kind == "ginibre":
        return MultipartiteMatrix(gaussian(rng, (D, D), field), dims)
    if kind == "hermitian":
        g = gaussian(rng, (D, D), field)
        return MultipartiteMatrix((g + g.conj().T) / 2, dims)
    if kind in ("psd", "density"):
        g = gaussian(rng, (D, r), field)
        m = g @ g.conj().T
        m = (m + m.conj().T) / 2
        if kind == "density":
            m = m / np.trace(m).real
        return MultipartiteMatrix(m, dims)
    if kind == "rank_r":
        for _ in range(20):
            m = gaussian(rng, (D, r), field) @ gaussian(rng, (D, r), field).conj().T
            if numerical_rank(m).numerical_rank == r:
                return MultipartiteMatrix(m, dims)
        raise RuntimeError("could not draw a matrix of the requested rank")
    # structured rank-1 plus normal block
    if r < 2:
        raise ValueError("structured ensemble needs r >= 2 (one rank-1 term plus a normal block)")
    k = r - 1
    if k >= D:
        raise ValueError("normal block must leave room for the rank-1 term")
    basis = _orthonormal(rng, D, k, field)
    scales = np.abs(rng.standard_normal(k)) + 0.1
    if field == "real":
        eps = rng.choice([-1.0, 1.0], size=k)
    else:
        eps = np.exp(2j * np.pi * rng.random(k))
    normal = (basis * (eps * scales ** 2)) @ basis.conj().T
    proj = np.eye(D) - basis @ basis.conj().T
    v1 = proj @ gaussian(rng, D, field)
    w1 = proj @ gaussian(rng, D, field)
    return MultipartiteMatrix(np.outer(v1, w1.conj()) + normal, dims)
