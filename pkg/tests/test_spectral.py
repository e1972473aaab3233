import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import schatten_eig
from wernerlab.spectral import hs_inner, numerical_rank, operator_norm, schatten_norm, singular_values
from wernerlab.tensorspace import MultipartiteMatrix, identity


def rand(D, seed):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, 7.5, np.inf])
@pytest.mark.parametrize("seed", range(4))
def test_schatten_matches_eigen_route(p, seed):
    A = rand(5, seed)
    assert np.isclose(schatten_norm(A, p), schatten_eig(A, p), rtol=1e-10)


def test_special_cases():
    A = rand(4, 10)
    assert np.isclose(schatten_norm(A, 2), np.linalg.norm(A, "fro"))
    assert np.isclose(schatten_norm(A, 1), np.linalg.norm(A, "nuc"))
    assert np.isclose(operator_norm(A), np.linalg.norm(A, 2))
    assert np.isclose(schatten_norm(identity((3,)), 4), 3 ** 0.25)


def test_large_p_does_not_overflow():
    A = 1e200 * np.eye(3)
    assert np.isclose(schatten_norm(A, 50), 1e200 * 3 ** (1 / 50))


@pytest.mark.parametrize("p", [0.5, 0, -1, float("nan")])
def test_invalid_p(p):
    with pytest.raises(ValueError):
        schatten_norm(np.eye(2), p)


def test_singular_values_sorted():
    s = singular_values(rand(6, 3))
    assert np.all(np.diff(s) <= 0)


def test_hs_inner():
    A, B = rand(3, 1), rand(3, 2)
    assert np.isclose(hs_inner(A, B), np.trace(A.conj().T @ B))
    with pytest.raises(ValueError):
        hs_inner(np.eye(2), np.eye(3))


@pytest.mark.parametrize("r", [1, 2, 3, 5])
def test_numerical_rank_of_products(r):
    rng = np.random.default_rng(r)
    C = rng.normal(size=(6, r)) @ rng.normal(size=(r, 6))
    prof = numerical_rank(MultipartiteMatrix(C, (2, 3)))
    assert prof.numerical_rank == r
    assert prof.tol_used > 0


def test_numerical_rank_respects_tolerance():
    C = np.diag([1.0, 1e-6, 0.0])
    assert numerical_rank(C).numerical_rank == 2
    assert numerical_rank(C, tol=1e-3).numerical_rank == 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1, 6), st.floats(1, 6))
def test_norms_monotone_in_p(seed, p, q):
    A = rand(4, seed)
    lo, hi = sorted((p, q))
    assert schatten_norm(A, hi) <= schatten_norm(A, lo) * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1, 8), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_norm_homogeneous(seed, p, lam):
    A = rand(3, seed)
    assert np.isclose(schatten_norm(lam * A, p), abs(lam) * schatten_norm(A, p), rtol=1e-10)
