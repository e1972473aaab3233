import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import witness_kron
from wernerlab.forms import FormSpec, q_form
from wernerlab.tensorspace import MultipartiteMatrix, flip, identity, partial_transpose
from wernerlab.werner import (
    WernerParams,
    WitnessVector,
    maximally_entangled,
    mixed_witness_values,
    psi_from_matrix,
    q_witness_equivalence,
    schmidt_rank,
    werner_ppt_min_eigenvalue,
    werner_pt_operator,
    werner_state,
    witness_from_json,
    witness_to_json,
    witness_value,
)


def rand_mm(d, n, seed, rank=None):
    rng = np.random.default_rng(seed)
    D = d ** n
    r = D if rank is None else rank
    A = rng.normal(size=(D, r)) + 1j * rng.normal(size=(D, r))
    B = rng.normal(size=(D, r)) + 1j * rng.normal(size=(D, r))
    return MultipartiteMatrix(A @ B.conj().T, (d,) * n)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("alpha", [-0.9, -0.3, 0.4, 1.0])
def test_werner_spectrum(d, alpha):
    rho = werner_state(WernerParams(d, alpha))
    assert np.isclose(rho.trace(), 1)
    ev = np.linalg.eigvalsh(rho.data)
    N = d * d + alpha * d
    sym, anti = (1 + alpha) / N, (1 - alpha) / N
    assert np.sum(np.isclose(ev, sym)) == d * (d + 1) // 2
    assert np.sum(np.isclose(ev, anti)) == d * (d - 1) // 2
    assert ev.min() >= -1e-14


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("alpha", [-1, -0.6, -0.2, 0.0, 0.7])
def test_partial_transpose_analytic_matches_numeric(d, alpha):
    params = WernerParams(d, alpha)
    numeric = partial_transpose(werner_state(params), [0]).data
    assert np.abs(werner_pt_operator(params).data - numeric).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_ppt_boundary(d):
    assert abs(werner_ppt_min_eigenvalue(WernerParams(d, -1 / d))) < 1e-14
    assert werner_ppt_min_eigenvalue(WernerParams(d, -1 / d - 0.01)) < 0
    assert werner_ppt_min_eigenvalue(WernerParams(d, -1 / d + 0.01)) > 0


def test_ppt_value_at_minus_one():
    assert np.isclose(werner_ppt_min_eigenvalue(WernerParams(2, -1)), -0.5)


@pytest.mark.parametrize("d,alpha", [(1, 0.0), (2, 1.5), (2, float("nan")), (2.5, 0.0)])
def test_params_validation(d, alpha):
    with pytest.raises(ValueError):
        WernerParams(d, alpha)


def test_maximally_entangled():
    om = maximally_entangled(3)
    assert np.isclose(np.linalg.norm(om), 1)
    assert np.allclose(partial_transpose(flip(3), [0]).data, 3 * np.outer(om, om))


# -- psi_C ---------------------------------------------------------------------------

def test_psi_of_rank_one_product():
    rng = np.random.default_rng(0)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = psi_from_matrix(MultipartiteMatrix(np.outer(v, w.conj()), (2, 2)))
    # v ⊗ conj(w) reordered to A1 B1 A2 B2
    expect = np.kron(v, w.conj()).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(-1)
    assert np.allclose(psi.amplitudes, expect)
    assert schmidt_rank(psi) == 1


@pytest.mark.parametrize("d,n", [(2, 1), (2, 2), (3, 2), (2, 3)])
@pytest.mark.parametrize("rank", [1, 2, 3])
def test_psi_norm_and_schmidt_rank(d, n, rank):
    C = rand_mm(d, n, 10 * rank + n, rank=rank)
    psi = psi_from_matrix(C)
    assert np.isclose(psi.norm2(), np.linalg.norm(C.data) ** 2)
    assert schmidt_rank(psi) == min(rank, d ** n)


def test_schmidt_rank_of_omega():
    for d in (2, 3, 4):
        psi = WitnessVector(maximally_entangled(d), d, 1)
        assert schmidt_rank(psi) == d


def test_schmidt_rank_other_cut():
    C = MultipartiteMatrix(np.eye(4), (2, 2))
    psi = psi_from_matrix(C)
    assert schmidt_rank(psi) == 4
    assert schmidt_rank(psi, cut=[0, 1]) == 1  # Omega ⊗ Omega is a product across copies
    with pytest.raises(ValueError):
        schmidt_rank(psi, cut=[])


def test_psi_requires_equal_dims():
    with pytest.raises(ValueError):
        psi_from_matrix(MultipartiteMatrix(np.eye(6), (2, 3)))


# -- witness equivalence -----------------------------------------------------------

@pytest.mark.parametrize("d,n", [(2, 1), (2, 2), (3, 2), (2, 3)])
@pytest.mark.parametrize("alpha", [-1, -0.55, -0.5, 0.0, 0.3, 1.0])
def test_witness_matches_kronecker_oracle(d, n, alpha):
    C = rand_mm(d, n, 7, rank=2)
    psi = psi_from_matrix(C)
    params = WernerParams(d, alpha)
    scaled = witness_value(psi, params) * params.normalization ** n
    assert np.isclose(scaled, witness_kron(C.data, d, n, alpha), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("d,n", [(2, 2), (3, 2), (2, 3), (2, 4)])
@pytest.mark.parametrize("seed", range(3))
def test_witness_equals_form(d, n, seed):
    C = rand_mm(d, n, seed, rank=2)
    for alpha in (-0.9, -0.5, -0.2, 0.6):
        q, wv, ratio = q_witness_equivalence(C, alpha)
        assert abs(ratio - 1) < 1e-10
        assert np.isclose(q, q_form(FormSpec((1,) * n, alpha), C))


def test_equivalence_handles_vanishing_form():
    q, wv, ratio = q_witness_equivalence(identity((2, 2)), -0.5)
    assert abs(q) < 1e-12 and ratio == 1.0


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_mixed_witnesses(d, seed):
    C = rand_mm(d, 2, seed, rank=3)
    scale = (d * d + d / 2) * (d * d - d / 2)
    for key, (expectation, form) in mixed_witness_values(C).items():
        assert np.isclose(expectation * scale, form, rtol=1e-10), key


def test_mixed_witness_requires_two_copies():
    with pytest.raises(ValueError):
        mixed_witness_values(rand_mm(2, 3, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-1, 1), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_witness_scales_quadratically(seed, alpha, lam):
    psi = psi_from_matrix(rand_mm(2, 2, seed, rank=2))
    scaled = WitnessVector(lam * psi.amplitudes, psi.d, psi.n)
    params = WernerParams(2, alpha)
    assert np.isclose(witness_value(scaled, params), abs(lam) ** 2 * witness_value(psi, params),
                      rtol=1e-9, atol=1e-12)


def test_witness_value_errors():
    psi = psi_from_matrix(rand_mm(2, 2, 1))
    with pytest.raises(ValueError):
        witness_value(psi, [WernerParams(2, 0.1)])
    with pytest.raises(ValueError):
        witness_value(psi, WernerParams(3, 0.1))
    with pytest.raises(ValueError):
        WitnessVector(np.ones(5), 2, 1)


def test_witness_json_round_trip():
    psi = psi_from_matrix(rand_mm(2, 2, 3))
    back = witness_from_json(json.loads(json.dumps(witness_to_json(psi))))
    assert back.d == psi.d and back.n == psi.n
    assert np.array_equal(back.amplitudes, psi.amplitudes)


@pytest.mark.parametrize("obj", [{}, {"dims": [2, 3], "re": [[0]] * 6, "im": [[0]] * 6},
                                 {"dims": [2, 2], "re": [[1, 0]] * 2, "im": [[0, 0]] * 2}])
def test_witness_json_malformed(obj):
    with pytest.raises(ValueError):
        witness_from_json(obj)
