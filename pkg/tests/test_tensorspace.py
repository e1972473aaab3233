import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import embed_loops, ptrace_loops, ptranspose_loops, swap_operator_loops
from wernerlab.tensorspace import (
    DIM_CAP,
    DimensionCapError,
    MultipartiteMatrix,
    embed_identity,
    flip,
    flip_pair,
    from_json,
    identity,
    kron,
    load_json,
    pad_embed,
    partial_trace,
    partial_transpose,
    permutation_operator,
    permute_systems,
    ptrace_array,
    save_json,
    to_json,
)

DIMS = [(2,), (3,), (2, 2), (2, 3), (3, 2), (2, 2, 2), (2, 3, 2)]


def rand_mm(dims, seed=0):
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    return MultipartiteMatrix(rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D)), dims)


def all_subsets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


@pytest.mark.parametrize("dims", DIMS)
def test_partial_trace_matches_loops(dims):
    C = rand_mm(dims, 1)
    for J in all_subsets(len(dims)):
        got = partial_trace(C, J).data
        assert np.allclose(got, ptrace_loops(C.data, dims, J), atol=1e-12)


@pytest.mark.parametrize("dims", DIMS)
def test_partial_transpose_matches_loops(dims):
    C = rand_mm(dims, 2)
    for J in all_subsets(len(dims)):
        assert np.allclose(partial_transpose(C, J).data, ptranspose_loops(C.data, dims, J))


@pytest.mark.parametrize("dims", DIMS)
def test_embed_matches_loops_and_is_adjoint(dims):
    n = len(dims)
    C = rand_mm(dims, 3)
    for J in all_subsets(n):
        X = partial_trace(C, J)
        E = embed_identity(X, dims, J)
        assert np.allclose(E.data, embed_loops(X.data, dims, J))
        # <E(X), C> == <X, tr_J C>
        assert np.isclose(np.vdot(E.data, C.data), np.vdot(X.data, partial_trace(C, J).data))


def test_full_and_empty_trace():
    C = rand_mm((2, 3), 4)
    full = partial_trace(C, [0, 1])
    assert full.dims == (1,)
    assert np.isclose(full.data[0, 0], np.trace(C.data))
    assert np.array_equal(partial_trace(C, []).data, C.data)


def test_trace_of_tensor_product():
    A, B = rand_mm((2,), 5), rand_mm((3,), 6)
    AB = kron(A, B)
    assert np.allclose(partial_trace(AB, [1]).data, B.trace() * A.data)
    assert np.allclose(partial_trace(AB, [0]).data, A.trace() * B.data)


def test_batched_ptrace():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(5, 6, 6))
    out = ptrace_array(a, (2, 3), [1])
    assert out.shape == (5, 2, 2)
    for k in range(5):
        assert np.allclose(out[k], ptrace_loops(a[k], (2, 3), [1]))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_flip_partial_transpose_is_scaled_projector(d):
    pt = partial_transpose(flip(d), [0]).data
    omega = np.eye(d).reshape(-1) / np.sqrt(d)
    assert np.allclose(pt, d * np.outer(omega, omega))
    assert np.linalg.matrix_rank(pt) == 1
    assert np.isclose(np.trace(pt), d)


@pytest.mark.parametrize("dims,i,j", [((2, 2), 0, 1), ((2, 3, 2), 0, 2), ((3, 3, 3, 3), 1, 3)])
def test_flip_pair_matches_loops(dims, i, j):
    F = flip_pair(dims, i, j).data
    assert np.array_equal(F, swap_operator_loops(dims, i, j))
    assert np.allclose(F @ F, np.eye(F.shape[0]))


def test_flip_action_on_product():
    rng = np.random.default_rng(8)
    x, y = rng.normal(size=3), rng.normal(size=3)
    assert np.allclose(flip(3).data @ np.kron(x, y), np.kron(y, x))


def test_permutation_operator_on_products():
    rng = np.random.default_rng(9)
    xs = [rng.normal(size=2) for _ in range(3)]
    perm = (2, 0, 1)
    P = permutation_operator((2, 2, 2), perm).data
    lhs = P @ np.kron(np.kron(xs[0], xs[1]), xs[2])
    rhs = np.kron(np.kron(xs[2], xs[0]), xs[1])
    assert np.allclose(lhs, rhs)


def test_permute_systems_conjugates():
    C = rand_mm((2, 2, 2), 10)
    perm = (1, 2, 0)
    P = permutation_operator((2, 2, 2), perm).data
    assert np.allclose(permute_systems(C, perm).data, P @ C.data @ P.T)


def test_permute_systems_unequal_dims():
    A, B = rand_mm((2,), 11), rand_mm((3,), 12)
    swapped = permute_systems(kron(A, B), (1, 0))
    assert swapped.dims == (3, 2)
    assert np.allclose(swapped.data, np.kron(B.data, A.data))


def test_pad_embed_preserves_norms_of_marginals():
    C = rand_mm((2, 3), 13)
    P = pad_embed(C, (3, 3))
    assert P.dims == (3, 3)
    for J in all_subsets(2):
        a = np.linalg.norm(partial_trace(C, J).data)
        b = np.linalg.norm(partial_trace(P, J).data)
        assert np.isclose(a, b)


def test_identity_and_arithmetic():
    I = identity((2, 2))
    C = rand_mm((2, 2), 14)
    assert np.allclose((I @ C).data, C.data)
    assert np.allclose((C + C - 2 * C).data, 0)
    assert np.allclose((C / 2).data, C.data / 2)
    assert np.allclose(C.H.data, C.data.conj().T)


@pytest.mark.parametrize("bad", [
    lambda: MultipartiteMatrix(np.eye(3), (2, 2)),
    lambda: MultipartiteMatrix(np.full((2, 2), np.nan), (2,)),
    lambda: partial_trace(identity((2, 2)), [2]),
    lambda: flip_pair((2, 3), 0, 1),
    lambda: permutation_operator((2, 2), (0, 0)),
    lambda: pad_embed(identity((3,)), (2,)),
    lambda: identity(()),
])
def test_argument_errors(bad):
    with pytest.raises(ValueError):
        bad()


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        identity((DIM_CAP + 1,))
    with pytest.raises(DimensionCapError):
        identity((2,) * 13)


def test_data_is_read_only():
    C = rand_mm((2,), 15)
    with pytest.raises(ValueError):
        C.data[0, 0] = 1


def test_json_round_trip(tmp_path):
    C = rand_mm((2, 3), 16)
    assert np.array_equal(from_json(json.loads(json.dumps(to_json(C)))).data, C.data)
    path = tmp_path / "c.json"
    save_json(C, path)
    back = load_json(path)
    assert back.dims == C.dims and np.array_equal(back.data, C.data)


@pytest.mark.parametrize("obj", [{}, {"dims": [2]}, {"dims": [2], "re": [[1, 0], [0, 1]], "im": [[0]]},
                                 {"dims": [2], "re": [[1], [0]], "im": [[0], [0]]}])
def test_malformed_json(obj):
    with pytest.raises(ValueError):
        from_json(obj)


def test_load_json_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValueError):
        load_json(path)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(0, 2 ** 32 - 1))
def test_trace_is_preserved_by_every_partial_trace(dims, seed):
    C = rand_mm(tuple(dims), seed)
    for J in all_subsets(len(dims)):
        assert np.isclose(partial_trace(C, J).trace(), C.trace())


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=2, max_size=3), st.integers(0, 2 ** 32 - 1))
def test_partial_trace_composes(dims, seed):
    C = rand_mm(tuple(dims), seed)
    # tr_{0} then tr over what was subsystem 1 equals tr_{0,1}
    step = partial_trace(partial_trace(C, [0]), [0])
    assert np.allclose(step.data, partial_trace(C, [0, 1]).data)
