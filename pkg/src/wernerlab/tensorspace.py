"""Dense multipartite matrices and the structural maps acting on them.

Basis convention: a basis index of a matrix on ``dims = (d_0, ..., d_{n-1})``
is the row-major mixed-radix encoding of the tuple ``(i_0, ..., i_{n-1})``,
subsystem 0 being the most significant digit. This is the convention of
:func:`numpy.kron`, so ``kron(A, B)`` places ``A`` on subsystem 0.

Subsystems are addressed with 0-based indices throughout the package. The
partial trace written ``tr_1`` in most texts is ``partial_trace(C, [0])``.

Besides the :class:`MultipartiteMatrix` API, the ``*_array`` functions work on
plain ndarrays with arbitrary leading batch axes; the search module uses them
to evaluate many candidate matrices at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DIM_CAP",
    "DimensionCapError",
    "MultipartiteMatrix",
    "identity",
    "kron",
    "partial_trace",
    "partial_transpose",
    "flip",
    "flip_pair",
    "permutation_operator",
    "permute_systems",
    "pad_embed",
    "embed_identity",
    "check_subset",
    "ptrace_array",
    "ptranspose_array",
    "embed_identity_array",
    "permute_array",
    "to_json",
    "from_json",
    "save_json",
    "load_json",
]

#: Largest total dimension ``prod(dims)`` accepted by the constructors.
DIM_CAP = 4096


class DimensionCapError(ValueError):
    """Raised when a construction would exceed :data:`DIM_CAP`."""


def _check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("dims must be non-empty")
    if any(d < 1 for d in dims):
        raise ValueError(f"subsystem dimensions must be >= 1, got {dims}")
    total = math.prod(dims)
    if total > DIM_CAP:
        raise DimensionCapError(f"total dimension {total} exceeds cap {DIM_CAP}")
    return dims


def check_subset(J: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate a set of subsystem indices and return it sorted."""
    J = tuple(sorted(set(int(j) for j in J)))
    for j in J:
        if not 0 <= j < n:
            raise ValueError(f"subsystem index {j} out of range for {n} subsystems")
    return J


@dataclass(frozen=True, eq=False)
class MultipartiteMatrix:
    """A complex square matrix tagged with its subsystem dimensions.

    The entries are copied on construction and the stored array is
    read-only, so instances can be shared freely.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = _check_dims(self.dims)
        data = np.array(self.data, dtype=complex)
        D = math.prod(dims)
        if data.ndim == 1 and D == 1 and data.size == 1:
            data = data.reshape(1, 1)
        if data.shape != (D, D):
            raise ValueError(f"entries have shape {data.shape}, expected {(D, D)} for dims {dims}")
        if not np.all(np.isfinite(data)):
            raise ValueError("entries must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def D(self) -> int:
        return self.data.shape[0]

    @property
    def H(self) -> "MultipartiteMatrix":
        return MultipartiteMatrix(self.data.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def _same(self, other):
        if not isinstance(other, MultipartiteMatrix):
            return NotImplemented
        if other.dims != self.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return other

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return MultipartiteMatrix(self.data + other.data, self.dims)

    def __sub__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return MultipartiteMatrix(self.data - other.data, self.dims)

    def __neg__(self):
        return MultipartiteMatrix(-self.data, self.dims)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return MultipartiteMatrix(scalar * self.data, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return MultipartiteMatrix(self.data / scalar, self.dims)

    def __matmul__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return MultipartiteMatrix(self.data @ other.data, self.dims)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def __repr__(self):
        return f"MultipartiteMatrix(dims={self.dims}, D={self.D})"


def _as_mm(C) -> MultipartiteMatrix:
    if isinstance(C, MultipartiteMatrix):
        return C
    raise TypeError(f"expected MultipartiteMatrix, got {type(C).__name__}")


def identity(dims: Sequence[int]) -> MultipartiteMatrix:
    dims = _check_dims(dims)
    return MultipartiteMatrix(np.eye(math.prod(dims)), dims)


def kron(A: MultipartiteMatrix, B: MultipartiteMatrix) -> MultipartiteMatrix:
    """Tensor product; the subsystems of ``A`` come first."""
    A, B = _as_mm(A), _as_mm(B)
    dims = _check_dims(A.dims + B.dims)
    return MultipartiteMatrix(np.kron(A.data, B.data), dims)


# -- array level -------------------------------------------------------------

def ptrace_array(a: np.ndarray, dims: Sequence[int], J: Iterable[int]) -> np.ndarray:
    """Partial trace over the subsystems ``J`` of a (batched) matrix array.

    ``a`` has shape ``(..., D, D)``. The result has shape ``(..., K, K)`` with
    ``K`` the product of the kept dimensions (``K = 1`` when everything is
    traced out).
    """
    dims = tuple(dims)
    n = len(dims)
    J = check_subset(J, n)
    batch = a.shape[:-2]
    nb = len(batch)
    t = a.reshape(batch + dims + dims)
    cur = n
    # descending so that the remaining axis positions stay valid
    for j in reversed(J):
        t = np.trace(t, axis1=nb + j, axis2=nb + cur + j)
        cur -= 1
    K = math.prod(dims[i] for i in range(n) if i not in J)
    return t.reshape(batch + (K, K))


def ptranspose_array(a: np.ndarray, dims: Sequence[int], J: Iterable[int]) -> np.ndarray:
    dims = tuple(dims)
    n = len(dims)
    J = check_subset(J, n)
    batch = a.shape[:-2]
    nb = len(batch)
    t = a.reshape(batch + dims + dims)
    axes = list(range(nb + 2 * n))
    for j in J:
        axes[nb + j], axes[nb + n + j] = axes[nb + n + j], axes[nb + j]
    return t.transpose(axes).reshape(a.shape)


def permute_array(a: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems: new subsystem ``k`` is old subsystem ``perm[k]``."""
    dims = tuple(dims)
    n = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of range({n})")
    batch = a.shape[:-2]
    nb = len(batch)
    t = a.reshape(batch + dims + dims)
    axes = list(range(nb)) + [nb + p for p in perm] + [nb + n + p for p in perm]
    return t.transpose(axes).reshape(a.shape)


def embed_identity_array(x: np.ndarray, dims: Sequence[int], J: Iterable[int]) -> np.ndarray:
    """Place an operator on the complement of ``J`` and identities on ``J``.

    This is the adjoint of :func:`ptrace_array` with respect to the
    Hilbert-Schmidt product.
    """
    dims = tuple(dims)
    n = len(dims)
    J = check_subset(J, n)
    keep = [i for i in range(n) if i not in J]
    DJ = math.prod(dims[j] for j in J)
    batch = x.shape[:-2]
    K = x.shape[-1]
    full = np.einsum("...ab,cd->...acbd", x, np.eye(DJ)).reshape(batch + (K * DJ, K * DJ))
    order = keep + list(J)
    sub = [dims[i] for i in order]
    # full is on subsystems in `order`; undo that ordering
    inverse = np.argsort(order)
    return permute_array(full, sub, inverse)


# -- matrix level ------------------------------------------------------------

def partial_trace(C: MultipartiteMatrix, J: Iterable[int]) -> MultipartiteMatrix:
    """Trace out the subsystems in ``J``.

    Tracing out every subsystem gives a 1x1 matrix holding ``tr C`` with
    ``dims == (1,)``; the empty set leaves ``C`` unchanged.
    """
    C = _as_mm(C)
    J = check_subset(J, C.n)
    kept = tuple(d for i, d in enumerate(C.dims) if i not in J) or (1,)
    return MultipartiteMatrix(ptrace_array(C.data, C.dims, J), kept)


def partial_transpose(C: MultipartiteMatrix, J: Iterable[int]) -> MultipartiteMatrix:
    C = _as_mm(C)
    return MultipartiteMatrix(ptranspose_array(C.data, C.dims, J), C.dims)


def permute_systems(C: MultipartiteMatrix, perm: Sequence[int]) -> MultipartiteMatrix:
    """Conjugate ``C`` by the subsystem permutation; ``perm[k]`` is the old
    index of the new subsystem ``k``."""
    C = _as_mm(C)
    data = permute_array(C.data, C.dims, perm)
    return MultipartiteMatrix(data, tuple(C.dims[p] for p in perm))


def embed_identity(X: MultipartiteMatrix, dims: Sequence[int], J: Iterable[int]) -> MultipartiteMatrix:
    """``X`` on the subsystems outside ``J`` tensored with identities on ``J``."""
    dims = _check_dims(dims)
    J = check_subset(J, len(dims))
    X = _as_mm(X)
    return MultipartiteMatrix(embed_identity_array(X.data, dims, J), dims)


def permutation_operator(dims: Sequence[int], perm: Sequence[int]) -> MultipartiteMatrix:
    """Unitary ``P`` with ``P (x_0 ⊗ ... ⊗ x_{n-1}) = x_{perm[0]} ⊗ ... ⊗ x_{perm[n-1]}``.

    For this to be an operator on ``dims`` itself the permutation must
    preserve dimensions, i.e. ``dims[perm[k]] == dims[k]``.
    """
    dims = _check_dims(dims)
    n = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of range({n})")
    if any(dims[perm[k]] != dims[k] for k in range(n)):
        raise ValueError(f"permutation {perm} does not preserve dims {dims}")
    D = math.prod(dims)
    idx = np.arange(D).reshape(dims)
    # output slot k carries input factor perm[k]
    src = idx.transpose(perm).reshape(-1)
    P = np.zeros((D, D))
    P[np.arange(D), src] = 1.0
    return MultipartiteMatrix(P, dims)


def flip_pair(dims: Sequence[int], i: int, j: int) -> MultipartiteMatrix:
    """Operator exchanging the tensor factors ``i`` and ``j``."""
    dims = _check_dims(dims)
    n = len(dims)
    check_subset([i, j], n)
    if dims[i] != dims[j]:
        raise ValueError(f"cannot flip subsystems of dimensions {dims[i]} and {dims[j]}")
    perm = list(range(n))
    perm[i], perm[j] = perm[j], perm[i]
    return permutation_operator(dims, perm)


def flip(d: int) -> MultipartiteMatrix:
    """The swap ``F(x ⊗ y) = y ⊗ x`` on ``C^d ⊗ C^d``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return flip_pair((d, d), 0, 1)


def pad_embed(C: MultipartiteMatrix, target_dims: Sequence[int]) -> MultipartiteMatrix:
    """Embed ``C`` into larger local spaces by zero padding each factor.

    Each local basis of dimension ``d_i`` becomes the first ``d_i`` vectors of
    the target basis, so norms and all partial-trace norms are preserved.
    """
    C = _as_mm(C)
    target = _check_dims(target_dims)
    if len(target) != C.n:
        raise ValueError("target_dims must have one entry per subsystem")
    if any(t < d for t, d in zip(target, C.dims)):
        raise ValueError(f"cannot shrink dims {C.dims} to {target}")
    t = np.zeros(target + target, dtype=complex)
    t[tuple(slice(0, d) for d in C.dims * 2)] = C.data.reshape(C.dims + C.dims)
    D = math.prod(target)
    return MultipartiteMatrix(t.reshape(D, D), target)


# -- JSON I/O ------------------------------------------------------------------

def to_json(C: MultipartiteMatrix) -> dict:
    """Serialise as ``{"dims": [...], "re": [[...]], "im": [[...]]}``."""
    C = _as_mm(C)
    return {"dims": list(C.dims), "re": C.data.real.tolist(), "im": C.data.imag.tolist()}


def from_json(obj: dict) -> MultipartiteMatrix:
    try:
        dims = obj["dims"]
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != im.shape:
        raise ValueError("'re' and 'im' must have the same shape")
    if re.ndim == 2 and re.shape[1] == 1 and re.shape[0] != 1:
        raise ValueError("column vectors are not square matrices; use werner.witness_from_json")
    return MultipartiteMatrix(re + 1j * im, dims)


def save_json(C: MultipartiteMatrix, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json(C), fh)


def load_json(path) -> MultipartiteMatrix:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON in {path}: {exc}") from exc
    return from_json(obj)
