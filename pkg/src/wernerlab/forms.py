"""Partial-trace quadratic forms and the operators built around them.

The central object is the signed sum over subsets ``J`` of the subsystems

    q_v(p, gamma, alpha, C) = sum_J alpha^|J| (-1)^(|J| + sum_{k in J} v_k) ||tr_J C||_p^gamma

where ``tr_J`` traces out the subsystems in ``J`` (``tr_{} C = C``) and the
term for the full set is ``|tr C|^gamma``. With ``v = (1, ..., 1)`` and
``p = gamma = 2`` every sign is ``+`` and the form is the plain alternating
polynomial in ``alpha`` whose negativity on rank-2 matrices signals
distillability of the Werner state with parameter ``alpha``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .spectral import operator_norm, schatten_norm_array
from .tensorspace import (
    MultipartiteMatrix,
    embed_identity_array,
    flip_pair,
    ptrace_array,
)

__all__ = [
    "FormSpec",
    "subsets",
    "form_terms",
    "q_form",
    "q_form_breakdown",
    "InversionOperator",
    "inversion_operator",
    "inversion_Q_bipartite",
    "inversion_Q_tripartite",
    "inversion_P_tripartite",
    "creation_annihilation",
    "fermionic_bosonic_identity_residual",
    "kronecker_difference_norm",
    "positivity_polynomial",
    "DiagonalPairFamily",
    "diagonal_pair_counterexample",
    "diagonal_pair_closed_form",
    "alternating_binomial_sum",
    "rank1_flip_form",
    "rank1_symmetrized_norm",
]


@dataclass(frozen=True)
class FormSpec:
    """Selects one form ``q_v(p, gamma, alpha, .)``.

    ``v`` is the sign vector (1 = antisymmetric factor, 0 = symmetric
    factor). ``p = gamma = 2`` gives the Hilbert-Schmidt forms.
    """

    v: tuple[int, ...]
    alpha: float = 0.0
    p: float = 2.0
    gamma: float = 2.0

    def __post_init__(self):
        v = tuple(int(x) for x in self.v)
        if not v or any(x not in (0, 1) for x in v):
            raise ValueError(f"sign vector must be a non-empty 0/1 tuple, got {self.v}")
        p = float(self.p)
        if math.isnan(p) or p < 1:
            raise ValueError(f"p must be >= 1 or inf, got {self.p}")
        gamma = float(self.gamma)
        if not math.isfinite(gamma) or gamma < 1:
            raise ValueError(f"gamma must be a finite value >= 1, got {self.gamma}")
        alpha = float(self.alpha)
        if not math.isfinite(alpha):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return len(self.v)

    def with_alpha(self, alpha: float) -> "FormSpec":
        return FormSpec(self.v, alpha, self.p, self.gamma)


def subsets(n: int):
    """All subsets of ``range(n)`` ordered by size, then lexicographically."""
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


def form_terms(v: Sequence[int], alpha: float) -> list[tuple[tuple[int, ...], float]]:
    """``(J, coefficient)`` pairs of the form with sign vector ``v``."""
    n = len(v)
    out = []
    for J in subsets(n):
        sign = (-1) ** (len(J) + sum(v[k] for k in J))
        out.append((J, sign * alpha ** len(J)))
    return out


def _term_norms(a: np.ndarray, dims, J_list, p: float) -> list[np.ndarray]:
    n = len(dims)
    norms = []
    for J in J_list:
        if len(J) == n:
            norms.append(np.abs(np.trace(a, axis1=-2, axis2=-1)))
        else:
            norms.append(schatten_norm_array(ptrace_array(a, dims, J), p))
    return norms


def q_form(spec: FormSpec, C: MultipartiteMatrix) -> float:
    """Evaluate ``q_v(p, gamma, alpha, C)``.

    Parameters
    ----------
    spec : FormSpec
        Sign vector, norm index, exponent and parameter.
    C : MultipartiteMatrix
        Matrix on ``len(spec.v)`` subsystems.

    Returns
    -------
    float
        The form value; ``gamma``-homogeneous in ``C``.
    """
    return sum(norm ** spec.gamma * coef for norm, coef in q_form_breakdown(spec, C).values())


def q_form_breakdown(spec: FormSpec, C: MultipartiteMatrix) -> dict[tuple[int, ...], tuple[float, float]]:
    """Per-subset ``(||tr_J C||_p, signed coefficient)`` of the form.

    The full-set entry holds ``|tr C|``. Summing ``coef * norm**gamma`` over
    the values reproduces :func:`q_form`.
    """
    if len(spec.v) != C.n:
        raise ValueError(f"sign vector has length {len(spec.v)} but C has {C.n} subsystems")
    terms = form_terms(spec.v, spec.alpha)
    norms = _term_norms(C.data, C.dims, [J for J, _ in terms], spec.p)
    return {J: (float(nm), float(coef)) for (J, coef), nm in zip(terms, norms)}


# -- state inversion operators ---------------------------------------------

@dataclass(frozen=True, eq=False)
class InversionOperator:
    base_vector: np.ndarray
    r: int
    kind: str
    matrix: MultipartiteMatrix
    projected: bool
    #: True when the base vector is zero, in which case the operator is zero
    #: and every spectral bound holds trivially.
    degenerate: bool = False

    def spectrum_on_complement(self) -> np.ndarray:
        """Eigenvalues of the compression onto the orthogonal complement of
        the base vector (all eigenvalues when the base vector is zero)."""
        M = self.matrix.data
        a = self.base_vector
        if self.degenerate:
            return np.linalg.eigvalsh(M)
        U, _, _ = np.linalg.svd(a.reshape(-1, 1), full_matrices=True)
        B = U[:, 1:]
        return np.linalg.eigvalsh(B.conj().T @ M @ B)


def inversion_operator(a, dims, v: Sequence[int], alpha: float, projected: bool = False,
                       kind: str = "general", r: int = 0) -> InversionOperator:
    """Signed sum ``sum_J c_J (1_J ⊗ tr_J |a><a|)`` with the coefficients of
    ``q_v(alpha, .)``.

    ``1_J ⊗ tr_J X`` denotes the marginal on the complement of ``J`` with
    identities placed back on the traced slots. Its expectation value in
    ``x`` is ``||tr_{J^c} |a><x| ||_2^2``, so ``<x, Op x>`` is the
    corresponding form evaluated termwise on ``|a><x|`` with the roles of
    ``J`` and its complement exchanged.
    """
    dims = tuple(int(d) for d in dims)
    a = np.asarray(a, dtype=complex).reshape(-1)
    D = math.prod(dims)
    if a.size != D:
        raise ValueError(f"vector of length {a.size} does not match dims {dims}")
    if len(v) != len(dims):
        raise ValueError("sign vector length must match the number of subsystems")
    A = np.outer(a, a.conj())
    M = np.zeros((D, D), dtype=complex)
    for J, coef in form_terms(v, alpha):
        M += coef * embed_identity_array(ptrace_array(A, dims, J), dims, J)
    M = (M + M.conj().T) / 2
    nrm2 = float(np.vdot(a, a).real)
    degenerate = nrm2 == 0.0
    if projected and not degenerate:
        P = np.eye(D) - A / nrm2
        M = P @ M @ P
        M = (M + M.conj().T) / 2
    return InversionOperator(a, r, kind, MultipartiteMatrix(M, dims), projected, degenerate)


def inversion_Q_bipartite(a, r: int, dims, projected: bool = False) -> InversionOperator:
    """``|a><a| - (1/r)(1 ⊗ tr_1|a><a| + tr_2|a><a| ⊗ 1) + (1/r^2)||a||^2 1``.

    On the complement of ``a`` its spectrum lies in
    ``[-(1/r)(1 - 1/r)||a||^2, ||a||^2 / r^2]``.
    """
    if len(dims) != 2:
        raise ValueError("bipartite operator needs two subsystem dimensions")
    if r < 1:
        raise ValueError("r must be >= 1")
    return inversion_operator(a, dims, (1, 1), -1.0 / r, projected, "bipartite-Q", r)


def inversion_Q_tripartite(a, r: int, dims, projected: bool = False) -> InversionOperator:
    if len(dims) != 3:
        raise ValueError("tripartite operator needs three subsystem dimensions")
    if r < 1:
        raise ValueError("r must be >= 1")
    return inversion_operator(a, dims, (1, 1, 1), -1.0 / r, projected, "tripartite-Q", r)


def inversion_P_tripartite(a, r: int, dims, projected: bool = False) -> InversionOperator:
    """Operator of the ``v = (0, 1, 1)`` tripartite form at ``-1/r``; bounded
    below by ``(1 - r^2)/r^3 ||a||^2`` on the complement of ``a``."""
    if len(dims) != 3:
        raise ValueError("tripartite operator needs three subsystem dimensions")
    if r < 1:
        raise ValueError("r must be >= 1")
    return inversion_operator(a, dims, (0, 1, 1), -1.0 / r, projected, "tripartite-P", r)


# -- creation / annihilation ---------------------------------------------------

def creation_annihilation(v, sign: int) -> tuple[np.ndarray, np.ndarray]:
    """Explicit matrices of ``a*_±(v)`` (shape ``(D^2, D)``) and ``a_±(v)``.

    ``a*_±(v) w = (v ⊗ w ± w ⊗ v) / sqrt(2)`` and the annihilator is its
    adjoint.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 (bosonic) or -1 (fermionic)")
    v = np.asarray(v, dtype=complex).reshape(-1, 1)
    eye = np.eye(v.shape[0])
    create = (np.kron(v, eye) + sign * np.kron(eye, v)) / math.sqrt(2)
    return create, create.conj().T


def fermionic_bosonic_identity_residual(v, w, dims) -> tuple[float, float]:
    """Operator-norm residuals of the marginal identities

        1 ⊗ tr_1|v><w| - tr_2|v><w| ⊗ 1 = a_-(w) F_24 a*_-(v)
        1 ⊗ tr_1|v><w| + tr_2|v><w| ⊗ 1 = a_+(w) F_24 a*_+(v)

    with ``F_24`` exchanging the second factors of the two copies of
    ``H_1 ⊗ H_2``. Returns ``(fermionic, bosonic)``.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise ValueError("identity is stated for bipartite spaces")
    v = np.asarray(v, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    X = np.outer(v, w.conj())
    left = embed_identity_array(ptrace_array(X, dims, [0]), dims, [0])
    right = embed_identity_array(ptrace_array(X, dims, [1]), dims, [1])
    F24 = flip_pair(dims + dims, 1, 3).data
    out = []
    for sign in (-1, 1):
        create_v, _ = creation_annihilation(v, sign)
        _, annihilate_w = creation_annihilation(w, sign)
        rhs = annihilate_w @ F24 @ create_v
        lhs = left + sign * right
        out.append(operator_norm(lhs - rhs))
    return out[0], out[1]


def kronecker_difference_norm(C: MultipartiteMatrix) -> float:
    """``||1 ⊗ tr_1 C - tr_2 C ⊗ 1||_inf``, bounded by the trace norm of C."""
    if C.n != 2:
        raise ValueError("C must be bipartite")
    dims = C.dims
    left = embed_identity_array(ptrace_array(C.data, dims, [0]), dims, [0])
    right = embed_identity_array(ptrace_array(C.data, dims, [1]), dims, [1])
    return operator_norm(left - right)


def positivity_polynomial(x: Sequence[float]) -> float:
    """``(r-1) sum x_i^2 - 2 sum_{i>j} x_i x_j`` with ``r = len(x)``.

    Both this expanded form and the sum of squared pairwise differences are
    computed; they must agree to 1e-12 relative.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    r = x.size
    cross = sum(x[i] * x[j] for i in range(r) for j in range(i))
    expanded = (r - 1) * float(np.sum(x ** 2)) - 2 * cross
    pairwise = sum((x[i] - x[j]) ** 2 for i in range(r) for j in range(i))
    scale = max(1.0, float(np.sum(x ** 2)) * max(r - 1, 1))
    if abs(expanded - pairwise) > 1e-12 * scale:
        raise ArithmeticError(f"polynomial forms disagree: {expanded} vs {pairwise}")
    return float(pairwise)


# -- diagonal-pair family -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiagonalPairFamily:
    C: MultipartiteMatrix
    q_value: float
    closed_form: float


def diagonal_pair_closed_form(n: int, eps: float) -> float:
    alpha = -0.5 - eps
    return 2.0 * sum(math.comb(n, k) * alpha ** k for k in range(n))


def diagonal_pair_counterexample(n: int, d: int, eps: float) -> DiagonalPairFamily:
    """Rank-2 matrix ``|v><v| - |w><w|`` with ``v = e_0^{⊗n}``, ``w = e_1^{⊗n}``.

    Every proper partial trace has squared 2-norm 2 and the trace vanishes,
    so ``q^(n)(-1/2 - eps, C) = 2 sum_{k<n} binom(n, k) (-1/2 - eps)^k``,
    which is negative for even ``n`` and ``eps > 0``.
    """
    if n < 2 or n % 2:
        raise ValueError("the family is only certified for even n >= 2")
    if d < 2:
        raise ValueError("d must be >= 2")
    if not eps > 0:
        raise ValueError("eps must be positive")
    D = d ** n
    e0 = np.zeros(d)
    e0[0] = 1
    e1 = np.zeros(d)
    e1[1] = 1
    v = e0
    w = e1
    for _ in range(n - 1):
        v = np.kron(v, e0)
        w = np.kron(w, e1)
    data = np.outer(v, v) - np.outer(w, w)
    C = MultipartiteMatrix(data.reshape(D, D), (d,) * n)
    q = q_form(FormSpec((1,) * n, alpha=-0.5 - eps), C)
    return DiagonalPairFamily(C, q, diagonal_pair_closed_form(n, eps))


def alternating_binomial_sum(n: int, m: int) -> tuple[Fraction, Fraction]:
    """Both sides of the binomial identity behind the diagonal-pair family, exactly.

    ``lhs = sum_{k=m}^{n-1} (-1)^k / 2^(k-m) binom(n,k) binom(k,m)`` and
    ``rhs = binom(n,m) (1/2)^(n-m) ((-1)^m - (-1)^n)``.
    """
    if not 0 <= m < n:
        raise ValueError(f"need 0 <= m < n, got n={n}, m={m}")
    lhs = sum(
        Fraction((-1) ** k, 2 ** (k - m)) * math.comb(n, k) * math.comb(k, m)
        for k in range(m, n)
    )
    rhs = math.comb(n, m) * Fraction(1, 2 ** (n - m)) * ((-1) ** m - (-1) ** n)
    return Fraction(lhs), Fraction(rhs)


# -- rank-one structure ----------------------------------------------------

def _swap_slots(t: np.ndarray, i: int, j: int) -> np.ndarray:
    return np.swapaxes(t, i, j)


def rank1_flip_form(v, w, dims, sign_vector: Sequence[int] | None = None) -> float:
    """``<v ⊗ w, prod_k (1 ∓ F_{k, n+k}) v ⊗ w>`` on ``H ⊗ H``.

    ``F_{k, n+k}`` exchanges factor ``k`` of the first copy with factor
    ``k`` of the second; the sign is ``-`` where ``sign_vector[k] == 1``
    (antisymmetric) and ``+`` otherwise. With all ones this equals
    ``q^(n)(-1, |v><w|)``.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    s = (1,) * n if sign_vector is None else tuple(sign_vector)
    v = np.asarray(v, dtype=complex).reshape(dims)
    w = np.asarray(w, dtype=complex).reshape(dims)
    x = np.multiply.outer(v, w)
    y = x
    for k in range(n):
        y = y - (1 if s[k] else -1) * _swap_slots(y, k, n + k)
    return float(np.vdot(x, y).real)


def _slice_decomposition(v: np.ndarray, dims) -> list[list[np.ndarray]]:
    """Write ``v = sum_i v_i^1 ⊗ ... ⊗ v_i^n`` by expanding the first n-1
    factors in the standard basis; the last factor carries the coefficients."""
    n = len(dims)
    t = v.reshape(dims)
    if n == 1:
        return [[t]]
    terms = []
    for idx in itertools.product(*(range(d) for d in dims[:-1])):
        last = t[idx]
        if not np.any(last):
            continue
        factors = []
        for k, i in enumerate(idx):
            e = np.zeros(dims[k], dtype=complex)
            e[i] = 1
            factors.append(e)
        factors.append(last)
        terms.append(factors)
    return terms


def rank1_symmetrized_norm(v, w, dims, sign_vector: Sequence[int] | None = None) -> float:
    """``2^-n || sum_{i,j} (v_i^1 ⋆ w_j^1) ⊗ ... ⊗ (v_i^n ⋆ w_j^n) ||^2``.

    ``a ⋆ b`` is the antisymmetric product ``a ⊗ b - b ⊗ a`` where
    ``sign_vector[k] == 1`` and the symmetric product otherwise. Any product
    decomposition of ``v`` and ``w`` gives the same value; the one used here
    expands all but the last factor in the standard basis (shorter sums
    padded with zero vectors would contribute nothing).
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    s = (1,) * n if sign_vector is None else tuple(sign_vector)
    v = np.asarray(v, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    total = np.zeros(math.prod(d * d for d in dims), dtype=complex)
    for vf in _slice_decomposition(v, dims):
        for wf in _slice_decomposition(w, dims):
            term = np.ones(1, dtype=complex)
            for k in range(n):
                sgn = -1 if s[k] else 1
                term = np.kron(term, np.kron(vf[k], wf[k]) + sgn * np.kron(wf[k], vf[k]))
            total += term
    return float(np.vdot(total, total).real) / 2 ** n
