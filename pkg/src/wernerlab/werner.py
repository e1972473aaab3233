"""Werner states, their partial transposes and Schmidt-rank witnesses.

A matrix ``C`` on ``(C^d)^{⊗n}`` is turned into the vector ``psi_C`` on ``n``
copies of ``C^d ⊗ C^d`` by reading its row index as the ``A`` systems and its
column index (complex conjugated basis) as the ``B`` systems. The expectation
value of ``(1 + alpha F)^{T_1}`` tensored over the copies in ``psi_C`` is then
exactly ``q^(n)(alpha, C)``, and the Schmidt rank of ``psi_C`` across the
``A|B`` cut equals the rank of ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .forms import FormSpec, q_form, q_form_breakdown
from .spectral import numerical_rank
from .tensorspace import MultipartiteMatrix, check_subset, flip, identity

__all__ = [
    "WernerParams",
    "WitnessVector",
    "werner_state",
    "werner_pt_operator",
    "werner_ppt_min_eigenvalue",
    "maximally_entangled",
    "psi_from_matrix",
    "schmidt_rank",
    "witness_value",
    "q_witness_equivalence",
    "mixed_witness_values",
    "witness_to_json",
    "witness_from_json",
]


@dataclass(frozen=True)
class WernerParams:
    d: int
    alpha: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"local dimension must be an integer >= 2, got {self.d}")
        if not abs(self.alpha) <= 1:
            raise ValueError(f"alpha must lie in [-1, 1], got {self.alpha}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "alpha", float(self.alpha))
        assert self.normalization > 0

    @property
    def normalization(self) -> float:
        return self.d ** 2 + self.alpha * self.d


@dataclass(frozen=True, eq=False)
class WitnessVector:
    """Vector on ``n`` copies of ``C^d ⊗ C^d`` in the order ``A_1 B_1 ... A_n B_n``.

    The declared Schmidt cut separates the ``A`` systems (even positions)
    from the ``B`` systems (odd positions).
    """

    amplitudes: np.ndarray
    d: int
    n: int

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.d ** (2 * self.n):
            raise ValueError(f"{amp.size} amplitudes do not fit {self.n} copies of C^{self.d} ⊗ C^{self.d}")
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes must be finite")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * (2 * self.n)

    @property
    def declared_cut(self) -> tuple[int, ...]:
        return tuple(range(0, 2 * self.n, 2))

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def werner_state(params: WernerParams) -> MultipartiteMatrix:
    """``(1 + alpha F) / (d^2 + alpha d)`` on ``C^d ⊗ C^d``."""
    d, a = params.d, params.alpha
    rho = (identity((d, d)).data + a * flip(d).data) / params.normalization
    return MultipartiteMatrix(rho, (d, d))


def maximally_entangled(d: int) -> np.ndarray:
    """Normalised ``sum_i e_i ⊗ e_i / sqrt(d)``."""
    return np.eye(d).reshape(-1) / math.sqrt(d)


def werner_pt_operator(params: WernerParams) -> MultipartiteMatrix:
    """Partial transpose of the Werner state, built as
    ``(1 + alpha d P_Omega) / (d^2 + alpha d)`` without transposing."""
    d, a = params.d, params.alpha
    omega = maximally_entangled(d)
    op = np.eye(d * d) + a * d * np.outer(omega, omega)
    return MultipartiteMatrix(op / params.normalization, (d, d))


def werner_ppt_min_eigenvalue(params: WernerParams) -> float:
    """Smallest eigenvalue of the partial transpose; negative iff alpha < -1/d."""
    return float(np.linalg.eigvalsh(werner_pt_operator(params).data)[0])


def psi_from_matrix(C: MultipartiteMatrix, rank_tol: float | None = None) -> WitnessVector:
    """Witness vector ``psi_C = sum_i v_i ⊗ conj(w_i)`` of ``C = sum_i |v_i><w_i|``.

    The factors come from the SVD of ``C`` truncated at its numerical rank,
    with the singular values absorbed into ``v_i``. The result is reordered
    from ``A_1..A_n B_1..B_n`` to the interleaved ``A_1 B_1 .. A_n B_n``.
    """
    dims = C.dims
    d = dims[0]
    if any(x != d for x in dims):
        raise ValueError(f"all subsystem dimensions must be equal (pad_embed first), got {dims}")
    n = C.n
    U, s, Vh = np.linalg.svd(C.data)
    r = numerical_rank(C, rank_tol).numerical_rank
    V = U[:, :r] * s[:r]
    W = Vh[:r].conj().T
    psi = np.zeros((C.D, C.D), dtype=complex)
    for i in range(r):
        psi += np.outer(V[:, i], W[:, i].conj())
    order = [k for pair in zip(range(n), range(n, 2 * n)) for k in pair]
    psi = psi.reshape((d,) * (2 * n)).transpose(order)
    return WitnessVector(psi.reshape(-1), d, n)


def schmidt_rank(psi: WitnessVector, cut: Sequence[int] | None = None, tol: float | None = None) -> int:
    """Schmidt rank across ``cut`` (positions in the interleaved ordering);
    defaults to the declared ``A|B`` cut."""
    m = 2 * psi.n
    cut = psi.declared_cut if cut is None else check_subset(cut, m)
    if len(cut) in (0, m):
        raise ValueError("cut must be a proper, non-empty subset of the subsystems")
    rest = [k for k in range(m) if k not in cut]
    t = psi.amplitudes.reshape(psi.dims).transpose(list(cut) + rest)
    mat = t.reshape(psi.d ** len(cut), -1)
    return numerical_rank(mat, tol).numerical_rank


def _apply_per_copy(psi: WitnessVector, ops: Sequence[np.ndarray]) -> np.ndarray:
    d2 = psi.d ** 2
    t = psi.amplitudes.reshape((d2,) * psi.n)
    for k, op in enumerate(ops):
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [k])), 0, k)
    return t.reshape(-1)


def witness_value(psi: WitnessVector, params) -> float:
    """``<psi, (rho^{T_1})^{⊗n} psi>``.

    ``params`` is one :class:`WernerParams` used on every copy, or a
    sequence with one entry per copy for products of different Werner
    states.
    """
    if isinstance(params, WernerParams):
        params = [params] * psi.n
    params = list(params)
    if len(params) != psi.n:
        raise ValueError(f"need {psi.n} Werner parameters, got {len(params)}")
    if any(p.d != psi.d for p in params):
        raise ValueError("Werner dimension does not match the witness")
    ops = [werner_pt_operator(p).data for p in params]
    out = _apply_per_copy(psi, ops)
    return float(np.vdot(psi.amplitudes, out).real)


def q_witness_equivalence(C: MultipartiteMatrix, alpha: float) -> tuple[float, float, float]:
    """Compare ``q^(n)(alpha, C)`` with ``(d^2 + alpha d)^n <psi_C, (rho^{T_1})^{⊗n} psi_C>``.

    Returns ``(q_value, scaled_witness_value, ratio)``. ``q`` counts as zero
    when it is below ``1e-10`` times its largest term; the ratio is then 1.0
    if the witness side vanishes on the same scale and ``inf`` otherwise.
    """
    params = WernerParams(C.dims[0], alpha)
    spec = FormSpec((1,) * C.n, alpha=alpha)
    terms = q_form_breakdown(spec, C)
    q = sum(coef * nrm ** 2 for nrm, coef in terms.values())
    scale = max(abs(coef) * nrm ** 2 for nrm, coef in terms.values())
    psi = psi_from_matrix(C)
    wv = witness_value(psi, params) * params.normalization ** C.n
    if abs(q) <= 1e-10 * scale:
        ratio = 1.0 if abs(wv) <= 1e-10 * scale else math.inf
    else:
        ratio = wv / q
    return q, wv, ratio


def mixed_witness_values(C: MultipartiteMatrix) -> dict[str, tuple[float, float]]:
    """Expectation values of ``rho_{1/2} ⊗ rho_{-1/2}`` and ``rho_{-1/2} ⊗ rho_{1/2}``
    (partially transposed) in ``psi_C`` for a bipartite ``C``.

    Each entry maps to ``(expectation, matching_form)`` where the matching
    form is ``q_(0,1)(-1/2, C)`` for ``"plus_minus"`` and ``q_(1,0)(-1/2, C)``
    for ``"minus_plus"``; the expectation equals the form divided by
    ``(d^2 + d/2)(d^2 - d/2)``.
    """
    if C.n != 2:
        raise ValueError("mixed witnesses are defined for two copies")
    d = C.dims[0]
    psi = psi_from_matrix(C)
    plus, minus = WernerParams(d, 0.5), WernerParams(d, -0.5)
    return {
        "plus_minus": (witness_value(psi, [plus, minus]), q_form(FormSpec((0, 1), alpha=-0.5), C)),
        "minus_plus": (witness_value(psi, [minus, plus]), q_form(FormSpec((1, 0), alpha=-0.5), C)),
    }


def witness_to_json(psi: WitnessVector) -> dict:
    """Matrix-JSON layout with the amplitudes as a single column."""
    return {
        "dims": list(psi.dims),
        "re": [[x] for x in psi.amplitudes.real.tolist()],
        "im": [[x] for x in psi.amplitudes.imag.tolist()],
    }


def witness_from_json(obj: dict) -> WitnessVector:
    try:
        dims = [int(x) for x in obj["dims"]]
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed witness JSON: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2 or re.shape[1] != 1:
        raise ValueError("witness amplitudes must be a single column")
    if len(dims) % 2 or len(set(dims)) != 1:
        raise ValueError(f"witness dims must be (d, d) repeated, got {dims}")
    return WitnessVector((re + 1j * im)[:, 0], dims[0], len(dims) // 2)
