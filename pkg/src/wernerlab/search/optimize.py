"""Low-rank minimisation of the partial-trace forms.

The matrix is parametrised as ``C = V W^*`` with ``V, W`` of shape ``(D, r)``.
Because every form is ``gamma``-homogeneous only its sign on the unit sphere
matters, so the objective is ``q(C) / ||C||_2^gamma`` and the factors are
rescaled to ``||C||_2 = 1`` after every accepted step. All restarts are run
in lockstep as one batch; each keeps its own step size and stops on its own.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from ..forms import FormSpec, form_terms, q_form
from ..tensorspace import MultipartiteMatrix, _check_dims, embed_identity_array, ptrace_array
from .ensembles import _check_field, gaussian

__all__ = [
    "RankFactorization",
    "SearchReport",
    "restart_seed",
    "batch_objective",
    "analytic_gradient",
    "fd_gradient",
    "minimize_form",
    "VIOLATION_TOL",
]

logger = logging.getLogger(__name__)

#: A form value counts as a violation only below this threshold.
VIOLATION_TOL = 1e-9

# singular values below this fraction of the largest are treated as exact zeros
_ZERO_SV = 1e-12
# for p = 1 a singular value in (_ZERO_SV, _NEAR_SV] makes the gradient unreliable
_NEAR_SV = 1e-7
_FD_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class RankFactorization:
    """``C = sum_i |v_i><w_i|`` with the ``v_i`` and ``w_i`` as matrix columns."""

    left: np.ndarray
    right: np.ndarray
    dims: tuple[int, ...]
    field: str = "complex"

    def __post_init__(self):
        left = np.array(self.left, dtype=float if self.field == "real" else complex)
        right = np.array(self.right, dtype=left.dtype)
        if left.ndim != 2 or left.shape != right.shape:
            raise ValueError("left and right factors must be matrices of equal shape (D, r)")
        if left.shape[1] < 1:
            raise ValueError("need at least one factor pair")
        if left.shape[0] != math.prod(self.dims):
            raise ValueError("factor length does not match dims")
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "dims", tuple(self.dims))

    @property
    def rank(self) -> int:
        return self.left.shape[1]

    def reconstruct(self) -> MultipartiteMatrix:
        return MultipartiteMatrix(self.left @ self.right.conj().T, self.dims)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "field": self.field,
            "left_re": self.left.real.tolist(),
            "left_im": self.left.imag.tolist(),
            "right_re": self.right.real.tolist(),
            "right_im": self.right.imag.tolist(),
        }


@dataclass
class SearchReport:
    spec: FormSpec
    dims: tuple[int, ...]
    rank: int
    field: str
    master_seed: int
    restarts: int
    best_value: float
    best_factorization: RankFactorization
    best_restart: int
    iterations: list[int]
    restart_values: list[float]
    aborted: list[int] = dc_field(default_factory=list)
    gradient_mode: str = "analytic"
    #: independent re-evaluations of a negative best value
    confirmation: dict = dc_field(default_factory=dict)
    alpha_trace: list[tuple[float, float]] = dc_field(default_factory=list)

    @property
    def violation(self) -> bool:
        return self.best_value < -VIOLATION_TOL

    def to_dict(self) -> dict:
        return {
            "spec": {"v": list(self.spec.v), "alpha": self.spec.alpha,
                     "p": _json_float(self.spec.p), "gamma": self.spec.gamma},
            "dims": list(self.dims),
            "rank": self.rank,
            "field": self.field,
            "master_seed": self.master_seed,
            "restarts": self.restarts,
            "best_value": self.best_value,
            "violation": self.violation,
            "violation_tol": VIOLATION_TOL,
            "best_restart": self.best_restart,
            "iterations": list(self.iterations),
            "restart_values": [_json_float(x) for x in self.restart_values],
            "aborted": list(self.aborted),
            "gradient_mode": self.gradient_mode,
            "confirmation": dict(self.confirmation),
            "alpha_trace": [list(t) for t in self.alpha_trace],
            "best_factorization": self.best_factorization.to_dict(),
        }


def _json_float(x: float):
    return x if math.isfinite(x) else str(x)


def restart_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed of restart ``index``: ``SeedSequence([master_seed, index])``."""
    return np.random.SeedSequence([int(master_seed), int(index)])


# -- batched objective and gradients -------------------------------------------

def _compose(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    return V @ np.conj(np.swapaxes(W, -1, -2))


def batch_objective(spec: FormSpec, dims, C: np.ndarray) -> np.ndarray:
    """``q(C) / ||C||_2^gamma`` for a stack ``C`` of shape ``(R, D, D)``."""
    n2 = np.sum(np.abs(C) ** 2, axis=(-2, -1))
    q = np.zeros(C.shape[:-2])
    for J, coef in form_terms(spec.v, spec.alpha):
        if coef == 0:
            continue
        X = ptrace_array(C, dims, J)
        q = q + coef * _schatten(X, spec.p)[0] ** spec.gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        return q / n2 ** (spec.gamma / 2)


def _schatten(X: np.ndarray, p: float):
    s = np.linalg.svd(X, compute_uv=False)
    if math.isinf(p):
        return s[..., 0], s
    top = s[..., :1]
    safe = np.where(top > 0, top, 1.0)
    return safe[..., 0] * np.sum((s / safe) ** p, axis=-1) ** (1.0 / p), s


def analytic_gradient(spec: FormSpec, dims, C: np.ndarray):
    """Value and gradient of the normalised objective with respect to ``C``.

    The gradient ``G`` satisfies ``d f = Re <G, dC>``. It uses
    ``d ||X||_p = Re <U S^(p-1) V^* , dX> / ||X||_p^(p-1)`` for each marginal,
    carried back to ``C`` by the adjoint of the partial trace.

    Returns ``(f, G, unreliable)`` where ``unreliable`` flags batch entries
    for which the Schatten norm is not differentiable (``p = inf``, or
    ``p = 1`` with a nearly vanishing singular value).
    """
    p, gamma = spec.p, spec.gamma
    R = C.shape[0]
    n2 = np.sum(np.abs(C) ** 2, axis=(-2, -1))
    q = np.zeros(R)
    Gq = np.zeros_like(C, dtype=complex)
    unreliable = np.full(R, math.isinf(p))
    for J, coef in form_terms(spec.v, spec.alpha):
        if coef == 0:
            continue
        X = ptrace_array(C, dims, J)
        U, s, Vh = np.linalg.svd(X)
        top = s[..., :1]
        safe = np.where(top > 0, top, 1.0)
        if math.isinf(p):
            nrm = s[..., 0]
            weights = np.zeros_like(s)
            weights[..., 0] = 1.0
            scale = gamma * nrm ** (gamma - 1)
        else:
            nrm = safe[..., 0] * np.sum((s / safe) ** p, axis=-1) ** (1.0 / p)
            rel = s / safe
            if p < 2:
                zero = rel <= _ZERO_SV
                weights = np.where(zero, 0.0, s ** (p - 1) if p != 1 else 1.0)
                if p == 1 and X.shape[-1] > 1:
                    unreliable |= np.any((rel > _ZERO_SV) & (rel <= _NEAR_SV), axis=-1)
            else:
                weights = s ** (p - 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                scale = np.where(nrm > 0, gamma * nrm ** (gamma - p), 0.0)
        q = q + coef * nrm ** gamma
        Y = (U * weights[..., None, :]) @ Vh
        Gq = Gq + embed_identity_array((coef * scale)[:, None, None] * Y, dims, J)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = q / n2 ** (gamma / 2)
        G = (Gq - (gamma * q / n2)[:, None, None] * C) / n2[:, None, None] ** (gamma / 2)
    return f, G, unreliable


def _factor_gradient(G: np.ndarray, V: np.ndarray, W: np.ndarray, real: bool):
    gV = G @ W
    gW = np.conj(np.swapaxes(G, -1, -2)) @ V
    if real:
        gV, gW = gV.real, gW.real
    return gV, gW


def fd_gradient(spec: FormSpec, dims, V: np.ndarray, W: np.ndarray, step: float = _FD_STEP):
    """Central finite-difference gradient of the objective in the factors.

    Real and imaginary parts are perturbed as independent real variables;
    the result is packed back as complex arrays so that it plugs into the
    same update as the analytic gradient.
    """
    real = not np.iscomplexobj(V)
    scale = max(1.0, float(np.max(np.abs(np.concatenate([V, W], axis=-1)))))
    h = step * scale
    R, D, r = V.shape
    gV = np.zeros_like(V)
    gW = np.zeros_like(W)
    parts = (1.0,) if real else (1.0, 1j)
    for which, target in ((0, gV), (1, gW)):
        for i in range(D):
            for j in range(r):
                for unit in parts:
                    dV = np.zeros_like(V)
                    dW = np.zeros_like(W)
                    (dV if which == 0 else dW)[:, i, j] = unit * h
                    fp = batch_objective(spec, dims, _compose(V + dV, W + dW))
                    fm = batch_objective(spec, dims, _compose(V - dV, W - dW))
                    target[:, i, j] += unit * (fp - fm) / (2 * h)
    return gV, gW


def _normalise(V: np.ndarray, W: np.ndarray):
    # balance each factor pair, then fix ||C||_2 = 1
    nv = np.linalg.norm(V, axis=-2)
    nw = np.linalg.norm(W, axis=-2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where((nv > 0) & (nw > 0), np.sqrt(nw / nv), 1.0)
    V = V * ratio[:, None, :]
    W = W / ratio[:, None, :]
    c = np.sqrt(np.sum(np.abs(_compose(V, W)) ** 2, axis=(-2, -1)))
    c = np.where(c > 0, c, 1.0)
    s = np.sqrt(c)[:, None, None]
    return V / s, W / s


# -- driver ----------------------------------------------------------------

def minimize_form(spec: FormSpec, dims: Sequence[int], r: int, field: str = "complex",
                  restarts: int = 32, max_iters: int = 400, seed: int = 0,
                  stop_below: float | None = None, gradient: str = "auto",
                  tol: float = 1e-12) -> SearchReport:
    """Search for the minimum of ``q`` over matrices of rank at most ``r``.

    Parameters
    ----------
    spec : FormSpec
        Form to minimise; ``len(spec.v)`` must equal ``len(dims)``.
    dims : sequence of int
        Subsystem dimensions of the matrix space.
    r : int
        Number of factor pairs (upper bound on the rank).
    field : {"complex", "real"}
        Scalar field of the factors.
    restarts : int
        Independent random starts; restart ``i`` is seeded from
        ``SeedSequence([seed, i])``.
    max_iters : int
        Gradient evaluations per restart.
    seed : int
        Master seed.
    stop_below : float, optional
        Stop all restarts once any of them reaches a value below this.
    gradient : {"auto", "fd"}
        ``auto`` uses analytic gradients and falls back to central finite
        differences for entries where the norm is not differentiable.
    tol : float
        A restart stops once its value has not improved by more than
        ``tol`` over 30 consecutive iterations.

    Returns
    -------
    SearchReport
        Best value over all restarts of ``q(C)`` at ``||C||_2 = 1``; ties go
        to the lowest restart index. Not finding a violation is not a
        certificate that none exists.
    """
    dims = _check_dims(dims)
    _check_field(field)
    if len(spec.v) != len(dims):
        raise ValueError(f"sign vector has length {len(spec.v)} but dims has {len(dims)} entries")
    D = math.prod(dims)
    r = int(r)
    if r < 1:
        raise ValueError("rank must be >= 1")
    restarts = int(restarts)
    if restarts < 1:
        raise ValueError("need at least one restart")
    if gradient not in ("auto", "fd"):
        raise ValueError("gradient must be 'auto' or 'fd'")
    real = field == "real"

    V = np.empty((restarts, D, r), dtype=float if real else complex)
    W = np.empty_like(V)
    for i in range(restarts):
        rng = np.random.default_rng(restart_seed(seed, i))
        V[i] = gaussian(rng, (D, r), field)
        W[i] = gaussian(rng, (D, r), field)
    V, W = _normalise(V, W)

    active = np.ones(restarts, dtype=bool)
    aborted = []
    iters = np.zeros(restarts, dtype=int)
    step = np.full(restarts, 0.1)
    best = np.full(restarts, np.inf)
    stall = np.zeros(restarts, dtype=int)
    used_fd = False

    f = batch_objective(spec, dims, _compose(V, W))
    for it in range(max_iters):
        bad = active & ~np.isfinite(f)
        for i in np.flatnonzero(bad):
            logger.warning("restart %d aborted: non-finite objective at iteration %d", i, it)
            aborted.append(int(i))
        active &= ~bad
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Va, Wa = V[idx], W[idx]
        C = _compose(Va, Wa)
        fa, G, unreliable = analytic_gradient(spec, dims, C)
        gV, gW = _factor_gradient(G, Va, Wa, real)
        need = np.ones(len(idx), dtype=bool) if gradient == "fd" else unreliable
        if need.any():
            used_fd = True
            fV, fW = fd_gradient(spec, dims, Va[need], Wa[need])
            gV[need], gW[need] = fV, fW
        iters[idx] += 1
        g2 = np.sum(np.abs(gV) ** 2, axis=(-2, -1)) + np.sum(np.abs(gW) ** 2, axis=(-2, -1))

        # Armijo backtracking with an adaptive step per restart
        t = step[idx]
        Vt, Wt = _normalise(Va - t[:, None, None] * gV, Wa - t[:, None, None] * gW)
        ft = batch_objective(spec, dims, _compose(Vt, Wt))
        ok = np.isfinite(ft) & (ft <= fa - 1e-4 * t * g2)
        V[idx[ok]], W[idx[ok]] = Vt[ok], Wt[ok]
        f[idx[ok]] = ft[ok]
        step[idx] = np.where(ok, np.minimum(t * 2.0, 10.0), t * 0.5)

        improved = f[idx] < best[idx] - tol
        stall[idx] = np.where(improved, 0, stall[idx] + 1)
        best[idx] = np.minimum(best[idx], f[idx])
        done = (g2 < 1e-20) | (step[idx] < 1e-14) | (stall[idx] >= 30)
        active[idx[done]] = False
        if stop_below is not None and np.nanmin(np.where(np.isfinite(f), f, np.inf)) < stop_below:
            break

    final = np.where(np.isfinite(f), f, np.inf)
    final[aborted] = np.inf
    k = int(np.argmin(final))
    fac = RankFactorization(V[k], W[k], dims, field)
    C_best = fac.reconstruct()
    best_value = float(q_form(spec, C_best)) if np.isfinite(final[k]) else math.inf
    report = SearchReport(
        spec=spec, dims=dims, rank=r, field=field, master_seed=int(seed), restarts=restarts,
        best_value=best_value, best_factorization=fac, best_restart=k,
        iterations=iters.tolist(), restart_values=[float(x) for x in final],
        aborted=sorted(aborted), gradient_mode="fd" if gradient == "fd" else
        ("analytic+fd" if used_fd else "analytic"),
    )
    if report.violation:
        report.confirmation = confirm_violation(spec, C_best)
    return report


def confirm_violation(spec: FormSpec, C: MultipartiteMatrix) -> dict:
    """Re-evaluate a candidate through the independent routes available."""
    out = {"q_form": float(q_form(spec, C))}
    if all(x == 1 for x in spec.v) and spec.p == 2 and spec.gamma == 2 \
            and len(set(C.dims)) == 1 and abs(spec.alpha) <= 1:
        from ..werner import q_witness_equivalence
        _, wv, _ = q_witness_equivalence(C, spec.alpha)
        out["witness"] = float(wv)
    return out
