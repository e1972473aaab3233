"""Seeded property suites shared by ``wernerlab verify`` and the test-suite.

Every check turns one trial into a margin that must stay above ``-tol``:
``lhs - rhs`` for an inequality ``lhs >= rhs`` and ``-residual`` for an
identity. A suite passes when none of its checks records a failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .forms import (
    FormSpec,
    diagonal_pair_counterexample,
    creation_annihilation,
    fermionic_bosonic_identity_residual,
    inversion_P_tripartite,
    inversion_Q_bipartite,
    inversion_Q_tripartite,
    kronecker_difference_norm,
    alternating_binomial_sum,
    positivity_polynomial,
    q_form,
    rank1_flip_form,
    rank1_symmetrized_norm,
)
from .search.ensembles import gaussian, random_matrix
from .spectral import operator_norm, schatten_norm
from .tensorspace import MultipartiteMatrix, partial_trace
from .werner import (
    WernerParams,
    mixed_witness_values,
    psi_from_matrix,
    q_witness_equivalence,
    werner_ppt_min_eigenvalue,
    werner_state,
    witness_value,
)

__all__ = ["Tally", "SuiteResult", "SUITES", "DEFAULT_TRIALS", "run_suite", "relative_gap"]


@dataclass
class Tally:
    name: str
    tol: float
    trials: int = 0
    failures: int = 0
    worst: float = math.inf

    def add(self, margin: float) -> None:
        self.trials += 1
        if not margin >= -self.tol:
            self.failures += 1
        if not margin >= self.worst:
            self.worst = float(margin)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.trials > 0


@dataclass
class SuiteResult:
    name: str
    checks: list[Tally] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"{status} {self.name}/{c.name}: trials={c.trials} failures={c.failures} "
                       f"worst_margin={c.worst:.3e} tol={c.tol:.0e}")
        return out

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed,
                "checks": [{"name": c.name, "trials": c.trials, "failures": c.failures,
                            "worst_margin": c.worst, "tol": c.tol, "passed": c.passed}
                           for c in self.checks]}


def relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def _hs(C) -> float:
    return schatten_norm(C, 2) ** 2


def _unit(rng, d, field="complex"):
    x = gaussian(rng, d, field)
    return x / np.linalg.norm(x)


def _pick(rng, options):
    return options[int(rng.integers(len(options)))]


# -- suites -----------------------------------------------------------------------

def suite_rank1(trials, rng):
    pos = Tally("q2(-1,|v><w|) >= 0", 1e-9)
    anti = Tally("q2(-1) == antisymmetrised norm (rel)", 1e-9)
    flip = Tally("q2(-1) == <v⊗w,(1-F13)(1-F24)v⊗w> (rel)", 1e-10)
    tri = Tally("q3(-1,|v><w|) >= 0 on [2,2,2]", 1e-9)
    tri_eq = Tally("q3(-1) == antisymmetrised norm (rel)", 1e-9)
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4)])
        D = math.prod(dims)
        v, w = gaussian(rng, D), gaussian(rng, D)
        C = MultipartiteMatrix(np.outer(v, w.conj()), dims)
        q = q_form(FormSpec((1, 1), -1.0), C)
        scale = np.linalg.norm(v) ** 2 * np.linalg.norm(w) ** 2
        pos.add(q / scale)
        anti.add(-relative_gap(q, rank1_symmetrized_norm(v, w, dims)))
        flip.add(-relative_gap(q, rank1_flip_form(v, w, dims)))
        v3, w3 = gaussian(rng, 8), gaussian(rng, 8)
        C3 = MultipartiteMatrix(np.outer(v3, w3.conj()), (2, 2, 2))
        q3 = q_form(FormSpec((1, 1, 1), -1.0), C3)
        tri.add(q3 / (np.linalg.norm(v3) ** 2 * np.linalg.norm(w3) ** 2))
        tri_eq.add(-relative_gap(q3, rank1_symmetrized_norm(v3, w3, (2, 2, 2))))
    return [pos, anti, flip, tri, tri_eq, _rank1_counterexample(rng)]


def rank1_counterexample_matrix(u, v, w) -> MultipartiteMatrix:
    """``|u><u| ⊗ |v><w|``."""
    d = len(u)
    return MultipartiteMatrix(np.kron(np.outer(u, u.conj()), np.outer(v, w.conj())), (d, d))


def _rank1_counterexample(rng, trials: int = 20):
    t = Tally("q2(-1-eps, |u><u|⊗|v><w|) == -eps", 1e-12)
    for _ in range(trials):
        d = _pick(rng, [2, 3, 4])
        u = _unit(rng, d)
        v = _unit(rng, d)
        w = gaussian(rng, d)
        w = w - np.vdot(v, w) * v
        w = w / np.linalg.norm(w)
        C = rank1_counterexample_matrix(u, v, w)
        for eps in (0.1, 0.01):
            t.add(-abs(q_form(FormSpec((1, 1), -1 - eps), C) + eps))
    return t


def suite_half_rank(trials, rng):
    t = Tally("q2(-1/(2r), C) >= 0 for rank r <= 4", 1e-9)
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3)])
        r = int(rng.integers(1, 5))
        C = random_matrix("rank_r", dims, r, seed=rng)
        alpha = -1 / (2 * r) + float(rng.random()) * _pick(rng, [0.0, 0.1, 1.0])
        t.add(q_form(FormSpec((1, 1), alpha), C) / _hs(C))
    return [t]


def _marginals(C):
    return _hs(partial_trace(C, [0])), _hs(partial_trace(C, [1])), abs(C.trace()) ** 2


def suite_rank1_plus_normal(trials, rng):
    one = Tally("|‖tr1 C‖²-‖tr2 C‖²| <= m‖C‖² - |tr C|²/m, m=min(r,d)", 1e-9)
    two = Tally("‖tr1 C‖²+‖tr2 C‖² <= d‖C‖² + |tr C|²/d", 1e-9)
    three = Tally("rank1 + normal: ‖tr1 C‖²+‖tr2 C‖² <= r‖C‖² + |tr C|²/r", 1e-9)
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3)])
        D = math.prod(dims)
        d = max(dims)
        field_ = _pick(rng, ["complex", "real"])
        r = int(rng.integers(1, D + 1))
        C = random_matrix("rank_r", dims, r, field_, seed=rng)
        n2 = _hs(C)
        a, b, t2 = _marginals(C)
        m = min(r, d)
        one.add((m * n2 - t2 / m - abs(a - b)) / n2)
        G = random_matrix("ginibre", dims, field=field_, seed=rng)
        n2 = _hs(G)
        a, b, t2 = _marginals(G)
        two.add((d * n2 + t2 / d - a - b) / n2)
        r = int(rng.integers(2, D + 1))
        S = random_matrix("structured_rank1_plus_normal", dims, r, field_, seed=rng)
        n2 = _hs(S)
        a, b, t2 = _marginals(S)
        three.add((r * n2 + t2 / r - a - b) / n2)
    return [one, two, three]


def suite_dimension_bound(trials, rng):
    t = Tally("q_v(±1/max d, C) >= 0, all v in {0,1}^2", 1e-9)
    signs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3)])
        C = random_matrix(_pick(rng, ["ginibre", "rank_r"]), dims, int(rng.integers(1, 5)), seed=rng)
        n2 = _hs(C)
        a = 1.0 / max(dims)
        for v in signs:
            for alpha in (-a, a):
                t.add(q_form(FormSpec(v, alpha), C) / n2)
    return [t]


def suite_tripartite(trials, rng):
    psd_marginal = Tally("PSD: ‖tr1 C‖² >= ‖tr2 C‖²/r", 1e-9)
    q011 = Tally("PSD: q_(0,1,1)(-1/r, C) >= 0", 1e-9)
    q001 = Tally("PSD: q_(0,0,1)(-1/r, C) >= 0", 1e-9)
    sa = Tally("q3(-1/2, |v1><v1| - |v2><v2|) >= 0", 1e-9)
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3)])
        r = int(rng.integers(1, math.prod(dims) + 1))
        P = random_matrix("psd", dims, r, seed=rng)
        n2 = _hs(P)
        psd_marginal.add((_hs(partial_trace(P, [0])) - _hs(partial_trace(P, [1])) / r) / n2)
        r3 = int(rng.integers(1, 9))
        P3 = random_matrix("psd", (2, 2, 2), r3, seed=rng)
        n2 = _hs(P3)
        q011.add(q_form(FormSpec((0, 1, 1), -1.0 / r3), P3) / n2)
        q001.add(q_form(FormSpec((0, 0, 1), -1.0 / r3), P3) / n2)
        v1, v2 = gaussian(rng, 8), gaussian(rng, 8)
        v2 = v2 - np.vdot(v1, v2) / np.vdot(v1, v1) * v1
        C = MultipartiteMatrix(np.outer(v1, v1.conj()) - np.outer(v2, v2.conj()), (2, 2, 2))
        sa.add(q_form(FormSpec((1, 1, 1), -0.5), C) / _hs(C))
    return [psd_marginal, q011, q001, sa]


TSALLIS_PAIRS = ((1.5, 1.0), (1.5, 1.5), (2.0, 1.0), (2.0, 2.0), (3.0, 1.0), (3.0, 3.0))


def suite_tsallis(trials, rng):
    t = Tally("density: ‖ρ‖_p^γ - ‖tr1 ρ‖_p^γ - ‖tr2 ρ‖_p^γ + 1 >= 0", 1e-9)
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3)])
        rho = random_matrix("density", dims, int(rng.integers(1, math.prod(dims) + 1)), seed=rng)
        for p, g in TSALLIS_PAIRS:
            t.add(q_form(FormSpec((1, 1), -1.0, p, g), rho))
    return [t]


def suite_spectral_bounds(trials, rng):
    qb = Tally("Q~_a^r spectrum in [-(1/r)(1-1/r)‖a‖², ‖a‖²/r²]", 1e-9)
    q3 = Tally("Q~_a^(3),r <= (1/r²)(1-1/r)‖a‖²", 1e-9)
    p3 = Tally("P_a^(3),r >= (1-r²)/r³ ‖a‖² on a⊥", 1e-9)
    herm = Tally("inversion operators Hermitian, projected ones annihilate a", 1e-10)
    kd = Tally("‖1⊗tr1 C - tr2 C⊗1‖_∞ <= ‖C‖_1", 1e-10)
    poly = Tally("positivity polynomial >= 0", 1e-12)
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3)])
        r = _pick(rng, [2, 3, 4])
        a = gaussian(rng, math.prod(dims))
        na = float(np.vdot(a, a).real)
        op = inversion_Q_bipartite(a, r, dims, projected=True)
        ev = op.spectrum_on_complement()
        lo, hi = -(1 / r) * (1 - 1 / r) * na, na / r ** 2
        qb.add(min(ev[0] - lo, hi - ev[-1]) / na)
        M = op.matrix.data
        herm.add(-max(np.abs(M - M.conj().T).max(), np.abs(M @ a).max() / math.sqrt(na)))
        r3 = _pick(rng, [2, 3])
        a3 = gaussian(rng, 8)
        n3 = float(np.vdot(a3, a3).real)
        ev = inversion_Q_tripartite(a3, r3, (2, 2, 2), projected=True).spectrum_on_complement()
        q3.add(((1 / r3 ** 2) * (1 - 1 / r3) * n3 - ev[-1]) / n3)
        ev = inversion_P_tripartite(a3, r3, (2, 2, 2)).spectrum_on_complement()
        p3.add((ev[0] - (1 - r3 ** 2) / r3 ** 3 * n3) / n3)
        C = random_matrix("rank_r", dims, int(rng.integers(1, 4)), seed=rng)
        kd.add((schatten_norm(C, 1) - kronecker_difference_norm(C)) / schatten_norm(C, 1))
        x = rng.standard_normal(int(rng.integers(2, 6)))
        poly.add(positivity_polynomial(x))
    return [qb, q3, p3, herm, kd, poly]


def suite_creation_annihilation(trials, rng):
    ident = Tally("1⊗tr1|v><w| ± tr2|v><w|⊗1 == a_±(w) F24 a*_±(v)", 1e-10)
    fnorm = Tally("‖a*_-(v)‖_∞ == ‖v‖", 1e-10)
    adj = Tally("a*_-(v) v == 0", 1e-12)
    prod = Tally("product v=w: fermionic side ‖·‖_∞ <= ‖v‖‖w‖", 1e-10)
    for _ in range(trials):
        dims = _pick(rng, [(2, 2), (2, 3), (3, 3)])
        D = math.prod(dims)
        v, w = gaussian(rng, D), gaussian(rng, D)
        f, b = fermionic_bosonic_identity_residual(v, w, dims)
        scale = np.linalg.norm(v) * np.linalg.norm(w)
        ident.add(-max(f, b) / scale)
        k = int(rng.integers(2, 7))
        x = gaussian(rng, k)
        create, _ = creation_annihilation(x, -1)
        fnorm.add(-abs(operator_norm(create) - np.linalg.norm(x)) / np.linalg.norm(x))
        adj.add(-np.abs(create @ x).max() / np.linalg.norm(x) ** 2)
        pv = np.kron(gaussian(rng, dims[0]), gaussian(rng, dims[1]))
        Cp = MultipartiteMatrix(np.outer(pv, pv.conj()), dims)
        nv = np.linalg.norm(pv) ** 2
        prod.add((nv - kronecker_difference_norm(Cp)) / nv)
    return [ident, fnorm, adj, prod]


EQUIV_ALPHAS = (-0.8, -0.5, -0.3, 0.4)


def suite_werner_equivalence(trials, rng):
    eq = Tally("q^(n)(α,C) == (d²+αd)^n <ψ_C,(ρ^T1)^⊗n ψ_C> (rel)", 1e-9)
    sr = Tally("Schmidt rank of ψ_C == rank C", 0.0)
    nrm = Tally("‖ψ_C‖² == ‖C‖_2² (rel)", 1e-12)
    mixed = Tally("mixed witnesses >= 0 for rank <= 2", 1e-9)
    mixed_eq = Tally("mixed witnesses == q_(0,1), q_(1,0) at -1/2 over (d²+d/2)(d²-d/2) (rel)", 1e-9)
    from .werner import schmidt_rank
    for _ in range(trials):
        d = _pick(rng, [2, 3])
        n = _pick(rng, [1, 2])
        dims = (d,) * n
        r = int(rng.integers(1, min(3, d ** n) + 1))
        C = random_matrix("rank_r", dims, r, seed=rng)
        alpha = _pick(rng, EQUIV_ALPHAS)
        q, wv, _ = q_witness_equivalence(C, alpha)
        eq.add(-relative_gap(q, wv))
        psi = psi_from_matrix(C)
        sr.add(-abs(schmidt_rank(psi) - r))
        nrm.add(-relative_gap(psi.norm2(), _hs(C)))
        if n == 2 and r <= 2:
            vals = mixed_witness_values(C)
            factor = (d * d + d / 2) * (d * d - d / 2)
            for expect, form in vals.values():
                mixed.add(expect * factor / _hs(C))
                mixed_eq.add(-relative_gap(expect * factor, form))
    return [eq, sr, nrm, mixed, mixed_eq]


def suite_undistillable(trials, rng):
    pos = Tally("Schmidt-rank-2 witnesses >= 0 at α=-1/2, n=1", 1e-9)
    neg = Tally("ψ_C of the violating rank-2 C is negative at α=-1/2-0.05", 0.0)
    for _ in range(trials):
        d = _pick(rng, [2, 3, 4])
        C = random_matrix("rank_r", (d,), min(2, d), seed=rng)
        psi = psi_from_matrix(C)
        pos.add(witness_value(psi, WernerParams(d, -0.5)) / psi.norm2())
    for d in (2, 3, 4):
        C = MultipartiteMatrix(np.diag([1.0, 1.0] + [0.0] * (d - 2)), (d,))
        psi = psi_from_matrix(C)
        val = witness_value(psi, WernerParams(d, -0.55))
        neg.add(-val if val < 0 else -1.0)
    return [pos, neg]


def suite_werner_spectra(trials, rng):
    mult = Tally("eigenvalue multiplicities d(d±1)/2", 0.0)
    psd = Tally("ρ_α PSD, trace 1, commutes with F", 1e-12)
    cross = Tally("PPT min eigenvalue crosses zero at α=-1/d", 1e-9)
    analytic = Tally("ρ^T1 analytic == transposed route", 1e-12)
    from .tensorspace import flip, partial_transpose
    from .werner import werner_pt_operator
    for d in (2, 3, 4, 5):
        for alpha in np.linspace(-0.95, 0.95, 8):  # alpha = 0 merges the two eigenvalues
            p = WernerParams(d, float(alpha))
            rho = werner_state(p).data
            ev = np.linalg.eigvalsh(rho)
            hi, lo = (1 + alpha) / p.normalization, (1 - alpha) / p.normalization
            n_hi = int(np.sum(np.abs(ev - hi) < 1e-10))
            n_lo = int(np.sum(np.abs(ev - lo) < 1e-10))
            mult.add(-abs(n_hi - d * (d + 1) // 2) - abs(n_lo - d * (d - 1) // 2))
            F = flip(d).data
            psd.add(min(ev[0], -abs(np.trace(rho).real - 1), -np.abs(rho @ F - F @ rho).max()))
            pt = partial_transpose(werner_state(p), [0]).data
            analytic.add(-np.abs(pt - werner_pt_operator(p).data).max())
        root = ppt_crossing(d)
        cross.add(-abs(root + 1.0 / d))
    return [mult, psd, cross, analytic]


def ppt_crossing(d: int, tol: float = 1e-12) -> float:
    """Bisect for the alpha at which the PPT minimum eigenvalue changes sign."""
    lo, hi = -1.0, 0.0
    assert werner_ppt_min_eigenvalue(WernerParams(d, lo)) < 0 < werner_ppt_min_eigenvalue(WernerParams(d, hi))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if werner_ppt_min_eigenvalue(WernerParams(d, mid)) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


DIAGONAL_PAIR_CASES = tuple((n, d, eps) for n in (2, 4) for d in (2, 3) for eps in (0.1, 0.01))


def suite_diagonal_pair(trials, rng):
    rel = Tally("q^(n)(-1/2-ε, C) == closed form (rel)", 1e-10)
    neg = Tally("q^(n)(-1/2-ε, C) < 0", 0.0)
    anchor = Tally("closed form == -4ε (n=2), -2ε-8ε³ (n=4) (rel)", 1e-12)
    for n, d, eps in DIAGONAL_PAIR_CASES:
        fam = diagonal_pair_counterexample(n, d, eps)
        rel.add(-relative_gap(fam.q_value, fam.closed_form))
        neg.add(-fam.q_value if fam.q_value < 0 else -1.0)
        expected = -4 * eps if n == 2 else -2 * eps - 8 * eps ** 3
        anchor.add(-relative_gap(fam.closed_form, expected))
    return [rel, neg, anchor]


def suite_binomial_identity(trials, rng, n_max: int = 12):
    eq = Tally("exact equality of both sides", 0.0)
    sign = Tally("zero for even m, negative for odd m", 0.0)
    for n in range(2, n_max + 1, 2):
        for m in range(n):
            lhs, rhs = alternating_binomial_sum(n, m)
            eq.add(0.0 if lhs == rhs else -1.0)
            ok = lhs == 0 if m % 2 == 0 else lhs < 0
            sign.add(0.0 if ok and isinstance(lhs, Fraction) else -1.0)
    return [eq, sign]


SUITES = {
    "rank1": suite_rank1,
    "half-rank": suite_half_rank,
    "rank1-plus-normal": suite_rank1_plus_normal,
    "dimension-bound": suite_dimension_bound,
    "tripartite": suite_tripartite,
    "tsallis": suite_tsallis,
    "spectral-bounds": suite_spectral_bounds,
    "creation-annihilation": suite_creation_annihilation,
    "werner-equivalence": suite_werner_equivalence,
    "werner-spectra": suite_werner_spectra,
    "undistillable": suite_undistillable,
    "diagonal-pair": suite_diagonal_pair,
    "binomial-identity": suite_binomial_identity,
}

DEFAULT_TRIALS = {
    "rank1": 500, "half-rank": 500, "rank1-plus-normal": 500, "dimension-bound": 500, "tripartite": 500, "tsallis": 500,
    "spectral-bounds": 200, "creation-annihilation": 200, "werner-equivalence": 200,
    "werner-spectra": 1, "undistillable": 500, "diagonal-pair": 1, "binomial-identity": 1,
}


def run_suite(name: str, trials: int | None = None, seed: int = 0, **kwargs) -> SuiteResult:
    """Run one named suite with a generator seeded from ``(seed, suite index)``."""
    if name not in SUITES:
        raise KeyError(name)
    index = list(SUITES).index(name)
    rng = np.random.default_rng([int(seed), index])
    n = DEFAULT_TRIALS[name] if trials is None else int(trials)
    return SuiteResult(name, SUITES[name](n, rng, **kwargs))
