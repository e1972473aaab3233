"""Bisection for the positivity boundary and the (p, gamma) grid sweep."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from ..forms import FormSpec, form_terms
from ..tensorspace import _check_dims
from .optimize import VIOLATION_TOL, minimize_form

__all__ = ["AlphaEstimate", "alpha_opt_estimate", "proven_lower_bound", "sweep_grid",
           "parse_grid", "write_csv", "CSV_HEADER"]

CSV_HEADER = ("p", "gamma", "estimate", "proven_lower", "rank", "dims", "field", "restarts", "seed")


@dataclass
class AlphaEstimate:
    """Largest ``a`` in ``[0, 1]`` at which no violation was found for ``|alpha| <= a``.

    ``estimate`` is a heuristic upper bound on the true boundary: the
    search can miss violations but never reports spurious ones.
    """

    estimate: float
    proven_lower: float | None
    alpha_trace: list[tuple[float, float]] = dc_field(default_factory=list)
    bisect_tol: float = 0.01
    upper_bound_only: bool = True

    def __iter__(self):
        yield self.estimate
        yield self.proven_lower


def proven_lower_bound(dims: Sequence[int], p: float, gamma: float) -> float | None:
    """``1 / max(dims)`` for the Hilbert-Schmidt forms, ``None`` otherwise."""
    if p == 2 and gamma == 2:
        return 1.0 / max(dims)
    return None


def alpha_opt_estimate(v: Sequence[int], p: float = 2.0, gamma: float = 2.0, r: int | None = None,
                       dims: Sequence[int] = (2, 2), field: str = "complex", bisect_tol: float = 0.01,
                       seed: int = 0, restarts: int = 32, max_iters: int = 400) -> AlphaEstimate:
    """Bisect for the largest ``a`` such that ``q_v(p, gamma, +-a, C) >= 0`` on rank-``r`` matrices.

    Parameters
    ----------
    v : sequence of {0, 1}
        Sign vector.
    p, gamma : float
        Norm index and exponent.
    r : int, optional
        Rank bound; defaults to full rank.
    dims : sequence of int
    field : {"complex", "real"}
    bisect_tol : float
        Width of the final bracket.
    seed, restarts, max_iters
        Passed to :func:`minimize_form` at every probe.

    Returns
    -------
    AlphaEstimate
        ``a = 1`` is probed first; if it is violated the bracket ``[0, 1]``
        is halved until narrower than ``bisect_tol`` and the lower end is
        returned. ``alpha_trace`` holds ``(alpha, best q)`` for every run.
    """
    if not bisect_tol > 0:
        raise ValueError("bisect_tol must be positive")
    dims = _check_dims(dims)
    D = math.prod(dims)
    r = D if r is None else int(r)
    base = FormSpec(tuple(v), 0.0, p, gamma)
    if base.n != len(dims):
        raise ValueError("sign vector length must match dims")
    trace: list[tuple[float, float]] = []

    def violated(a: float) -> bool:
        for alpha in (-a, a):
            # with no negative coefficient the form is a sum of norms
            if all(c >= 0 for _, c in form_terms(base.v, alpha)):
                continue
            rep = minimize_form(base.with_alpha(alpha), dims, r, field, restarts, max_iters, seed,
                                stop_below=-VIOLATION_TOL)
            trace.append((alpha, rep.best_value))
            if rep.violation:
                return True
        return False

    if not violated(1.0):
        return AlphaEstimate(1.0, proven_lower_bound(dims, p, gamma), trace, bisect_tol)
    lo, hi = 0.0, 1.0
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return AlphaEstimate(lo, proven_lower_bound(dims, p, gamma), trace, bisect_tol)


def parse_grid(text: str) -> list[float]:
    """``"1:4:0.5"`` (inclusive start:stop:step) or ``"1,2,inf"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"empty or invalid range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    vals = [float(x) for x in text.split(",") if x.strip()]
    if not vals:
        raise ValueError("empty grid")
    return vals


def _fmt(x) -> str:
    if x is None:
        return ""
    return "%.12g" % x


def write_csv(rows: Sequence[dict], dest) -> None:
    """Write sweep rows to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write(rows, dest)
        return
    with open(dest, "w", newline="") as fh:
        _write(rows, fh)


def _write(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row["p"]), _fmt(row["gamma"]), _fmt(row["estimate"]),
                         _fmt(row["proven_lower"]), row["rank"], row["dims"], row["field"],
                         row["restarts"], row["seed"]])


def sweep_grid(v: Sequence[int], p_values: Sequence[float], gamma_values: Sequence[float],
               r: int | None = None, dims: Sequence[int] = (2, 2), field: str = "real",
               seed: int = 0, output_path=None, restarts: int = 32, bisect_tol: float = 0.01,
               max_iters: int = 400) -> list[dict]:
    """Estimate the boundary on every ``(p, gamma)`` cell.

    Each cell reuses the same master seed. Rows are returned as dicts and,
    when ``output_path`` is given, written as CSV with the columns of
    ``CSV_HEADER`` (floats to 12 significant digits, empty ``proven_lower``
    where no bound is known).
    """
    p_values, gamma_values = list(p_values), list(gamma_values)
    if not p_values or not gamma_values:
        raise ValueError("grids must be non-empty")
    dims = _check_dims(dims)
    r = math.prod(dims) if r is None else int(r)
    # open the destination first so an unwritable path fails before the search
    fh = open(output_path, "w", newline="") if output_path is not None else None
    try:
        rows = []
        for p in p_values:
            for g in gamma_values:
                est = alpha_opt_estimate(v, p, g, r, dims, field, bisect_tol, seed, restarts, max_iters)
                rows.append({
                    "p": p, "gamma": g, "estimate": est.estimate, "proven_lower": est.proven_lower,
                    "rank": r, "dims": "x".join(str(d) for d in dims), "field": field,
                    "restarts": restarts, "seed": seed,
                })
        if fh is not None:
            write_csv(rows, fh)
    finally:
        if fh is not None:
            fh.close()
    return rows
