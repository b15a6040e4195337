"""Spectral-multiplicity tables and the criteria built on them.

The multiplicity of the absolutely continuous spectrum of ``A_B`` at ``t``
is the rank of ``Im M_B(t + i0)``.  Tables are evaluated on finite grids;
"almost every t" becomes "every non-exceptional grid point", and points
that had to be moved off ``sigma(T)``, ``0`` or a singular pencil are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyGrid, GridMismatch, SingularPencil
from .params import ExtensionParameter, Realization, Triplet
from .spectral import SpectralMeasure, counting_function
from .weyl import guarded_inverse, weyl_matrix

DEFAULT_RANK_TOL = 1e-8
CLEARANCE = 1e-6


@dataclass(frozen=True, eq=False)
class MultiplicityTable:
    t_grid: np.ndarray
    ranks: np.ndarray
    exceptional: np.ndarray
    realization: str
    rank_tol: float
    evaluated_at: np.ndarray = field(repr=False, default=None)

    def rows(self):
        for t, r, e in zip(self.t_grid, self.ranks, self.exceptional):
            yield float(t), int(r), bool(e)


@dataclass(frozen=True)
class AcBand:
    """Sorted, pairwise disjoint half-open intervals ``[lo, hi)``."""

    intervals: tuple = ()

    def __contains__(self, t: float) -> bool:
        return any(lo <= t < hi for lo, hi in self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)


def _imag_boundary_base(m: SpectralMeasure, t: float) -> np.ndarray:
    """``Im M(t + i0) = sqrt(t - T) E_T([0, t))``, exactly PSD."""
    vals = np.where(m.eigenvalues < t, np.sqrt(np.clip(t - m.eigenvalues, 0, None)), 0.0)
    U = m.eigenvectors
    return (U * vals) @ U.conj().T


def imag_boundary_value(m: SpectralMeasure, p: ExtensionParameter, t: float) -> np.ndarray:
    """``Im M_B(t + i0)`` via ``M_B^* Im M M_B`` so the result stays PSD."""
    im_base = _imag_boundary_base(m, t)
    if p.triplet is Triplet.REGULARIZED:
        from .triplets import regularization_of

        Rinv = regularization_of(m).R_inv
        im_base = Rinv @ im_base @ Rinv
    if p.is_dirichlet:
        return im_base
    MB = guarded_inverse(p.matrix - weyl_matrix(m, t, p.triplet))
    X = MB.conj().T @ im_base @ MB
    return 0.5 * (X + X.conj().T)


def numerical_rank(X: np.ndarray, rank_tol: float) -> int:
    s = np.linalg.svd(X, compute_uv=False)
    return int(np.sum(s > rank_tol * max(1.0, s[0] if s.size else 0.0)))


def _avoid(t: float, bad: np.ndarray) -> tuple[float, bool]:
    if bad.size == 0 or np.min(np.abs(bad - t)) >= CLEARANCE:
        return t, False
    for k in range(1, 50):
        for cand in (t - 2 * k * CLEARANCE, t + 2 * k * CLEARANCE):
            if np.min(np.abs(bad - cand)) >= CLEARANCE:
                return cand, True
    raise ValueError(f"cannot move grid point {t} off the excluded set")


def _label(p: ExtensionParameter) -> str:
    if p.is_dirichlet:
        return Realization.DIRICHLET.value
    return p.label or Realization.ROBIN.value


def multiplicity_table(
    m: SpectralMeasure,
    p: ExtensionParameter,
    t_grid: Sequence[float],
    rank_tol: float = DEFAULT_RANK_TOL,
) -> MultiplicityTable:
    """Ranks ``d_{M_B}(t)`` of ``Im M_B(t + i0)`` over ``t_grid``.

    Points within ``1e-6`` of ``sigma(T)`` or ``0`` are shifted and flagged;
    points where the pencil ``B - M(t)`` is singular are flagged and take the
    rank of the nearest non-exceptional neighbour on the left (right if none).
    """
    ts = np.asarray(t_grid, dtype=float).reshape(-1)
    if ts.size == 0:
        raise EmptyGrid("t_grid is empty")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    bad = np.concatenate([m.eigenvalues, [0.0]])
    ranks = np.zeros(ts.size, dtype=int)
    exceptional = np.zeros(ts.size, dtype=bool)
    singular = np.zeros(ts.size, dtype=bool)
    used = np.empty(ts.size)
    for k, t in enumerate(ts):
        te, moved = _avoid(float(t), bad)
        used[k] = te
        exceptional[k] = moved
        try:
            ranks[k] = numerical_rank(imag_boundary_value(m, p, te), rank_tol)
        except SingularPencil:
            exceptional[k] = singular[k] = True
    for k in np.flatnonzero(singular):
        good = np.flatnonzero(~exceptional)
        if good.size:
            left = good[good < k]
            nb = left[-1] if left.size else good[good > k][0]
            ranks[k] = ranks[nb]
    return MultiplicityTable(ts, ranks, exceptional, _label(p), float(rank_tol), used)


def ac_band(m: SpectralMeasure) -> AcBand:
    """Absolutely continuous spectrum ``[t0, inf)`` of the canonical realizations."""
    return AcBand(((m.inf_spectrum(), float("inf")),))


def ac_closure(support) -> AcBand:
    """Drop points and degenerate intervals, then merge overlapping or touching ones.

    ``support`` items are numbers (points) or ``(lo, hi)`` pairs; endpoints
    are Lebesgue-null so open/closed ends are not distinguished.
    """
    spans = []
    for item in support:
        if np.ndim(item) == 0:
            continue
        lo, hi = (float(v) for v in item)
        if hi > lo:
            spans.append((lo, hi))
    spans.sort()
    merged: list = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return AcBand(tuple(merged))


class Verdict(str, Enum):
    EQUAL = "equal"
    A_LEQ_B = "a_leq_b"
    B_LEQ_A = "b_leq_a"
    INCOMPARABLE = "incomparable"

    def a_leq_b(self) -> bool:
        return self in (Verdict.EQUAL, Verdict.A_LEQ_B)


def _comparison_mask(a: MultiplicityTable, b: MultiplicityTable, subset: Optional[AcBand]):
    if a.t_grid.shape != b.t_grid.shape or not np.array_equal(a.t_grid, b.t_grid):
        raise GridMismatch("tables are on different grids")
    mask = ~(a.exceptional | b.exceptional)
    if subset is not None:
        mask &= np.array([t in subset for t in a.t_grid])
    return mask


def compare_tables(a: MultiplicityTable, b: MultiplicityTable, subset: Optional[AcBand] = None) -> Verdict:
    """Pointwise comparison of two tables off exceptional points inside ``subset``."""
    mask = _comparison_mask(a, b, subset)
    ra, rb = a.ranks[mask], b.ranks[mask]
    le, ge = bool(np.all(ra <= rb)), bool(np.all(ra >= rb))
    if le and ge:
        return Verdict.EQUAL
    if le:
        return Verdict.A_LEQ_B
    if ge:
        return Verdict.B_LEQ_A
    return Verdict.INCOMPARABLE


@dataclass
class MinimalityReport:
    passed: bool
    per_parameter: list
    first_violation: list
    grid_points: int
    excluded_points: list

    def summary(self) -> str:
        bad = sum(not ok for ok in self.per_parameter)
        return (f"{len(self.per_parameter) - bad}/{len(self.per_parameter)} parameters pass "
                f"on {self.grid_points} grid points")


def verify_ac_minimality(m: SpectralMeasure, parameters, t_grid, rank_tol: float = DEFAULT_RANK_TOL) -> MinimalityReport:
    """Check ``d_M(t) <= d_{M_B}(t)`` for each Hermitian ``B`` at non-exceptional grid points."""
    params = [p if isinstance(p, ExtensionParameter) else ExtensionParameter.from_matrix(p) for p in parameters]
    if not params:
        raise ValueError("need at least one parameter")
    ref = multiplicity_table(m, ExtensionParameter.dirichlet(), t_grid, rank_tol)
    ok, first, excluded = [], [], []
    for p in params:
        tab = multiplicity_table(m, p, t_grid, rank_tol)
        mask = _comparison_mask(ref, tab, None)
        viol = np.flatnonzero(mask & (ref.ranks > tab.ranks))
        ok.append(viol.size == 0)
        first.append(None if viol.size == 0 else (float(ref.t_grid[viol[0]]), int(ref.ranks[viol[0]]), int(tab.ranks[viol[0]])))
        excluded.append(int(np.sum(~mask)))
    return MinimalityReport(all(ok), ok, first, int(ref.t_grid.size), excluded)


def counting_table(m: SpectralMeasure, t_grid) -> np.ndarray:
    return np.array([counting_function(m, t) for t in np.asarray(t_grid, dtype=float)])
