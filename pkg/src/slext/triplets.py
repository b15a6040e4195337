"""Boundary-triplet regularization and direct sums of regularized triplets.

Given ``M(i)`` of some triplet, the transform ``(R, Q)`` with
``R = (Im M(i))^{1/2}`` and ``Q = Re M(i)`` produces a new triplet
``(R Gamma_0, R^{-1}(Gamma_1 - Q Gamma_0))`` whose Weyl function
``R^{-1}(M - Q)R^{-1}`` equals ``iI`` at ``z = i``.  Extension parameters
follow the same change of coordinates, ``B -> R^{-1}(B - Q)R^{-1}``, which
keeps ``ker(Gamma_1 - B Gamma_0)`` fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import DegenerateImaginaryPart, OnSpectrumWithoutLimit, SingularPencil
from .params import ExtensionParameter, Triplet
from .spectral import SpectralMeasure, apply_function
from .weyl import base_weyl_matrix, guarded_inverse

POSITIVITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TripletTransform:
    R: np.ndarray
    Q: np.ndarray
    source: Triplet = Triplet.BASE
    target: Triplet = Triplet.REGULARIZED
    R_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        R = np.asarray(self.R, dtype=complex)
        w = np.linalg.eigvalsh(0.5 * (R + R.conj().T))
        if w[0] < POSITIVITY_TOL:
            raise DegenerateImaginaryPart(f"R is not positive definite (min eig {w[0]:.2e})")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "Q", np.asarray(self.Q, dtype=complex))
        object.__setattr__(self, "R_inv", np.linalg.inv(R))

    def then(self, other: "TripletTransform") -> "TripletTransform":
        """Compose: apply ``self`` first, then ``other``.

        ``R2^{-1}(R1^{-1}(M - Q1)R1^{-1} - Q2)R2^{-1}`` is ``R^{-1}(M - Q)R^{-1}``
        with ``R = R1 R2`` and ``Q = Q1 + R1 Q2 R1``; ``R`` stays Hermitian only
        when the factors commute, which holds for transforms built from
        functions of one ``T``.
        """
        R = self.R @ other.R
        Q = self.Q + self.R @ other.Q @ self.R
        return TripletTransform(0.5 * (R + R.conj().T), Q, self.source, other.target)


def _sqrtm_psd(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(A)
    if w[0] < POSITIVITY_TOL:
        raise DegenerateImaginaryPart(f"Im M(i) is not positive definite (min eig {w[0]:.2e})")
    return (V * np.sqrt(w)) @ V.conj().T


def regularize(M_at_i) -> TripletTransform:
    """Transform that normalizes a Weyl function to ``iI`` at ``z = i``."""
    M = np.atleast_2d(np.asarray(M_at_i, dtype=complex))
    re = (M + M.conj().T) / 2
    im = (M - M.conj().T) / 2j
    return TripletTransform(_sqrtm_psd(im), re)


def regularization_of(m: SpectralMeasure) -> TripletTransform:
    """Regularizing transform of the base half-line triplet of ``m``."""
    return regularize(base_weyl_matrix(m, 1j))


def transform_weyl(tt: TripletTransform, M_value) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M_value, dtype=complex))
    return tt.R_inv @ (M - tt.Q) @ tt.R_inv


def transform_parameter(tt: TripletTransform, p: ExtensionParameter) -> ExtensionParameter:
    if p.is_dirichlet:
        # ker Gamma_0 = ker (R Gamma_0)
        return ExtensionParameter.dirichlet(tt.target)
    Bt = tt.R_inv @ (p.matrix - tt.Q) @ tt.R_inv
    return ExtensionParameter(0.5 * (Bt + Bt.conj().T), tt.target, p.label)


def untransform_parameter(tt: TripletTransform, p: ExtensionParameter) -> ExtensionParameter:
    """Inverse of :func:`transform_parameter`: ``B = R Bt R + Q``."""
    if p.is_dirichlet:
        return ExtensionParameter.dirichlet(tt.source)
    B = tt.R @ p.matrix @ tt.R + tt.Q
    return ExtensionParameter(0.5 * (B + B.conj().T), tt.source, p.label)


# Closed forms for functions of T in the regularized half-line triplet.

def _s(lam):
    lam = np.asarray(lam, dtype=float)
    return lam + np.sqrt(1 + lam * lam)


def re_sqrt_i_minus(lam):
    """``Re sqrt(i - lam) = 2^{-1/2} (lam + sqrt(1 + lam^2))^{-1/2}``."""
    return _s(lam) ** -0.5 / np.sqrt(2)


def im_sqrt_i_minus(lam):
    """``Im sqrt(i - lam) = 2^{-1/2} (lam + sqrt(1 + lam^2))^{1/2}``."""
    return np.sqrt(_s(lam)) / np.sqrt(2)


def krein_parameter_closed_form(lam):
    """Regularized Krein parameter as a scalar function of the eigenvalue."""
    lam = np.asarray(lam, dtype=float)
    root = np.sqrt(_s(lam))
    return 1.0 / ((np.sqrt(2) * np.sqrt(lam) + root) * root)


def neumann_parameter_closed_form(lam):
    """Regularized Neumann parameter ``lam + sqrt(1 + lam^2)``.

    This is ``-Q R^{-2}`` evaluated with the closed forms above; its square
    root does not reproduce ``f'(0) = 0``.
    """
    return _s(lam)


@dataclass(frozen=True, eq=False)
class BlockModel:
    """Finite stand-in for a direct sum of half-line operators.

    Each block ``T_n`` carries its own regularizing transform so that the
    assembled Weyl function is ``iI`` at ``z = i``.

    Attributes
    ----------
    blocks : list of SpectralMeasure
    transforms : list of TripletTransform
    windows : list of (lo, hi) or None
        Half-open spectral windows the blocks are declared to live in.
    tail_start : int or None
        Blocks from this index on model an unbounded tail; the essential
        edge is the minimum of their block minima.
    """

    blocks: tuple
    transforms: tuple
    windows: Optional[tuple] = None
    tail_start: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "transforms", tuple(self.transforms))
        if len(self.blocks) == 0:
            raise ValueError("BlockModel needs at least one block")
        if len(self.blocks) != len(self.transforms):
            raise ValueError("one transform per block is required")
        if self.windows is not None:
            windows = tuple((float(a), float(b)) for a, b in self.windows)
            if len(windows) != len(self.blocks):
                raise ValueError("one window per block is required")
            for n, (blk, (lo, hi)) in enumerate(zip(self.blocks, windows)):
                lam = blk.eigenvalues
                if lam[0] < lo or lam[-1] >= hi:
                    raise ValueError(f"block {n} spectrum leaves its window [{lo}, {hi})")
            object.__setattr__(self, "windows", windows)

    @classmethod
    def from_blocks(cls, blocks: Sequence[SpectralMeasure], windows=None, tail_start=None) -> "BlockModel":
        blocks = list(blocks)
        return cls(blocks, [regularization_of(b) for b in blocks], windows, tail_start)

    @classmethod
    def from_measure(cls, m: SpectralMeasure, width: float = 1.0, tail_start=None) -> "BlockModel":
        """Slice ``m`` into ``T E_T([(n-1)w, nw))`` pieces, skipping empty windows.

        Block coordinates are the eigenbasis of ``T``, so each block is diagonal.
        """
        lam = m.eigenvalues
        idx = np.floor(lam / width).astype(int)
        blocks, windows = [], []
        for n in np.unique(idx):
            blocks.append(SpectralMeasure.diagonal(lam[idx == n]))
            windows.append((n * width, (n + 1) * width))
        return cls.from_blocks(blocks, windows, tail_start)

    @property
    def sizes(self) -> list:
        return [b.dim for b in self.blocks]

    @property
    def dim(self) -> int:
        return sum(self.sizes)

    @property
    def essential_edge(self) -> Optional[float]:
        if self.tail_start is None:
            return None
        return min(b.inf_spectrum() for b in self.blocks[self.tail_start:])

    def combined_measure(self) -> SpectralMeasure:
        """Eigen-data of ``T = (+)_n T_n`` in the block coordinates."""
        lam = np.concatenate([b.eigenvalues for b in self.blocks])
        U = block_diag(*[b.eigenvectors for b in self.blocks])
        order = np.argsort(lam, kind="stable")
        return SpectralMeasure(lam[order], U[:, order], self.essential_edge)

    def combined_transform(self) -> TripletTransform:
        return TripletTransform(
            block_diag(*[t.R for t in self.transforms]),
            block_diag(*[t.Q for t in self.transforms]),
        )

    def block_slices(self) -> list:
        edges = np.cumsum([0] + self.sizes)
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def direct_sum_weyl(bm: BlockModel, z: complex) -> np.ndarray:
    """Block-diagonal Weyl function of the regularized direct-sum triplet."""
    z = complex(z)
    if z.imag == 0 and z.real >= min(b.inf_spectrum() for b in bm.blocks):
        raise OnSpectrumWithoutLimit(f"z = {z.real} is not in the common resolvent gap")
    return block_diag(
        *[transform_weyl(tt, base_weyl_matrix(b, z)) for b, tt in zip(bm.blocks, bm.transforms)]
    )


def blockwise_krein_parameter(bm: BlockModel) -> np.ndarray:
    """Direct sum of the regularized Krein parameters of the blocks."""
    return block_diag(
        *[
            transform_weyl(tt, -apply_function(b, np.sqrt))
            for b, tt in zip(bm.blocks, bm.transforms)
        ]
    )


@dataclass(frozen=True)
class DivergenceReport:
    x: np.ndarray
    values: np.ndarray
    skipped: np.ndarray
    threshold: float
    increasing: bool
    crossed: bool
    rate: float

    @property
    def diverges(self) -> bool:
        return self.increasing and self.crossed


def krein_divergence_check(bm: BlockModel, h, x_grid, threshold: float = 1e3) -> DivergenceReport:
    """Track ``(M_{B^K}(-x) h, h)`` as ``x`` decreases towards zero.

    ``B^K`` is the blockwise Krein parameter.  ``rate`` is the fitted exponent
    ``a`` in ``value ~ x^a`` (about ``-1`` when ``h`` lies in the range of
    ``T``).  Points where the pencil is singular are skipped and flagged.
    """
    h = np.asarray(h, dtype=complex).reshape(-1)
    xs = np.asarray(x_grid, dtype=float).reshape(-1)
    if h.size != bm.dim:
        raise ValueError(f"h has length {h.size}, model dimension is {bm.dim}")
    if np.any(xs < 1e-8) or np.any(np.diff(xs) >= 0):
        raise ValueError("x_grid must be strictly decreasing with entries >= 1e-8")
    BK = blockwise_krein_parameter(bm)
    values = np.full(xs.size, np.nan)
    skipped = np.zeros(xs.size, dtype=bool)
    for k, x in enumerate(xs):
        try:
            MB = guarded_inverse(BK - direct_sum_weyl(bm, -x))
        except SingularPencil:
            skipped[k] = True
            continue
        values[k] = float(np.real(np.vdot(h, MB @ h)))
    ok = ~skipped
    v = values[ok]
    increasing = bool(v.size >= 2 and np.all(np.diff(v) > 0))
    crossed = bool(v.size and v[-1] > threshold)
    rate = float("nan")
    if v.size >= 2 and np.all(v > 0):
        rate = float(np.polyfit(np.log(xs[ok]), np.log(v), 1)[0])
    return DivergenceReport(xs, values, skipped, threshold, increasing, crossed, rate)
