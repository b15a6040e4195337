"""Spectral representation of the potential ``T`` and its functional calculus.

Everything downstream evaluates functions of ``T`` through the
eigendecomposition held in :class:`SpectralMeasure`, so the square-root
branch used by the Weyl functions is fixed once here (:func:`branch_sqrt`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    FunctionUndefinedAtEigenvalue,
    NegativePotential,
    NegativeSpectrum,
    NotHermitian,
    TooFewSamples,
)

HERMITIAN_TOL = 1e-10
CLAMP_TOL = 1e-10
ORTHONORMAL_TOL = 1e-12


def branch_sqrt(w):
    """Square root with the cut along ``[0, inf)`` and image in ``Im >= 0``.

    Realized as ``i * sqrt(-w)`` with the principal root; on the cut itself
    the upper-edge limit ``+sqrt(w)`` is returned.  Accepts scalars or arrays.
    """
    arr = np.asarray(w, dtype=complex)
    root = 1j * np.sqrt(-arr)
    on_cut = (arr.imag == 0) & (arr.real > 0)
    root = np.where(on_cut, np.sqrt(np.abs(arr.real)) + 0j, root)
    if root.ndim == 0:
        return complex(root)
    return root


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Finite non-negative self-adjoint ``T`` as eigenvalues plus eigenvectors.

    Attributes
    ----------
    eigenvalues : ndarray, shape (dim,)
        Real, non-negative, sorted ascending.
    eigenvectors : ndarray, shape (dim, dim)
        Orthonormal columns; column ``j`` belongs to ``eigenvalues[j]``.
    essential_edge : float or None
        Declared bottom of the essential spectrum.  Finite matrices have no
        essential spectrum, so this is metadata supplied by a model builder.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    essential_edge: Optional[float] = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        U = np.asarray(self.eigenvectors, dtype=complex)
        n = lam.size
        if n == 0:
            raise ValueError("SpectralMeasure needs at least one eigenvalue")
        if U.shape != (n, n):
            raise ValueError(f"eigenvector matrix must be {n}x{n}, got {U.shape}")
        if np.any(lam < 0):
            raise NegativeSpectrum(f"negative eigenvalue {lam.min():.3e}")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        err = np.linalg.norm(U.conj().T @ U - np.eye(n), ord=2)
        if err > ORTHONORMAL_TOL * max(1, n):
            raise ValueError(f"eigenvectors not orthonormal (error {err:.2e})")
        object.__setattr__(self, "eigenvalues", _freeze(lam))
        object.__setattr__(self, "eigenvectors", _freeze(U))
        if self.essential_edge is not None:
            object.__setattr__(self, "essential_edge", float(self.essential_edge))

    @classmethod
    def diagonal(cls, values, essential_edge: Optional[float] = None) -> "SpectralMeasure":
        """Measure of ``diag(values)``; the eigenvector basis is a permutation of I."""
        lam = np.asarray(values, dtype=float).reshape(-1)
        order = np.argsort(lam, kind="stable")
        U = np.eye(lam.size, dtype=complex)[:, order]
        return cls(lam[order], U, essential_edge)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    def inf_spectrum(self) -> float:
        return float(self.eigenvalues[0])

    def matrix(self) -> np.ndarray:
        """Reconstruct ``T = U diag(eigenvalues) U*``."""
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    def with_edge(self, essential_edge: Optional[float]) -> "SpectralMeasure":
        return SpectralMeasure(self.eigenvalues, self.eigenvectors, essential_edge)


def hermitian_defect(H: np.ndarray) -> float:
    H = np.asarray(H)
    return float(np.linalg.norm(H - H.conj().T, ord=2))


def check_hermitian(H: np.ndarray, tol: float = HERMITIAN_TOL, what: str = "matrix") -> np.ndarray:
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    if H.shape[0] != H.shape[1]:
        raise NotHermitian(f"{what} must be square, got shape {H.shape}")
    scale = max(1.0, float(np.linalg.norm(H, ord=2)))
    defect = hermitian_defect(H)
    if defect > tol * scale:
        raise NotHermitian(f"{what} is not Hermitian (defect {defect:.2e})")
    return 0.5 * (H + H.conj().T)


def spectral_measure_from_matrix(H, essential_edge: Optional[float] = None) -> SpectralMeasure:
    """Eigendecompose a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero (rounding noise on PSD
    input); anything more negative raises :class:`NegativeSpectrum`.
    """
    H = check_hermitian(H, what="potential")
    lam, U = np.linalg.eigh(H)
    if lam[0] < -CLAMP_TOL * max(1.0, abs(lam[-1])):
        raise NegativeSpectrum(f"smallest eigenvalue {lam[0]:.3e} is negative")
    lam = np.clip(lam, 0.0, None)
    return SpectralMeasure(lam, U, essential_edge)


def from_schrodinger_1d(q_samples, interval_length: float) -> SpectralMeasure:
    """Dirichlet finite-difference model of ``-d^2/dx^2 + q`` on ``(0, length)``.

    ``q_samples`` are the potential values at the ``n`` interior nodes
    ``x_k = k * length / (n + 1)``.
    """
    q = np.asarray(q_samples, dtype=float).reshape(-1)
    if q.size < 3:
        raise TooFewSamples(f"need at least 3 samples, got {q.size}")
    if not np.all(np.isfinite(q)):
        raise ValueError("potential samples must be finite")
    if np.any(q < 0):
        raise NegativePotential(f"potential takes negative value {q.min():.3e}")
    if interval_length <= 0:
        raise ValueError("interval_length must be positive")
    n = q.size
    h = interval_length / (n + 1)
    diag = 2.0 / h**2 + q
    off = np.full(n - 1, -1.0 / h**2)
    from scipy.linalg import eigh_tridiagonal

    lam, V = eigh_tridiagonal(diag, off)
    lam = np.clip(lam, 0.0, None)
    return SpectralMeasure(lam, V.astype(complex))


def apply_function(m: SpectralMeasure, phi: Callable) -> np.ndarray:
    """Return ``phi(T) = U diag(phi(t_j)) U*``.

    ``phi`` is first tried on the whole eigenvalue array and falls back to
    elementwise calls when it is not vectorized.
    """
    lam = m.eigenvalues
    try:
        with np.errstate(divide="raise", invalid="raise"):
            vals = np.asarray(phi(lam), dtype=complex)
        if vals.shape != lam.shape:
            vals = np.broadcast_to(vals, lam.shape).astype(complex)
    except (ZeroDivisionError, FloatingPointError, TypeError, ValueError):
        vals = np.empty(lam.shape, dtype=complex)
        for j, t in enumerate(lam):
            try:
                with np.errstate(all="ignore"):
                    vals[j] = complex(phi(float(t)))
            except (ZeroDivisionError, ValueError, FloatingPointError) as exc:
                raise FunctionUndefinedAtEigenvalue(f"function undefined at eigenvalue {t!r}") from exc
    if not np.all(np.isfinite(vals)):
        bad = lam[~np.isfinite(vals)][0]
        raise FunctionUndefinedAtEigenvalue(f"function undefined at eigenvalue {bad!r}")
    U = m.eigenvectors
    return (U * vals) @ U.conj().T


def counting_function(m: SpectralMeasure, t: float) -> int:
    """``dim ran E_T([0, t))``: the number of eigenvalues strictly below ``t``."""
    return int(np.searchsorted(m.eigenvalues, t, side="left"))


def spectrum_edges(m: SpectralMeasure) -> tuple[float, float]:
    """``(inf sigma(T), inf sigma_ess(T))``; the latter is ``inf`` unless declared."""
    t1 = m.essential_edge if m.essential_edge is not None else float("inf")
    return m.inf_spectrum(), t1
