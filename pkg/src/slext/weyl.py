"""Weyl functions of the half-line operator ``-d^2/dx^2 + T``.

For the base triplet ``(f(0), f'(0))`` the Weyl function is
``M(z) = i sqrt(z - T)`` with :func:`~slext.spectral.branch_sqrt`; every
other realization is reached through ``M_B(z) = (B - M(z))^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DirichletParameter,
    EigenvalueCollision,
    KreinAtZero,
    OnSpectrumWithoutLimit,
    SingularPencil,
)
from .params import ExtensionParameter, Realization, Triplet
from .spectral import SpectralMeasure, apply_function, branch_sqrt

COLLISION_TOL = 1e-9
SINGULAR_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class HerglotzSample:
    """Value of a matrix Weyl function at one point ``z``."""

    z: complex
    value: np.ndarray
    realization: Realization = Realization.DIRICHLET
    triplet: Triplet = Triplet.BASE
    parameter: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def imag_part(self) -> np.ndarray:
        V = self.value
        return (V - V.conj().T) / 2j

    @property
    def real_part(self) -> np.ndarray:
        V = self.value
        return (V + V.conj().T) / 2

    def min_imag_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.imag_part)[0])


@dataclass(frozen=True)
class NormalFunctionEstimate:
    t: float
    value: float
    y_grid: np.ndarray = field(repr=False)
    bound: float


def base_weyl_matrix(m: SpectralMeasure, z: complex) -> np.ndarray:
    """``i sqrt(z - T)`` for any ``z``; on the real axis this is ``M(t + i0)``."""
    z = complex(z)
    return 1j * apply_function(m, lambda lam: branch_sqrt(z - lam))


def weyl_matrix(m: SpectralMeasure, z: complex, triplet: Triplet = Triplet.BASE) -> np.ndarray:
    M = base_weyl_matrix(m, z)
    if Triplet(triplet) is Triplet.REGULARIZED:
        from .triplets import regularization_of, transform_weyl

        M = transform_weyl(regularization_of(m), M)
    return M


def _is_real(z: complex) -> bool:
    return complex(z).imag == 0


def weyl_base(m: SpectralMeasure, z: complex) -> HerglotzSample:
    """Weyl function of the base triplet, ``M(z) = i sqrt(z - T)``.

    Real ``z`` inside ``[t0, inf)`` is rejected: use :func:`boundary_value`,
    which names the one-sided limit explicitly.
    """
    z = complex(z)
    if _is_real(z) and z.real >= m.inf_spectrum():
        raise OnSpectrumWithoutLimit(
            f"z = {z.real} lies in [t0, inf); request boundary_value instead"
        )
    return HerglotzSample(z, base_weyl_matrix(m, z))


def boundary_value(m: SpectralMeasure, kind, t: float) -> HerglotzSample:
    """Closed-form boundary value ``M(t + i0)`` of a canonical realization.

    Parameters
    ----------
    kind : Realization or str
        ``dirichlet`` gives ``i sqrt(t - T)``; ``neumann`` gives
        ``i (t - T)^{-1/2}``; ``krein`` gives ``t^{-1}(i sqrt(t - T) - sqrt(T))``.
    t : float
        Real point.
    """
    kind = Realization(kind)
    t = float(t)
    lam = m.eigenvalues
    if kind is Realization.DIRICHLET:
        vals = 1j * branch_sqrt(t - lam)
    elif kind is Realization.NEUMANN:
        gap = np.abs(lam - t)
        if np.any(gap < COLLISION_TOL):
            raise EigenvalueCollision(f"t = {t} collides with eigenvalue {lam[np.argmin(gap)]}")
        vals = 1j / branch_sqrt(t - lam)
    elif kind is Realization.KREIN:
        if abs(t) < COLLISION_TOL:
            raise KreinAtZero("the Krein Weyl function has a pole at t = 0")
        vals = (1j * branch_sqrt(t - lam) - np.sqrt(lam)) / t
    else:
        raise ValueError("boundary_value covers dirichlet, neumann and krein; use weyl_of_extension for Robin")
    U = m.eigenvectors
    return HerglotzSample(complex(t), (U * vals) @ U.conj().T, kind)


def guarded_inverse(A: np.ndarray, floor: float = SINGULAR_FLOOR) -> np.ndarray:
    """Inverse of ``A`` unless its smallest singular value is below ``floor * ||A||``."""
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= floor * s[0] or s[0] == 0:
        raise SingularPencil(f"pencil is singular (sigma_min/sigma_max = {s[-1] / max(s[0], 1e-300):.2e})")
    return np.linalg.solve(A, np.eye(A.shape[0], dtype=complex))


def _realization_of(p: ExtensionParameter) -> Realization:
    try:
        return Realization(p.label)
    except ValueError:
        return Realization.ROBIN


def weyl_of_extension(m: SpectralMeasure, p: ExtensionParameter, z: complex) -> HerglotzSample:
    """``M_B(z) = (B - M(z))^{-1}`` in the triplet that ``p`` refers to.

    Real ``z`` uses the boundary value ``M(t + i0)``.
    """
    if p.is_dirichlet:
        raise DirichletParameter("the Dirichlet relation is the reference extension and has no M_B")
    z = complex(z)
    M = weyl_matrix(m, z, p.triplet)
    value = guarded_inverse(p.matrix - M)
    return HerglotzSample(z, value, _realization_of(p), p.triplet, p.matrix)


def _inv_sqrt_psd(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(A)
    return (V / np.sqrt(w)) @ V.conj().T


def normal_function_bound(t: float) -> float:
    return (1 + np.sqrt(2)) * (1 + t * t) ** 0.25


def invariant_max_normal(
    m: SpectralMeasure,
    t: float,
    y_count: int = 64,
    triplet: Triplet = Triplet.BASE,
    y_min: float = 1e-8,
) -> NormalFunctionEstimate:
    """Estimate the invariant maximal normal function at ``t``.

    The supremum over ``y in (0, 1]`` is replaced by a maximum over the
    geometric grid ``1, r, r^2, ..., y_min`` with ``y_count`` points, so the
    result is a lower estimate of the true supremum.
    """
    if y_count < 8:
        raise ValueError("y_count must be at least 8")
    Mi = weyl_matrix(m, 1j, triplet)
    re_i = (Mi + Mi.conj().T) / 2
    S = _inv_sqrt_psd((Mi - Mi.conj().T) / 2j)
    ys = np.geomspace(1.0, y_min, y_count)
    best = 0.0
    for y in ys:
        X = S @ (weyl_matrix(m, complex(t, y), triplet) - re_i) @ S
        best = max(best, float(np.linalg.norm(X, ord=2)))
    return NormalFunctionEstimate(float(t), best, ys, float(normal_function_bound(t)))
