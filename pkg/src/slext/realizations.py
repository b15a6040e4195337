"""Self-adjoint realizations on the half-line and their resolvents.

The resolvent of a realization ``A_B`` (boundary condition ``f'(0) = B f(0)``)
is assembled from the Dirichlet resolvent and a rank-``dim`` correction,

    (A_B - z)^{-1} f = (A^D - z)^{-1} f + gamma(z) (B - M(z))^{-1} gamma(conj z)^* f,

with ``gamma(z) h = exp(i x sqrt(z - T)) h``.  All integrals against grid
data are done per eigenchannel with exact cell integrals of the exponential
against the piecewise-linear interpolant of ``f``; no finite differences are
involved, which keeps this path independent of :mod:`slext.oracle`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DirichletParameter, RealSpectralPoint, ZeroEigenvalue
from .params import ExtensionParameter, Realization, Triplet
from .spectral import SpectralMeasure, apply_function, branch_sqrt
from .weyl import base_weyl_matrix, guarded_inverse

DEFAULT_STEP = 1 / 200


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Vector-valued samples on a uniform grid ``0 = x_0 < ... < x_N = L``.

    ``values`` has shape ``(N + 1, dim)``.
    """

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != x.size:
            raise ValueError(f"{v.shape[0]} value rows for {x.size} grid points")
        if x.size < 2 or x[0] != 0:
            raise ValueError("grid must start at 0 and have at least two points")
        dx = np.diff(x)
        if np.max(np.abs(dx - dx[0])) > 1e-12 * max(1.0, x[-1]):
            raise ValueError("grid must be uniform")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, func, length: float, step: float = DEFAULT_STEP, dim: int = 1) -> "GridFunction":
        """Sample ``func(x) -> (len(x), dim)`` or ``(len(x),)`` on a uniform grid."""
        x = uniform_grid(length, step)
        v = np.asarray(func(x), dtype=complex)
        if v.ndim == 1:
            v = np.repeat(v[:, None], dim, axis=1) if dim > 1 else v[:, None]
        return cls(x, v)

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def length(self) -> float:
        return float(self.x[-1])

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.x.size, self.step)
        w[0] = w[-1] = self.step / 2
        return w

    def inner(self, other: "GridFunction") -> complex:
        """``(self, other)`` in ``L^2``: linear in ``self``, antilinear in ``other``."""
        w = self.trapezoid_weights()
        return complex(np.sum(w[:, None] * self.values * other.values.conj()))

    def l2_norm(self) -> float:
        return float(np.sqrt(abs(self.inner(self))))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.x, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.x, self.values - other.values)

    def __rmul__(self, c) -> "GridFunction":
        return GridFunction(self.x, complex(c) * self.values)


def uniform_grid(length: float, step: float) -> np.ndarray:
    n = int(round(length / step))
    if n < 1 or abs(n * step - length) > 1e-9 * max(1.0, length):
        raise ValueError(f"length {length} is not a multiple of step {step}")
    return np.linspace(0.0, length, n + 1)


def _channel_roots(m: SpectralMeasure, z: complex) -> np.ndarray:
    omega = branch_sqrt(complex(z) - m.eigenvalues)
    if np.any(omega.imag <= 0):
        raise RealSpectralPoint(f"z = {complex(z)} lies on the spectrum [t0, inf)")
    return omega


def default_length(m: SpectralMeasure, z: complex) -> float:
    """Truncation heuristic ``30 / sqrt(min_j Im sqrt(z - t_j))``."""
    return float(30.0 / np.sqrt(_channel_roots(m, z).imag.min()))


def canonical_parameter(m: SpectralMeasure, kind, triplet: Triplet = Triplet.BASE) -> ExtensionParameter:
    """Dirichlet relation, Neumann ``B = 0`` or Krein ``B = -sqrt(T)``."""
    kind = Realization(kind)
    triplet = Triplet(triplet)
    if kind is Realization.DIRICHLET:
        return ExtensionParameter.dirichlet(triplet)
    if kind is Realization.NEUMANN:
        p = ExtensionParameter(np.zeros((m.dim, m.dim), dtype=complex), Triplet.BASE, "neumann")
    elif kind is Realization.KREIN:
        p = ExtensionParameter(-apply_function(m, np.sqrt), Triplet.BASE, "krein")
    else:
        raise ValueError("Robin parameters are user-supplied; use ExtensionParameter.from_matrix")
    if triplet is Triplet.REGULARIZED:
        from .triplets import regularization_of, transform_parameter

        p = transform_parameter(regularization_of(m), p)
    return p


def to_base(m: SpectralMeasure, p: ExtensionParameter) -> ExtensionParameter:
    if p.triplet is Triplet.BASE:
        return p
    from .triplets import regularization_of, untransform_parameter

    return untransform_parameter(regularization_of(m), p)


# Cell integrals of exp(u s) against the hat functions on [0, 1]:
#   J0(u) = int_0^1 e^{u s} ds,   J1(u) = int_0^1 s e^{u s} ds.

_SERIES_TERMS = 14
_SERIES_RADIUS = 0.1


def _cell_moments(u: complex) -> tuple[complex, complex]:
    if abs(u) < _SERIES_RADIUS:
        j0 = j1 = 0j
        term = 1 + 0j  # u^n / n!
        for n in range(_SERIES_TERMS):
            j0 += term / (n + 1)
            j1 += term / (n + 2)
            term *= u / (n + 1)
        return j0, j1
    e = np.exp(u)
    return (e - 1) / u, (e * (u - 1) + 1) / (u * u)


def _forward(c: np.ndarray, omega: complex, h: float) -> np.ndarray:
    """``A_k = int_0^{x_k} exp(i omega (x_k - y)) c(y) dy`` for one channel."""
    u = 1j * omega * h
    j0, j1 = _cell_moments(u)
    cell = h * (c[1:] * (j0 - j1) + c[:-1] * j1)
    drive = np.concatenate([[0j], cell])
    return lfilter([1.0], [1.0, -np.exp(u)], drive)


def _backward(c: np.ndarray, omega: complex, h: float) -> np.ndarray:
    """``B_k = int_{x_k}^L exp(i omega (y - x_k)) c(y) dy`` for one channel."""
    u = 1j * omega * h
    j0, j1 = _cell_moments(u)
    cell = h * (c[:-1] * (j0 - j1) + c[1:] * j1)
    drive = np.concatenate([cell, [0j]])[::-1]
    return lfilter([1.0], [1.0, -np.exp(u)], drive)[::-1]


def _to_channels(m: SpectralMeasure, f: GridFunction) -> np.ndarray:
    if f.dim != m.dim:
        raise ValueError(f"grid function has dimension {f.dim}, potential has {m.dim}")
    return f.values @ m.eigenvectors.conj()


def _from_channels(m: SpectralMeasure, c: np.ndarray) -> np.ndarray:
    return c @ m.eigenvectors.T


def gamma_apply(m: SpectralMeasure, z: complex, h, grid) -> GridFunction:
    """Deficiency element ``x -> exp(i x sqrt(z - T)) h`` sampled on ``grid``."""
    omega = _channel_roots(m, z)
    x = np.asarray(grid, dtype=float)
    coeff = m.eigenvectors.conj().T @ np.asarray(h, dtype=complex).reshape(-1)
    c = np.exp(1j * np.outer(x, omega)) * coeff
    return GridFunction(x, _from_channels(m, c))


def gamma_adjoint_apply(m: SpectralMeasure, z: complex, f: GridFunction) -> np.ndarray:
    """``gamma(conj z)^* f = int_0^L exp(i x sqrt(z - T)) f(x) dx``."""
    omega = _channel_roots(m, z)
    c = _to_channels(m, f)
    h = f.step
    out = np.empty(m.dim, dtype=complex)
    for j, w in enumerate(omega):
        j0, j1 = _cell_moments(1j * w * h)
        phase = np.exp(1j * w * f.x[:-1])
        out[j] = h * np.sum(phase * (c[:-1, j] * (j0 - j1) + c[1:, j] * j1))
    return m.eigenvectors @ out


def dirichlet_resolvent_apply(m: SpectralMeasure, z: complex, f: GridFunction) -> GridFunction:
    """``(A^D - z)^{-1} f`` through the Green kernel of each eigenchannel.

    ``G(x, y) = (i / 2w)(exp(i w |x - y|) - exp(i w (x + y)))`` with
    ``w = sqrt(z - t_j)``; ``f`` is taken to vanish beyond the grid.
    """
    omega = _channel_roots(m, z)
    c = _to_channels(m, f)
    h = f.step
    g = np.empty_like(c)
    for j, w in enumerate(omega):
        fwd = _forward(c[:, j], w, h)
        bwd = _backward(c[:, j], w, h)
        g[:, j] = (1j / (2 * w)) * (fwd + bwd - np.exp(1j * w * f.x) * bwd[0])
    g[0] = 0
    return GridFunction(f.x, _from_channels(m, g))


def krein_resolvent_apply(m: SpectralMeasure, p: ExtensionParameter, z: complex, f: GridFunction) -> GridFunction:
    """Resolvent of ``A_B`` from the Krein formula.

    ``p`` may refer to either triplet; regularized parameters are mapped
    back to the base triplet first.
    """
    if p.is_dirichlet:
        raise DirichletParameter("use dirichlet_resolvent_apply for the Dirichlet relation")
    B = to_base(m, p).matrix
    gD = dirichlet_resolvent_apply(m, z, f)
    coeff = guarded_inverse(B - base_weyl_matrix(m, z)) @ gamma_adjoint_apply(m, z, f)
    return gD + gamma_apply(m, z, coeff, f.x)


def krein_kernel_basis(m: SpectralMeasure, grid) -> list:
    """Functions ``x -> exp(-x sqrt(t_j)) v_j`` spanning the kernel of ``A^K``."""
    lam = m.eigenvalues
    if np.any(lam <= 0):
        raise ZeroEigenvalue("a zero eigenvalue gives a constant, non-square-integrable kernel element")
    x = np.asarray(grid, dtype=float)
    return [
        GridFunction(x, np.exp(-np.sqrt(t) * x)[:, None] * m.eigenvectors[:, j][None, :])
        for j, t in enumerate(lam)
    ]


def apply_differential(m: SpectralMeasure, g: GridFunction) -> np.ndarray:
    """``-g'' + T g`` at interior nodes by second differences, shape ``(N - 1, dim)``."""
    v = g.values
    d2 = (v[2:] - 2 * v[1:-1] + v[:-2]) / g.step**2
    return -d2 + v[1:-1] @ m.matrix().T


def boundary_derivative(g: GridFunction) -> np.ndarray:
    """One-sided second-order estimate of ``g'(0)``."""
    v = g.values
    return (-3 * v[0] + 4 * v[1] - v[2]) / (2 * g.step)
