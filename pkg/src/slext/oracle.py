"""Finite-difference brute-force oracle.

Discretizes ``-d^2/dx^2 + T`` on a truncated half-line ``[0, L]`` (Dirichlet
cap at ``L``) or on ``[0, pi]`` and solves eigenproblems and shifted linear
systems.  Nothing here calls the Green-function machinery of
:mod:`slext.realizations`; the two paths only meet in tests.

Symmetrization: boundary rows built from ghost-point elimination are not
symmetric by themselves.  With the trapezoid weights ``W`` (1/2 on a Robin or
Neumann boundary node, 1 elsewhere) ``S = W D`` is symmetric, and the stored
matrix is the similar Hermitian matrix ``W^{-1/2} S W^{-1/2}``.  Grid
functions are mapped in and out with ``W^{1/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import eig_banded, eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, splu

from .errors import BadGrid, BoundaryViolation, ShiftOnSpectrum, SolverFailure
from .params import ExtensionParameter
from .realizations import GridFunction, to_base
from .spectral import SpectralMeasure, apply_function

DENSE_LIMIT = 2500
BAND_LIMIT = 64

# 5-point, fourth-order stencil for -f''
_STENCIL4 = {-2: 1 / 12, -1: -16 / 12, 0: 30 / 12, 1: -16 / 12, 2: 1 / 12}
_STENCIL2 = {-1: -1.0, 0: 2.0, 1: -1.0}


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Hermitian finite-difference matrix of size ``(nodes * dim)``.

    Attributes
    ----------
    matrix : sparse matrix
        Node-major Hermitian matrix ``W^{-1/2} S W^{-1/2}``.
    nodes : ndarray
        Grid indices (into ``x``) of the unknowns.
    x : ndarray
        Full grid including boundary nodes.
    weights : ndarray
        Trapezoid weight of each unknown node relative to ``h``.
    left, right : str
        Boundary condition labels.
    """

    matrix: sp.csr_matrix
    nodes: np.ndarray
    x: np.ndarray
    weights: np.ndarray
    dim: int
    left: str
    right: str
    measure: Optional[SpectralMeasure] = field(default=None, repr=False)
    parameter: Optional[ExtensionParameter] = field(default=None, repr=False)

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def hermitian_defect(self) -> float:
        A = self.matrix
        return float(abs(A - A.conj().T).max()) if A.nnz else 0.0

    def shifted(self, c: float) -> "DiscretizedOperator":
        A = (self.matrix + c * sp.identity(self.size, format="csr")).tocsr()
        return DiscretizedOperator(A, self.nodes, self.x, self.weights, self.dim,
                                   self.left, self.right, self.measure, self.parameter)

    def _sqrt_w(self) -> np.ndarray:
        return np.repeat(np.sqrt(self.weights), self.dim)

    def restrict(self, f: GridFunction) -> np.ndarray:
        if f.values.shape != (self.x.size, self.dim) or not np.allclose(f.x, self.x, atol=1e-12):
            raise BadGrid("grid function does not live on the operator grid")
        return f.values[self.nodes].reshape(-1)

    def extend(self, vec: np.ndarray) -> GridFunction:
        vals = np.zeros((self.x.size, self.dim), dtype=complex)
        vals[self.nodes] = np.asarray(vec).reshape(len(self.nodes), self.dim)
        return GridFunction(self.x, vals)

    def apply(self, g: GridFunction) -> GridFunction:
        """Discrete operator ``D`` (unsymmetrized form) applied to ``g``."""
        s = self._sqrt_w()
        return self.extend((self.matrix @ (s * self.restrict(g))) / s)


def _scalar_second_difference(n_nodes: int, order: int, left: str, right: str, N: int):
    """Rows of ``-f''`` (times h^2) over grid indices 0..N, with boundary closures.

    Returns the unknown indices and the sparse matrix acting on them.
    ``left``/``right`` are ``dirichlet`` (value 0, odd reflection) or
    ``neumann`` (even reflection).
    """
    stencil = _STENCIL4 if order == 4 else _STENCIL2
    lo = 1 if left == "dirichlet" else 0
    hi = N - 1 if right == "dirichlet" else N
    nodes = np.arange(lo, hi + 1)
    pos = {g: k for k, g in enumerate(nodes)}
    rows, cols, vals = [], [], []
    for g in nodes:
        for off, c in stencil.items():
            r, sign = g + off, 1.0
            if r < 0:
                r, sign = -r, (-1.0 if left == "dirichlet" else 1.0)
            elif r > N:
                r, sign = 2 * N - r, (-1.0 if right == "dirichlet" else 1.0)
            if r not in pos:
                continue  # Dirichlet boundary value
            rows.append(pos[g])
            cols.append(pos[r])
            vals.append(sign * c)
    D = sp.coo_matrix((vals, (rows, cols)), shape=(nodes.size, nodes.size)).tocsr()
    return nodes, D


def _assemble(D_scalar, weights, m: SpectralMeasure, boundary_block=None):
    """``W^{1/2} D W^{-1/2}`` (x) I + I (x) T, plus an optional block at node 0."""
    s = np.sqrt(weights)
    Dh = sp.diags(s) @ D_scalar @ sp.diags(1 / s)
    Dh = 0.5 * (Dh + Dh.T)  # removes rounding asymmetry only
    n = D_scalar.shape[0]
    T = m.matrix()
    A = sp.kron(Dh, sp.identity(m.dim), format="csr") + sp.kron(sp.identity(n), sp.csr_matrix(T), format="csr")
    if boundary_block is not None:
        corner = sp.lil_matrix((n, n))
        corner[0, 0] = 1.0
        A = A + sp.kron(corner.tocsr(), sp.csr_matrix(boundary_block), format="csr")
    return A.tocsr()


def _check_grid(length: float, h: float, max_ratio: float) -> int:
    if h <= 0 or length <= 0 or h > length / max_ratio + 1e-15:
        raise BadGrid(f"step {h} too coarse for length {length}")
    N = int(round(length / h))
    if abs(N * h - length) > 1e-9 * length:
        raise BadGrid(f"length {length} is not a multiple of step {h}")
    return N


def discretize_halfline(m: SpectralMeasure, p: ExtensionParameter, L: float, h: float) -> DiscretizedOperator:
    """Three-point discretization on ``[0, L]`` with a Dirichlet cap at ``L``.

    A matrix parameter ``B`` enters through the ghost value
    ``f_{-1} = f_1 - 2h B f_0`` from ``(f_1 - f_{-1}) / 2h = B f_0``, which turns
    the first row into ``2(f_0 - f_1)/h^2 + (2/h) B f_0 + T f_0``; halving it
    (node weight 1/2) makes the system symmetric.
    """
    N = _check_grid(L, h, 10)
    x = np.linspace(0.0, L, N + 1)
    if p.is_dirichlet:
        nodes, D = _scalar_second_difference(N + 1, 2, "dirichlet", "dirichlet", N)
        weights = np.ones(nodes.size)
        A = _assemble(D / h**2, weights, m)
        left = "dirichlet"
    else:
        B = to_base(m, p).matrix
        nodes, D = _scalar_second_difference(N + 1, 2, "neumann", "dirichlet", N)
        weights = np.ones(nodes.size)
        weights[0] = 0.5
        # W^{-1/2} (B/h) W^{-1/2} at node 0
        A = _assemble(D / h**2, weights, m, boundary_block=2.0 * B / h)
        left = "robin"
    return DiscretizedOperator(A, nodes, x, weights, m.dim, left, "dirichlet", m, p)


def discretize_interval(m: SpectralMeasure, bc: str, h: float, order: int = 4) -> DiscretizedOperator:
    """Discretize on ``[0, pi]`` with ``DD`` (Dirichlet) or ``NN`` (Neumann) ends.

    ``order=4`` uses the five-point stencil with reflection closures: odd
    reflection for Dirichlet ends, even reflection for Neumann ends.  Both
    closures are exact for the sine/cosine eigenfunctions, so eigenvalue
    errors are ``O(k^6 h^4)``.  ``order=2`` is the plain three-point stencil.
    """
    bc = bc.upper()
    if bc not in ("DD", "NN"):
        raise ValueError("bc must be 'DD' or 'NN'")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    N = _check_grid(np.pi, h, 20)
    x = np.linspace(0.0, np.pi, N + 1)
    side = "dirichlet" if bc == "DD" else "neumann"
    nodes, D = _scalar_second_difference(N + 1, order, side, side, N)
    weights = np.ones(nodes.size)
    if side == "neumann":
        weights[0] = weights[-1] = 0.5
    A = _assemble(D / h**2, weights, m)
    return DiscretizedOperator(A, nodes, x, weights, m.dim, side, side, m, None)


def _gershgorin_lower(A: sp.csr_matrix) -> float:
    d = A.diagonal().real
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - off))


def _lower_band(A: sp.csr_matrix) -> np.ndarray:
    C = A.tocoo()
    lower = C.row >= C.col
    r, c, v = C.row[lower], C.col[lower], C.data[lower]
    bw = int(np.max(r - c)) if r.size else 0
    band = np.zeros((bw + 1, A.shape[0]), dtype=complex)
    band[r - c, c] = v
    return band


def spectrum(d: DiscretizedOperator, k: int) -> np.ndarray:
    """The ``k`` smallest eigenvalues, ascending.

    Banded matrices go to a banded Hermitian solver, small dense ones to
    ``eigh`` and the rest to shift-invert Lanczos.
    """
    n = d.size
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]")
    try:
        band = _lower_band(d.matrix)
        if band.shape[0] <= BAND_LIMIT:
            w = eig_banded(band, lower=True, eigvals_only=True, select="i", select_range=(0, k - 1))
        elif n <= DENSE_LIMIT or k >= n - 1:
            w = eigh(d.matrix.toarray(), eigvals_only=True, subset_by_index=[0, k - 1])
        else:
            sigma = _gershgorin_lower(d.matrix) - 1.0
            w = eigsh(d.matrix.astype(complex), k=k, sigma=sigma, which="LM",
                      return_eigenvectors=False, v0=np.ones(n, dtype=complex))
    except (ArpackNoConvergence, np.linalg.LinAlgError) as exc:
        raise SolverFailure(str(exc)) from exc
    return np.sort(np.real(w))


def oracle_resolvent_apply(d: DiscretizedOperator, z: complex, f: GridFunction) -> GridFunction:
    """Solve ``(D - z) g = f`` on the grid; boundary values of ``g`` follow ``d``."""
    z = complex(z)
    A = d.matrix.astype(complex)
    if z.imag == 0:
        near = eigsh(A, k=1, sigma=z.real, which="LM", return_eigenvectors=False,
                     v0=np.ones(d.size, dtype=complex))
        if np.min(np.abs(near - z.real)) < 1e-10:
            raise ShiftOnSpectrum(f"z = {z.real} is an eigenvalue of the discretization")
    s = d._sqrt_w()
    rhs = s * d.restrict(f)
    try:
        lu = splu((A - z * sp.identity(d.size, format="csc")).tocsc())
        gt = lu.solve(rhs)
    except RuntimeError as exc:
        raise ShiftOnSpectrum(str(exc)) from exc
    return d.extend(gt / s)


def interval_spectrum_formula(m: SpectralMeasure, bc: str, count: int) -> np.ndarray:
    """The ``count`` smallest values of ``k^2 + t_j`` (k >= 1 for DD, k >= 0 for NN)."""
    if count < 1:
        raise ValueError("count must be positive")
    k0 = 1 if bc.upper() == "DD" else 0
    ks = np.arange(k0, k0 + count)
    vals = (ks[:, None] ** 2 + m.eigenvalues[None, :]).ravel()
    return np.sort(vals)[:count]


def _one_sided_derivative_weights(points: int = 7) -> np.ndarray:
    # exact for polynomials of degree < points
    k = np.arange(points, dtype=float)
    V = np.vander(k, points, increasing=True).T
    rhs = np.zeros(points)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def energy_identity_check(m: SpectralMeasure, f: GridFunction) -> float:
    """Relative residual of ``||Af||^2 = ||f''||^2 + ||Tf||^2 + 2||sqrt(T) f'||^2``.

    ``A f = -f'' + T f``; derivatives are finite differences, integrals use
    the trapezoid rule.  ``f`` must satisfy ``f(0) = f'(0) = 0``.
    """
    v, h = f.values, f.step
    if v.shape[1] != m.dim:
        raise ValueError("dimension mismatch")
    d0 = np.abs(_one_sided_derivative_weights() @ v[:7] / h)
    if np.max(np.abs(v[0])) > 1e-8 or np.max(d0) > 1e-8:
        raise BoundaryViolation(f"f(0) = {np.max(np.abs(v[0])):.2e}, f'(0) = {np.max(d0):.2e}")
    d1 = np.gradient(v, h, axis=0, edge_order=2)
    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    d2[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
    d2[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
    T = m.matrix()
    sT = apply_function(m, np.sqrt)
    w = f.trapezoid_weights()

    def sq(a):
        return float(np.sum(w * np.sum(np.abs(a) ** 2, axis=1)))

    lhs = sq(-d2 + v @ T.T)
    rhs = sq(d2) + sq(v @ T.T) + 2 * sq(d1 @ sT.T)
    if lhs == 0:
        return 0.0
    return abs(lhs - rhs) / lhs


@dataclass(frozen=True)
class KatoProfile:
    radius: np.ndarray
    profile: np.ndarray
    threshold: float
    consistent: bool


def kato_condition_check(x, q, window: float = 1.0, threshold: float = 1e-3, points: int = 200) -> KatoProfile:
    """Moving-window integrals ``int_{|x - y| <= window} q(y) dy`` versus ``|x|``.

    ``q`` is sampled on the box ``[x_0, x_end]``; outside the box it is taken
    equal to its boundary value, so the profile near the box edge is only as
    good as that extension.  The verdict is ``consistent`` when the outer half
    of the profile does not increase and its last value is below ``threshold``.
    """
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    if x.size != q.size or x.size < 2:
        raise ValueError("x and q must have the same length >= 2")
    F = cumulative_trapezoid(q, x, initial=0.0)
    a_box, b_box = x[0], x[-1]

    def window_integral(c):
        lo, hi = c - window, c + window
        inner = np.interp(min(hi, b_box), x, F) - np.interp(max(lo, a_box), x, F)
        left = max(0.0, a_box - lo) * q[0]
        right = max(0.0, hi - b_box) * q[-1]
        return inner + left + right

    rmax = min(abs(a_box), abs(b_box)) if a_box < 0 < b_box else max(abs(a_box), abs(b_box))
    radius = np.linspace(0.0, rmax, points)
    prof = np.empty(points)
    for k, r in enumerate(radius):
        cands = [c for c in (r, -r) if a_box <= c <= b_box]
        prof[k] = max(window_integral(c) for c in cands)
    tail = prof[points // 2:]
    scale = max(1.0, float(np.max(np.abs(prof))))
    nonincreasing = bool(np.all(np.diff(tail) <= 1e-12 * scale))
    consistent = nonincreasing and tail[-1] < threshold
    return KatoProfile(radius, prof, threshold, consistent)
