import cmath

import numpy as np
import pytest

from slext import (
    ExtensionParameter,
    SpectralMeasure,
    Triplet,
    boundary_value,
    canonical_parameter,
    counting_function,
    invariant_max_normal,
    spectral_measure_from_matrix,
    weyl_base,
    weyl_of_extension,
)
from slext.errors import (
    DirichletParameter,
    EigenvalueCollision,
    KreinAtZero,
    OnSpectrumWithoutLimit,
    SingularPencil,
)
from slext.multiplicity import numerical_rank
from slext.weyl import base_weyl_matrix, normal_function_bound

from conftest import random_hermitian, random_psd

E3 = cmath.exp(3j * cmath.pi / 4)


def test_weyl_base_examples():
    assert weyl_base(SpectralMeasure.diagonal([0.0]), 1j).value[0, 0] == pytest.approx(E3, abs=1e-15)
    np.testing.assert_allclose(weyl_base(SpectralMeasure.diagonal([1.0, 4.0]), 0).value, -np.diag([1, 2]), atol=1e-15)
    assert weyl_base(SpectralMeasure.diagonal([1.0]), -3).value[0, 0] == pytest.approx(-2.0)


def test_weyl_base_rejects_real_spectrum():
    with pytest.raises(OnSpectrumWithoutLimit):
        weyl_base(SpectralMeasure.diagonal([1.0]), 1.5)


def test_boundary_value_examples():
    m1 = SpectralMeasure.diagonal([1.0])
    assert boundary_value(m1, "dirichlet", 5).value[0, 0] == pytest.approx(2j)
    assert boundary_value(m1, "neumann", 2).value[0, 0] == pytest.approx(1j)
    s = boundary_value(SpectralMeasure.diagonal([1.0, 9.0]), "krein", 4)
    np.testing.assert_allclose(s.imag_part, np.diag([np.sqrt(3) / 4, 0]), atol=1e-15)


def test_boundary_value_matches_limit(random_measure):
    # closed forms against y -> 0 of the interior values
    for kind, p in [("neumann", canonical_parameter(random_measure, "neumann")),
                    ("krein", canonical_parameter(random_measure, "krein"))]:
        t = random_measure.eigenvalues[1] + 0.3
        exact = boundary_value(random_measure, kind, t).value
        near = weyl_of_extension(random_measure, p, complex(t, 1e-10)).value
        np.testing.assert_allclose(near, exact, atol=1e-6)


def test_boundary_value_errors(scalar_one):
    with pytest.raises(EigenvalueCollision):
        boundary_value(scalar_one, "neumann", 1.0)
    with pytest.raises(KreinAtZero):
        boundary_value(scalar_one, "krein", 0.0)


def test_weyl_of_extension_examples():
    m1 = SpectralMeasure.diagonal([1.0])
    neumann = weyl_of_extension(m1, canonical_parameter(m1, "neumann"), 2 + 0j)
    assert neumann.value[0, 0] == pytest.approx(1j)
    krein = weyl_of_extension(m1, canonical_parameter(m1, "krein"), 2)
    assert krein.value[0, 0] == pytest.approx(-0.5 + 0.5j)
    # closed form (1/z)(i sqrt(z - T) - sqrt(T))
    assert krein.value[0, 0] == pytest.approx((1j * 1 - 1) / 2)
    m0 = SpectralMeasure.diagonal([0.0])
    val = weyl_of_extension(m0, ExtensionParameter.from_matrix([[1.0]]), 1j).value[0, 0]
    assert val == pytest.approx(1 / (1 - E3), abs=1e-14)
    assert val == pytest.approx(0.5 + 0.20710678118654752j, abs=1e-12)


def test_weyl_of_extension_errors(scalar_one):
    with pytest.raises(DirichletParameter):
        weyl_of_extension(scalar_one, ExtensionParameter.dirichlet(), 1j)
    # Neumann pencil -M(t) vanishes at the eigenvalue
    with pytest.raises(SingularPencil):
        weyl_of_extension(scalar_one, canonical_parameter(scalar_one, "neumann"), 1.0)


def test_herglotz_positivity_random(rng):
    worst = np.inf
    for _ in range(100):
        dim = rng.integers(1, 6)
        m = spectral_measure_from_matrix(random_psd(rng, dim, scale=rng.uniform(0.1, 10)))
        z = complex(rng.uniform(-5, 15), 10 ** rng.uniform(-4, 1))
        for p in (canonical_parameter(m, "neumann"), canonical_parameter(m, "krein"),
                  ExtensionParameter.from_matrix(random_hermitian(rng, dim)),
                  canonical_parameter(m, "krein", Triplet.REGULARIZED)):
            worst = min(worst, weyl_of_extension(m, p, z).min_imag_eig())
        worst = min(worst, weyl_base(m, z).min_imag_eig())
    assert worst >= -1e-10


def test_conjugate_symmetry(rng):
    for _ in range(50):
        m = spectral_measure_from_matrix(random_psd(rng, 4))
        z = complex(rng.uniform(-5, 5), rng.uniform(0.01, 3))
        diff = base_weyl_matrix(m, z.conjugate()) - base_weyl_matrix(m, z).conj().T
        assert np.linalg.norm(diff, 2) <= 1e-12


def test_monotone_on_gap(random_measure):
    t0 = random_measure.inf_spectrum()
    xs = np.linspace(t0 - 10, t0 - 1e-3, 40)
    vals = [weyl_base(random_measure, x).value for x in xs]
    for a, b in zip(vals[:-1], vals[1:]):
        assert np.linalg.eigvalsh(b - a)[0] >= -1e-10


def test_neumann_blows_up_at_eigenvalues(diag14):
    for lam in diag14.eigenvalues:
        assert np.linalg.norm(boundary_value(diag14, "neumann", lam + 1e-8).value, 2) > 1e3


def test_dirichlet_rank_is_counting(random_measure):
    for t in np.linspace(-1, random_measure.eigenvalues[-1] + 2, 57):
        if np.min(np.abs(random_measure.eigenvalues - t)) < 1e-6:
            continue
        im = boundary_value(random_measure, "dirichlet", t).imag_part
        assert numerical_rank(im, 1e-8) == counting_function(random_measure, t)


def _normal_oracle_scalar_zero(ys):
    # m = [0], t = 0: sqrt(2) |sqrt(y) e^{3i pi/4} + sqrt(2)/2|
    return np.max(np.sqrt(2) * np.abs(np.sqrt(ys) * E3 + np.sqrt(2) / 2))


def test_invariant_max_normal_scalar_zero():
    est = invariant_max_normal(SpectralMeasure.diagonal([0.0]), 0.0, 64)
    assert est.value == pytest.approx(1.0, abs=1e-6)
    assert est.value == pytest.approx(_normal_oracle_scalar_zero(est.y_grid), abs=1e-14)
    assert est.bound == pytest.approx(2.41421356, abs=1e-8)


def test_invariant_max_normal_bound(rng):
    m = SpectralMeasure.diagonal([1.0])
    est = invariant_max_normal(m, -5, 64)
    assert est.bound == pytest.approx((1 + np.sqrt(2)) * 26 ** 0.25)
    assert est.value <= est.bound
    # for t in [-5, 1] the scalar supremum over all lambda >= 0 stays below
    # the bound, so any T must pass
    for _ in range(10):
        m = spectral_measure_from_matrix(random_psd(rng, 3, scale=rng.uniform(0.1, 50)))
        for t in (-5.0, -1.0, 0.0, 0.5, 1.0):
            est = invariant_max_normal(m, t, 32)
            assert est.value <= normal_function_bound(t) + 1e-8


def test_invariant_max_normal_exceeds_bound_near_eigenvalue():
    # with an eigenvalue at t the sandwiched value tends to 2t as y -> 0,
    # above (1 + sqrt 2)(1 + t^2)^{1/4} once t is moderately large
    t = 10.0
    m = SpectralMeasure.diagonal([t])
    est = invariant_max_normal(m, t, 64)
    si = complex(np.sqrt(1j - t))
    y = est.y_grid[-1]
    oracle = abs((1j * np.sqrt(complex(0, y)) + si.imag) / si.real)
    assert est.value == pytest.approx(oracle, rel=1e-9)
    assert est.value == pytest.approx(2 * t, rel=1e-2)
    assert est.value > est.bound


def test_invariant_max_normal_is_triplet_invariant(random_measure):
    for t in (-1.0, 0.7, 6.0):
        a = invariant_max_normal(random_measure, t, 24, Triplet.BASE).value
        b = invariant_max_normal(random_measure, t, 24, Triplet.REGULARIZED).value
        assert a == pytest.approx(b, rel=1e-9)


def test_invariant_max_normal_needs_grid():
    with pytest.raises(ValueError):
        invariant_max_normal(SpectralMeasure.diagonal([1.0]), 0.0, 4)
