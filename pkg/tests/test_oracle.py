import numpy as np
import pytest

from slext import (
    ExtensionParameter,
    GridFunction,
    SpectralMeasure,
    canonical_parameter,
    discretize_halfline,
    discretize_interval,
    energy_identity_check,
    interval_spectrum_formula,
    kato_condition_check,
    oracle_resolvent_apply,
    spectral_measure_from_matrix,
    spectrum,
)
from slext import oracle
from slext.errors import BadGrid, BoundaryViolation, ShiftOnSpectrum

from conftest import random_hermitian, random_psd

DIRICHLET = ExtensionParameter.dirichlet()


def test_interval_formula_examples():
    m = SpectralMeasure.diagonal([0.5, 2.0])
    np.testing.assert_allclose(interval_spectrum_formula(m, "DD", 6), [1.5, 3.0, 4.5, 6.0, 9.5, 11.0])
    np.testing.assert_allclose(interval_spectrum_formula(m, "NN", 4), [0.5, 1.5, 2.0, 3.0])
    np.testing.assert_allclose(interval_spectrum_formula(SpectralMeasure.diagonal([0.0]), "DD", 4), [1, 4, 9, 16])
    with pytest.raises(ValueError):
        interval_spectrum_formula(m, "DD", 0)


@pytest.mark.parametrize("bc,count", [("DD", 6), ("NN", 4), ("DD", 20), ("NN", 20)])
def test_interval_spectra(bc, count):
    m = SpectralMeasure.diagonal([0.5, 2.0])
    d = discretize_interval(m, bc, np.pi / 400)
    np.testing.assert_allclose(spectrum(d, count), interval_spectrum_formula(m, bc, count), atol=1e-2)


def test_interval_scalar_laplacian():
    d = discretize_interval(SpectralMeasure.diagonal([0.0]), "DD", np.pi / 400)
    np.testing.assert_allclose(spectrum(d, 5), [1, 4, 9, 16, 25], atol=1e-2)


def test_interval_second_order_richardson():
    m = SpectralMeasure.diagonal([0.5])
    exact = interval_spectrum_formula(m, "DD", 5)
    errs = [np.abs(spectrum(discretize_interval(m, "DD", np.pi / n, order=2), 5) - exact) for n in (100, 200)]
    ratios = errs[0] / errs[1]
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_interval_rejects_coarse_grid():
    with pytest.raises(BadGrid):
        discretize_interval(SpectralMeasure.diagonal([0.0]), "DD", np.pi / 10)
    with pytest.raises(ValueError):
        discretize_interval(SpectralMeasure.diagonal([0.0]), "DN", np.pi / 40)


def test_halfline_band_edge_and_truncation():
    m = SpectralMeasure.diagonal([1.0])
    low = spectrum(discretize_halfline(m, DIRICHLET, 30.0, 1 / 200), 5)
    assert low[0] >= 1 - 1e-2
    firsts = [spectrum(discretize_halfline(m, DIRICHLET, L, 1 / 50), 1)[0] for L in (10.0, 20.0, 40.0)]
    assert firsts[0] > firsts[1] > firsts[2] > 1 - 1e-3


def test_neumann_dirichlet_gap_shrinks():
    m = SpectralMeasure.diagonal([1.0])
    neu = canonical_parameter(m, "neumann")
    gaps = []
    for L in (10.0, 20.0, 40.0):
        d = spectrum(discretize_halfline(m, DIRICHLET, L, 1 / 50), 1)[0]
        n = spectrum(discretize_halfline(m, neu, L, 1 / 50), 1)[0]
        gaps.append(d - n)
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_krein_ghost_eigenvalue():
    m = SpectralMeasure.diagonal([1.0])
    w = spectrum(discretize_halfline(m, canonical_parameter(m, "krein"), 40.0, 1 / 200), 2)
    assert abs(w[0]) < 1e-2
    assert w[1] > 0.9


def test_spectrum_shift_and_nonnegativity(rng):
    m = spectral_measure_from_matrix(random_psd(rng, 2))
    sqrtT = -canonical_parameter(m, "krein").matrix
    P = random_psd(rng, 2)
    for p in (DIRICHLET, canonical_parameter(m, "neumann"), canonical_parameter(m, "krein"),
              ExtensionParameter.from_matrix(-sqrtT + P)):
        d = discretize_halfline(m, p, 20.0, 1 / 50)
        assert d.hermitian_defect() <= 1e-10
        w = spectrum(d, 3)
        assert w[0] >= -1e-8
        np.testing.assert_allclose(spectrum(d.shifted(2.5), 3), w + 2.5, atol=1e-10)


@pytest.mark.parametrize("band_limit", [64, 0])
def test_large_problem_solvers(monkeypatch, band_limit):
    # band_limit 0 forces shift-invert Lanczos
    monkeypatch.setattr(oracle, "BAND_LIMIT", band_limit)
    m = SpectralMeasure.diagonal([0.0, 1.0])
    d = discretize_interval(m, "DD", np.pi / 2000)
    assert d.size > oracle.DENSE_LIMIT
    np.testing.assert_allclose(spectrum(d, 4), interval_spectrum_formula(m, "DD", 4), atol=1e-6)


def test_resolvent_solve_is_exact(rng):
    m = spectral_measure_from_matrix(random_psd(rng, 2))
    p = ExtensionParameter.from_matrix(random_hermitian(rng, 2))
    d = discretize_halfline(m, p, 20.0, 1 / 100)
    f = GridFunction.sample(lambda x: np.stack([np.exp(-x), x * np.exp(-x)], axis=1), 20.0, 1 / 100)
    z = 0.3 + 0.7j
    g = oracle_resolvent_apply(d, z, f)
    res = d.apply(g).values[d.nodes] - z * g.values[d.nodes] - f.values[d.nodes]
    assert np.max(np.abs(res)) <= 1e-10 * max(1.0, np.max(np.abs(f.values)))


def test_resolvent_rejects_eigenvalue():
    m = SpectralMeasure.diagonal([1.0])
    d = discretize_halfline(m, DIRICHLET, 10.0, 1 / 20)
    lam = spectrum(d, 1)[0]
    f = GridFunction.sample(lambda x: np.exp(-x), 10.0, 1 / 20)
    with pytest.raises(ShiftOnSpectrum):
        oracle_resolvent_apply(d, lam, f)


def test_halfline_rejects_coarse_grid():
    with pytest.raises(BadGrid):
        discretize_halfline(SpectralMeasure.diagonal([1.0]), DIRICHLET, 1.0, 0.5)


def _energy_fn(kind, v, length=40.0, step=1 / 400):
    v = np.asarray(v, dtype=float)
    if kind == "poly_exp":
        return GridFunction.sample(lambda x: np.outer(x**2 * np.exp(-x), v), length, step, v.size)
    return GridFunction.sample(lambda x: np.outer(x**3 * np.exp(-x**2 / 2), v), length, step, v.size)


@pytest.mark.parametrize("kind", ["poly_exp", "gauss"])
def test_energy_identity(rng, kind):
    for values in ([0.0], [1.0], rng.uniform(0.1, 5.0, 3)):
        m = SpectralMeasure.diagonal(values)
        f = _energy_fn(kind, np.ones(m.dim))
        assert energy_identity_check(m, f) <= 1e-4


def test_energy_identity_trivial_cases():
    m = SpectralMeasure.diagonal([1.0])
    zero = GridFunction.sample(lambda x: 0 * x, 10.0, 1 / 100)
    assert energy_identity_check(m, zero) == 0.0
    assert energy_identity_check(SpectralMeasure.diagonal([0.0, 0.0]), _energy_fn("poly_exp", [1.0, -2.0])) <= 1e-10
    with pytest.raises(BoundaryViolation):
        energy_identity_check(m, GridFunction.sample(lambda x: x * np.exp(-x), 10.0, 1 / 100))


def test_kato_examples():
    x = np.linspace(-30, 30, 6001)
    rep = kato_condition_check(x, np.exp(-np.abs(x)))
    assert rep.consistent
    assert np.all(np.diff(rep.profile[rep.profile.size // 2:]) <= 0)
    # closed form at radius r >= 1: e^{-r}(e - 1/e)
    r = rep.radius[-1]
    assert rep.profile[-1] == pytest.approx(np.exp(-r) * (np.e - 1 / np.e), rel=1e-5)
    flat = kato_condition_check(x, np.ones_like(x))
    np.testing.assert_allclose(flat.profile, 2.0, atol=1e-12)
    assert not flat.consistent
    bump = np.where(np.abs(x) < 2, 1 - np.abs(x) / 2, 0.0)
    comp = kato_condition_check(x, bump)
    assert np.all(comp.profile[comp.radius > 3 + 1e-9] == 0)
    assert comp.consistent
