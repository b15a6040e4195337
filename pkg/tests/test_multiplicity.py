import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slext import (
    AcBand,
    ExtensionParameter,
    SpectralMeasure,
    Triplet,
    Verdict,
    ac_band,
    ac_closure,
    canonical_parameter,
    compare_tables,
    from_schrodinger_1d,
    multiplicity_table,
    spectral_measure_from_matrix,
    verify_ac_minimality,
)
from slext.errors import EmptyGrid, GridMismatch
from slext.multiplicity import counting_table, imag_boundary_value

from conftest import random_hermitian, random_psd


@pytest.mark.parametrize("kind", ["dirichlet", "neumann", "krein"])
@pytest.mark.parametrize("triplet", [Triplet.BASE, Triplet.REGULARIZED])
def test_table_examples(diag14, kind, triplet):
    tab = multiplicity_table(diag14, canonical_parameter(diag14, kind, triplet), [0.5, 2.0, 5.0])
    assert list(tab.ranks) == [0, 1, 2]
    assert not tab.exceptional.any()
    assert tab.realization == kind


def test_dirichlet_table_is_counting_function(rng):
    for _ in range(5):
        m = spectral_measure_from_matrix(random_psd(rng, 5, scale=3.0))
        grid = np.linspace(0, m.eigenvalues[-1] + 5, 200)
        tab = multiplicity_table(m, ExtensionParameter.dirichlet(), grid)
        ok = ~tab.exceptional
        np.testing.assert_array_equal(tab.ranks[ok], counting_table(m, grid)[ok])
        assert np.all(tab.ranks <= m.dim)


def test_exceptional_points_are_flagged(diag14):
    tab = multiplicity_table(diag14, ExtensionParameter.dirichlet(), [0.0, 1.0, 2.0, 4.0 + 1e-8])
    assert list(tab.exceptional) == [True, True, False, True]
    assert np.all(np.abs(tab.evaluated_at - np.array([0.0, 1.0, 2.0, 4.0])) < 1e-4)
    moved = tab.evaluated_at[tab.exceptional]
    assert np.min(np.abs(moved[:, None] - np.array([0.0, 1.0, 4.0]))) >= 1e-6


def test_singular_pencil_point_takes_neighbour_rank():
    # B - M(t) = 1 - i sqrt(t - 1) never singular for t > 1; B = M(t) at t < 1:
    # M(t) = -sqrt(1 - t), so B = -0.6 is singular at t = 0.64
    m = SpectralMeasure.diagonal([1.0])
    tab = multiplicity_table(m, ExtensionParameter.from_matrix([[-0.6]]), [0.3, 0.64, 2.0])
    assert list(tab.exceptional) == [False, True, False]
    assert tab.ranks[1] == tab.ranks[0] == 0
    assert tab.ranks[2] == 1


def test_imag_boundary_value_is_psd(rng):
    m = spectral_measure_from_matrix(random_psd(rng, 4, scale=2.0))
    for _ in range(20):
        p = ExtensionParameter.from_matrix(random_hermitian(rng, 4, scale=3.0))
        X = imag_boundary_value(m, p, float(rng.uniform(0, 6)))
        assert np.linalg.eigvalsh(X)[0] >= -1e-12


def test_table_rejects_empty_grid(diag14):
    with pytest.raises(EmptyGrid):
        multiplicity_table(diag14, ExtensionParameter.dirichlet(), [])


def test_ac_band_examples():
    assert ac_band(SpectralMeasure.diagonal([0.5, 2.0])).intervals == ((0.5, float("inf")),)
    assert ac_band(SpectralMeasure.diagonal([0.0])).intervals == ((0.0, float("inf")),)
    lo, hi = ac_band(from_schrodinger_1d(np.zeros(200), np.pi)).intervals[0]
    assert lo == pytest.approx(1.0, abs=1e-4) and hi == float("inf")


def test_ac_closure_examples():
    assert ac_closure([(1, 2), 3, (2, 4)]).intervals == ((1.0, 4.0),)
    assert ac_closure([]).intervals == ()
    assert len(ac_closure([])) == 0
    assert ac_closure([(0, 1), (1, 2)]).intervals == ((0.0, 2.0),)
    assert ac_closure([(5, 5), (3, 4)]).intervals == ((3.0, 4.0),)
    band = ac_closure([(0, 1), (2, 3)])
    assert 0.5 in band and 1.5 not in band and 1.0 not in band


intervals = st.lists(
    st.tuples(st.floats(-10, 10), st.floats(0, 5)).map(lambda p: (p[0], p[0] + p[1])), max_size=6
)


@settings(max_examples=60, deadline=None)
@given(intervals, intervals)
def test_ac_closure_idempotent_and_monotone(a, b):
    ca = ac_closure(a)
    assert ac_closure(ca.intervals) == ca
    cab = ac_closure(a + b)
    for lo, hi in ca:
        mid = 0.5 * (lo + hi)
        assert mid in cab
    ivs = ca.intervals
    for (l1, h1), (l2, h2) in zip(ivs, ivs[1:]):
        assert h1 < l2


def test_compare_tables(diag14, rng):
    grid = np.linspace(0, 10, 200)
    D = multiplicity_table(diag14, ExtensionParameter.dirichlet(), grid)
    N = multiplicity_table(diag14, canonical_parameter(diag14, "neumann"), grid)
    assert compare_tables(D, N) is Verdict.EQUAL
    assert compare_tables(D, D) is Verdict.EQUAL
    m = spectral_measure_from_matrix(random_psd(rng, 3))
    grid = np.linspace(0, m.eigenvalues[-1] + 3, 120)
    D = multiplicity_table(m, ExtensionParameter.dirichlet(), grid)
    R = multiplicity_table(m, ExtensionParameter.from_matrix(np.eye(3)), grid)
    assert compare_tables(D, R).a_leq_b()
    with pytest.raises(GridMismatch):
        compare_tables(D, multiplicity_table(m, ExtensionParameter.dirichlet(), grid[:-1]))


def test_compare_tables_orderings(diag14):
    grid = [0.5, 2.0, 5.0]
    a = multiplicity_table(diag14, ExtensionParameter.dirichlet(), grid)
    b = multiplicity_table(SpectralMeasure.diagonal([0.1, 1.5]), ExtensionParameter.dirichlet(), grid)
    assert compare_tables(a, b) is Verdict.A_LEQ_B
    assert compare_tables(b, a) is Verdict.B_LEQ_A
    c = multiplicity_table(SpectralMeasure.diagonal([0.1, 6.0]), ExtensionParameter.dirichlet(), grid)
    # a = [0, 1, 2], c = [1, 1, 1]
    assert compare_tables(a, c) is Verdict.INCOMPARABLE
    assert compare_tables(a, c, subset=AcBand(((0.0, 1.0),))) is Verdict.A_LEQ_B


def test_verify_ac_minimality(diag14, rng):
    params = [random_hermitian(rng, 2, scale=3.0) for _ in range(20)]
    params.append(canonical_parameter(diag14, "krein"))
    rep = verify_ac_minimality(diag14, params, np.linspace(0, 10, 200))
    assert rep.passed and all(rep.per_parameter) and rep.first_violation == [None] * 21
    assert rep.grid_points == 200
    assert "21/21" in rep.summary()


def test_scalar_robin_rank():
    m = SpectralMeasure.diagonal([1.0])
    grid = np.linspace(1.5, 10, 40)
    tab = multiplicity_table(m, ExtensionParameter.from_matrix([[5.0]]), grid)
    assert np.all(tab.ranks == 1)
    assert verify_ac_minimality(m, [[[5.0]]], grid).passed
