import numpy as np
import pytest

from slext import SpectralMeasure, spectral_measure_from_matrix


def random_psd(rng, dim, scale=1.0):
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (G.conj().T @ G) / dim


def random_hermitian(rng, dim, scale=1.0):
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (G + G.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def diag14():
    return SpectralMeasure.diagonal([1.0, 4.0])


@pytest.fixture
def scalar_one():
    return SpectralMeasure.diagonal([1.0])


@pytest.fixture
def random_measure(rng):
    return spectral_measure_from_matrix(random_psd(rng, 4))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number].line())
