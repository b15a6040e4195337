"""Typed errors raised by the library.

Every error carries a short machine-readable ``code`` and the CLI exit
status it maps to, so batch runs can serialize failures without string
matching.
"""

from __future__ import annotations


class SlextError(Exception):
    code = "error"
    exit_status = 3


class InputError(SlextError, ValueError):
    exit_status = 2


class NumericalError(SlextError, ArithmeticError):
    exit_status = 3


class SolverError(SlextError, RuntimeError):
    exit_status = 4


# spectral core
class NotHermitian(InputError):
    code = "not_hermitian"


class NegativeSpectrum(InputError):
    code = "negative_spectrum"


class NegativePotential(InputError):
    code = "negative_potential"


class TooFewSamples(InputError):
    code = "too_few_samples"


class FunctionUndefinedAtEigenvalue(NumericalError):
    code = "function_undefined_at_eigenvalue"


# Weyl functions and extensions
class OnSpectrumWithoutLimit(NumericalError):
    code = "on_spectrum_without_limit"


class EigenvalueCollision(NumericalError):
    code = "eigenvalue_collision"


class KreinAtZero(NumericalError):
    code = "krein_at_zero"


class SingularPencil(SolverError):
    code = "singular_pencil"


class DirichletParameter(InputError):
    code = "dirichlet_parameter"


class DegenerateImaginaryPart(NumericalError):
    code = "degenerate_imaginary_part"


class RealSpectralPoint(NumericalError):
    code = "real_spectral_point"


class ZeroEigenvalue(InputError):
    code = "zero_eigenvalue"


# multiplicity tables
class EmptyGrid(InputError):
    code = "empty_grid"


class GridMismatch(InputError):
    code = "grid_mismatch"


# finite-difference oracle
class BadGrid(InputError):
    code = "bad_grid"


class SolverFailure(SolverError):
    code = "solver_failure"


class ShiftOnSpectrum(SolverError):
    code = "shift_on_spectrum"


class BoundaryViolation(InputError):
    code = "boundary_violation"


# front-end
class ConfigParse(InputError):
    code = "config_parse"
