"""Extension theory of half-line operators ``-d^2/dx^2 + T`` with matrix ``T``.

Weyl functions, boundary-triplet transforms, Krein resolvent formulas and
spectral-multiplicity tables, with a finite-difference oracle to check them.
"""

from .params import ExtensionParameter, Realization, Triplet
from .spectral import (
    SpectralMeasure,
    apply_function,
    branch_sqrt,
    counting_function,
    from_schrodinger_1d,
    spectral_measure_from_matrix,
    spectrum_edges,
)
from .weyl import (
    HerglotzSample,
    NormalFunctionEstimate,
    boundary_value,
    invariant_max_normal,
    weyl_base,
    weyl_of_extension,
)
from .triplets import (
    BlockModel,
    TripletTransform,
    direct_sum_weyl,
    krein_divergence_check,
    regularize,
    transform_parameter,
    transform_weyl,
)
from .realizations import (
    GridFunction,
    canonical_parameter,
    dirichlet_resolvent_apply,
    gamma_adjoint_apply,
    gamma_apply,
    krein_kernel_basis,
    krein_resolvent_apply,
)
from .multiplicity import (
    AcBand,
    MultiplicityTable,
    Verdict,
    ac_band,
    ac_closure,
    compare_tables,
    multiplicity_table,
    verify_ac_minimality,
)
from .oracle import (
    DiscretizedOperator,
    discretize_halfline,
    discretize_interval,
    energy_identity_check,
    interval_spectrum_formula,
    kato_condition_check,
    oracle_resolvent_apply,
    spectrum,
)

__version__ = "0.1.0"
