"""Extension parameters and triplet tags shared by the Weyl and realization layers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .spectral import check_hermitian


class Triplet(str, Enum):
    """Which boundary triplet a Weyl value or parameter refers to.

    ``BASE`` uses the traces ``f(0), f'(0)``; ``REGULARIZED`` is the
    normalized triplet whose Weyl function equals ``iI`` at ``z = i``.
    """

    BASE = "base"
    REGULARIZED = "regularized"


class Realization(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    KREIN = "krein"
    ROBIN = "robin"


@dataclass(frozen=True, eq=False)
class ExtensionParameter:
    """Either the Dirichlet relation (``matrix is None``) or a Hermitian ``B``.

    A matrix parameter selects the realization with boundary condition
    ``Gamma_1 f = B Gamma_0 f`` in the stated triplet; in the base triplet
    that is the Robin condition ``f'(0) = B f(0)``.
    """

    matrix: Optional[np.ndarray] = None
    triplet: Triplet = Triplet.BASE
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "triplet", Triplet(self.triplet))
        if self.matrix is not None:
            B = check_hermitian(self.matrix, what="extension parameter")
            B.setflags(write=False)
            object.__setattr__(self, "matrix", B)

    @classmethod
    def dirichlet(cls, triplet: Triplet = Triplet.BASE) -> "ExtensionParameter":
        return cls(None, triplet, "dirichlet")

    @classmethod
    def from_matrix(cls, B, triplet: Triplet = Triplet.BASE, label: str = "robin") -> "ExtensionParameter":
        return cls(np.atleast_2d(np.asarray(B, dtype=complex)), triplet, label)

    @property
    def is_dirichlet(self) -> bool:
        return self.matrix is None
