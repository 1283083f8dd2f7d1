"""Spectral toolkit for symmetric barrier billiards: exact transfer operator,
Wiener-Hopf channel couplings, intermediate-statistics random-matrix
ensembles, spacing/form-factor estimators, periodic-orbit machinery, and
secular-equation quantization.
"""

from .errors import (
    BarrierBilliardError,
    IntertwiningError,
    NumericalAbort,
    OpticalBoundaryError,
    PoleProximityError,
    ThresholdError,
    ValidationError,
)
from .transfer_operator import Geometry, ModeSet, UnitarySample, build_mode_set

__all__ = [
    "BarrierBilliardError",
    "ValidationError",
    "ThresholdError",
    "PoleProximityError",
    "IntertwiningError",
    "OpticalBoundaryError",
    "NumericalAbort",
    "Geometry",
    "ModeSet",
    "UnitarySample",
    "build_mode_set",
]

__version__ = "0.1.0"
