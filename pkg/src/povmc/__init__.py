"""povmc: certified compression, compatibility and steering analysis.

Finite-dimensional toolkit for quantum measurement sets and state
assemblages: exact SDP tests for joint measurability and local hidden state
models (with re-verifiable certificates), depolarizing noise robustness,
constructive conversions between parent models, rank-bounded simulation
models and rank-bounded preparation models, Schmidt-number bounds for
channels via their Choi states, a see-saw search for dimension-bounded
preparations, and a binned position/momentum testbed on truncated oscillator
spaces.
"""

from . import compat, compress, cvlab, linalg, objects, sdp, serialize
from .errors import (DimensionError, DomainError, PovmcError, QuadratureError,
                     StrategyCapError, ValidationError)
from .linalg import BipartiteShape
from .objects import (Assemblage, ChoiMatrix, DensityState, Instrument,
                      KrausChannel, MeasurementSet, PointwiseKrausModel, Povm,
                      validate)

__version__ = "0.1.0"

__all__ = [
    "Assemblage", "BipartiteShape", "ChoiMatrix", "DensityState",
    "DimensionError", "DomainError", "Instrument", "KrausChannel",
    "MeasurementSet", "PointwiseKrausModel", "Povm", "PovmcError",
    "QuadratureError", "StrategyCapError", "ValidationError",
    "compat", "compress", "cvlab", "linalg", "objects", "sdp", "serialize",
    "validate",
]
