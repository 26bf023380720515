"""Fractional Transmission - spectral solver for the mixed fractional problem with conjugation conditions."""

from .exceptions import FractionalTransmissionError
from .processing.config import ProblemConfig, load_config
from .processing.mode_solver import FieldSolution, ModeSolution, solve
from .special.mittag_leffler import MLQuery, MLResult, ml_eval, ml_value

__version__ = "0.1.0"

__all__ = [
    "FieldSolution",
    "FractionalTransmissionError",
    "MLQuery",
    "MLResult",
    "ModeSolution",
    "ProblemConfig",
    "load_config",
    "ml_eval",
    "ml_value",
    "solve",
]
