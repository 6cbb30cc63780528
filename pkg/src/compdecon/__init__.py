"""Compressive deconvolution of ultrasound RF images.

Recovers a tissue reflectivity image ``x`` from compressed, blurred, noisy
measurements ``y = Phi H x + n`` by minimizing

    ||Psi^-1 H x||_1 + alpha ||x||_p^p + ||y - Phi H x||^2 / (2 mu)

with a simultaneous-direction method of multipliers (:mod:`compdecon.solver`).
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DimensionError, DivergedError, NumericalError,
                     ParameterError, StrategyError)
from .solver import Problem, SolverConfig, solve

__all__ = [
    "ConfigError", "DimensionError", "DivergedError", "NumericalError",
    "ParameterError", "StrategyError", "Problem", "SolverConfig", "solve",
]
