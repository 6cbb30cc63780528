"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operand shapes do not match an operator's grid or dimensions."""


class ParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


class StrategyError(ValueError):
    """The requested v3 update strategy does not apply to the operator."""


class ConfigError(ValueError):
    """A run configuration is malformed or references unknown keys."""


class NumericalError(ArithmeticError):
    """A non-finite value appeared during an iterative computation."""

    def __init__(self, message, iteration=None, state=None):
        super().__init__(message)
        self.iteration = iteration
        self.state = state


class DivergedError(NumericalError):
    """The SDMM iterate became non-finite; ``state`` is the last finite one."""
