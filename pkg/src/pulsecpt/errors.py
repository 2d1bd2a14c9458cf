"""Exception hierarchy.

The CLI maps the three top-level families to distinct exit codes, so every
error raised inside the package derives from one of them.
"""


class PulseCPTError(Exception):
    """Base class for all package errors."""


class ConfigError(PulseCPTError):
    """Bad or missing configuration (unknown key, unknown unit, bad grid)."""


class DataError(PulseCPTError):
    """Physically or numerically invalid input data."""


class DomainError(DataError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InsufficientGasData(DataError):
    def __init__(self, gas: str, field: str):
        self.gas = gas
        self.field = field
        super().__init__(f"insufficient gas data: buffer gas {gas!r} has no value for {field!r}")


class NoInteriorMinimum(DataError):
    pass


class UnsupportedLevelStructure(DataError):
    pass


class NonUniqueSteadyState(DataError):
    pass


class NoResonanceDetected(DataError):
    pass


class DegenerateFit(DataError):
    pass


class NotConverged(PulseCPTError):
    """Raised by the CLI layer when a fit ends with ``converged=False``."""
