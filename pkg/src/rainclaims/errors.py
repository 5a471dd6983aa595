"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes: ConfigError -> 1,
DataError -> 2, FitError -> 3, ModelFormatError -> 4.
"""


class RainclaimsError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RainclaimsError):
    """Invalid configuration value or malformed config file."""


class DataError(RainclaimsError):
    """Malformed or inconsistent input data."""


class FitError(RainclaimsError):
    """Model training failed."""


class SvrConvergenceError(FitError):
    """The dual solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message: str, kkt_violation: float, iterations: int):
        super().__init__(message)
        self.kkt_violation = kkt_violation
        self.iterations = iterations


class AnnDivergenceError(FitError):
    """Network training produced a non-finite loss."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class ModelFormatError(RainclaimsError):
    """Model file is unreadable or has an unsupported format version."""
