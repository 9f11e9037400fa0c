"""
Exception hierarchy shared by the numerical kernels, the scenario runners and the CLI.
"""
from typing import Optional


class QubotError(Exception):
    """Base class for every error raised by qubot_sim."""


# Linear algebra
class LinalgError(QubotError):
    pass


class NotHermitian(LinalgError):
    pass


class NotPSD(LinalgError):
    pass


class Singular(LinalgError):
    pass


class DimensionMismatch(LinalgError):
    pass


# Channel construction
class ChannelError(QubotError):
    pass


class ZeroForgetness(ChannelError):
    pass


class InvalidProbability(ChannelError):
    pass


# Integration and steady states; the CLI exits with status 2 for these
class NumericalFailure(QubotError):
    pass


class InvariantViolated(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class DegenerateSteadyState(NumericalFailure):
    pass


class NotStabilized(NumericalFailure):
    pass


# Configuration and output; the CLI exits with status 1 for these
class ConfigError(QubotError):
    pass


class ParseError(ConfigError):
    """Malformed configuration text."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ConfigError):
    """A configuration value is missing, unknown or out of range."""

    def __init__(self, key: str, message: Optional[str] = None) -> None:
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


class OutputError(ConfigError):
    pass
