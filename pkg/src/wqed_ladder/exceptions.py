"""wQED ladder exceptions.

This module defines all custom exceptions used throughout the wqed-ladder package.
"""

from typing import Optional


class WaveguideRoutingError(Exception):
    """Base exception for all wqed-ladder errors.

    All custom exceptions in this package inherit from this class,
    allowing users to catch all package-specific errors with a single except clause.
    """

    def __init__(self, message: str, cause: Optional[Exception] = None) -> None:
        """Initialize the exception.

        Args:
            message: Human-readable error description.
            cause: Optional underlying exception that caused this error.
        """
        super().__init__(message)
        self.message = message
        self.cause = cause

    def __str__(self) -> str:
        if self.cause:
            return f"{self.message} (caused by: {self.cause})"
        return self.message


class ConfigurationError(WaveguideRoutingError):
    """Raised when there is a configuration error.

    This includes invalid configuration values, unreadable configuration
    files and malformed command-line options.
    """

    pass


class DomainError(WaveguideRoutingError):
    """Raised when a physical parameter lies outside its valid domain.

    Examples are a chain with zero emitters, a non-positive spacing,
    negative decay rates or a dipole separation R <= 0.
    """

    pass


class NumericalError(WaveguideRoutingError):
    """Base class for numerical failures (exit code 2 on the command line)."""

    pass


class SingularSystemError(NumericalError):
    """Raised when the transport equations have no unique solution.

    Only happens at exact real poles, i.e. without any loss or waveguide
    coupling to broaden the emitter resonances.
    """

    pass


class PoleError(NumericalError):
    """Raised when a closed-form expression is evaluated on its pole."""

    pass


class SamplingError(WaveguideRoutingError):
    """Raised when the disorder sampler exhausts its rejection budget."""

    pass


class UndefinedEfficiencyError(WaveguideRoutingError):
    """Raised when the routing efficiency is requested with no transmitted flux."""

    pass


class EnsembleError(WaveguideRoutingError):
    """Raised when a single disorder realization fails.

    Attributes:
        realization_index: Index of the failing realization.
    """

    def __init__(
        self,
        message: str,
        realization_index: int,
        cause: Optional[Exception] = None,
    ) -> None:
        super().__init__(message, cause=cause)
        self.realization_index = realization_index

    def __reduce__(self) -> tuple:
        return (type(self), (self.message, self.realization_index, self.cause))


class ProfilerError(WaveguideRoutingError):
    """Raised when there is an error during run profiling.

    This includes pyinstrument initialization failures,
    sampling errors, or report generation issues.
    """

    pass


class ValidationFailure(WaveguideRoutingError):
    """Raised when one or more validation property suites fail."""

    pass
