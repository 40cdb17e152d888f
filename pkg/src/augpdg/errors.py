"""Exception types shared across the package."""


class AugPdgError(Exception):
    """Base class for solver-specific failures."""


class ProblemFormatError(ValueError):
    """A problem file could not be parsed or fails validation."""


class NumericError(AugPdgError):
    """Non-finite values or divergence encountered during iteration.

    Attributes
    ----------
    iteration : int or None
        Iteration index at which the failure was detected.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class CertificateError(AugPdgError):
    """A rate certificate cannot be assembled (LICQ failure, nonpositive
    constant, or fixed-point non-convergence)."""
