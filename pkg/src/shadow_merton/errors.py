"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ShadowMertonError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ShadowMertonError, ValueError):
    """A model parameter violates its admissible range."""


class ThetaOutOfRange(ParameterError):
    """mu/sigma**2 is not in the open interval (0, 1)."""


class NonpositiveParameter(ParameterError):
    pass


class LambdaOutOfRange(ParameterError):
    pass


class EndowmentError(ParameterError):
    pass


class EndowmentOffMertonLine(EndowmentError):
    """The value expansion is only available for endowments with pi_0 = theta."""


class SeriesError(ShadowMertonError, ValueError):
    """Invalid operation on truncated power series."""


class NoSmoothPastingPoint(ShadowMertonError):
    """Shooting did not find a smooth-pasting point before the cap."""


class BracketingFailed(ShadowMertonError):
    """No sign change of the free-boundary residual on the scanned c-interval."""

    def __init__(self, message: str, scanned: list[tuple[float, float | None]] | None = None):
        super().__init__(message)
        self.scanned = scanned or []


class ToleranceNotMet(ShadowMertonError):
    def __init__(self, message: str, residuals: dict | None = None):
        super().__init__(message)
        self.residuals = residuals or {}


class SingularCombination(ShadowMertonError):
    """The homogeneous solution already satisfies the right Neumann condition."""
