"""Exception and warning types raised across the package."""
from __future__ import annotations


class ResetSearchError(Exception):
    """Base class for all package errors."""


class ParameterError(ResetSearchError, ValueError):
    """A family or configuration parameter is outside its domain."""


class ParseError(ParameterError):
    """A model file or inline mini-syntax string could not be parsed."""


class AtomAtOrigin(ResetSearchError):
    """The target law puts mass on the starting point."""


class OneSided(ResetSearchError):
    """The target law charges only one half-line."""


class NoClosedForm(ResetSearchError):
    """The rate family has no closed-form harmonic solution."""


class GridTooCoarse(ResetSearchError):
    """The numeric harmonic solution fails its ODE residual check."""


class DomainTooSmall(ResetSearchError):
    """The truncated domain does not reach the asymptotic tail regime."""


class KindMismatch(ResetSearchError):
    """A formula was applied to a harmonic solution of the wrong type."""


class MissingTail(ResetSearchError):
    """A tabulated rate lacks the tail law needed for classification."""


class SingularSystem(ResetSearchError):
    """The boundary-value linear system is numerically singular."""


class InadmissiblePhi(ResetSearchError):
    """A variational candidate is not convex-positive or has the wrong type."""


class InfiniteSample(ResetSearchError):
    """A growth fit was asked to use an infinite hitting time."""


class NonFinite(ResetSearchError):
    """Every probed parameter gives an infinite objective."""


class BoxExhausted(ResetSearchError):
    """The optimizer stopped on the boundary of its search box."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ExcessCensoring(ResetSearchError):
    """Too many Monte Carlo paths reached the time budget."""

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ExcessCensoringWarning(UserWarning):
    """Censoring above threshold; the mean is biased low."""


class ClassifierDisagreement(UserWarning):
    """Tail classification and quadrature disagree on finiteness."""


__all__ = [
    "AtomAtOrigin",
    "BoxExhausted",
    "ClassifierDisagreement",
    "DomainTooSmall",
    "ExcessCensoring",
    "ExcessCensoringWarning",
    "GridTooCoarse",
    "InadmissiblePhi",
    "InfiniteSample",
    "KindMismatch",
    "MissingTail",
    "NoClosedForm",
    "NonFinite",
    "OneSided",
    "ParameterError",
    "ParseError",
    "ResetSearchError",
    "SingularSystem",
]
