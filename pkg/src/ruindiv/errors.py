"""Exception hierarchy shared across the package.

Every error raised on a bad input or a failed precondition derives from
:class:`RuindivError`, so callers (notably the CLI) can map failures to a
small set of categories without string matching.
"""

from __future__ import annotations

from dataclasses import dataclass


class RuindivError(Exception):
    """Base class for all package errors."""


@dataclass(frozen=True)
class Violation:
    """One violated invariant, reported by :func:`ruindiv.model.validate_model`."""

    code: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}({self.field}): {self.message}"


class ModelValidationError(RuindivError):
    """One or more model/strategy invariants do not hold.

    Carries the full list of violations so a caller sees every problem at
    once rather than the first one only.
    """

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NonPositiveParameter(ModelValidationError):
    """A parameter that must be strictly positive and finite is not."""


class UnorderedThresholds(ModelValidationError):
    """Layer thresholds are not strictly increasing, positive and finite."""


class EmptyRates(ModelValidationError):
    """The dividend strategy carries no rates, or the wrong number of them."""


class NegativeSurplus(RuindivError):
    """A surplus argument was negative where x >= 0 is required."""


class NetProfitViolated(RuindivError):
    """Expected premium income does not strictly exceed expected outflow."""


class NonPositiveDiscriminant(RuindivError):
    """The cubic characteristic equation does not have three distinct real
    roots, so the closed-form dividend solution does not apply."""


class SingularMatrix(RuindivError):
    """A linear system factorization hit an exactly zero pivot."""


class NearSingularWarning(UserWarning):
    """Condition estimate of a solved system exceeds the trust threshold.

    Solving still returns a result; this warning (and the ``near_singular``
    flag on the result) marks it as numerically suspect.
    """


class WrongLayerCount(RuindivError):
    """An operation restricted to a specific layer count got another one."""


class ThresholdPoint(RuindivError):
    """Residual evaluation was requested at (or too close to) a layer
    threshold, where the piecewise equation is two-valued."""


class NonExponentialModel(RuindivError):
    """Closed-form routines require exponential claim and premium sizes."""


class MissingStrategy(RuindivError):
    """The requested operation needs a dividend strategy but the model was
    validated without one."""


class ConfigError(RuindivError):
    """A run configuration file or option set cannot be parsed or is
    inconsistent."""
