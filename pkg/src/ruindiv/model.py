"""Core model types: parameters, dividend strategies, jump-size laws,
penalty functions, validation, and the closed-form no-dividend baseline.

All types are frozen dataclasses, immutable after construction and safe to
share across threads. Construction does not validate; :func:`validate_model`
performs the checks and reports every violated invariant at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaincinv

from .errors import (
    EmptyRates,
    ModelValidationError,
    NegativeSurplus,
    NetProfitViolated,
    NonPositiveParameter,
    UnorderedThresholds,
    Violation,
)

#: z-quantile used for all 95% confidence intervals.
Z95 = 1.959964


@dataclass(frozen=True)
class ModelParams:
    """Jump intensities and mean jump sizes of the surplus process.

    ``lam`` / ``mu`` describe the claim stream (arrival intensity per unit
    time and mean claim size), ``lam_bar`` / ``mu_bar`` the premium stream.
    All four must be strictly positive and finite.
    """

    lam: float
    lam_bar: float
    mu: float
    mu_bar: float

    @property
    def total_rate(self) -> float:
        """Combined jump intensity of the superposed claim+premium stream."""
        return self.lam + self.lam_bar

    @property
    def drift(self) -> float:
        """Expected net inflow per unit time before dividends."""
        return self.lam_bar * self.mu_bar - self.lam * self.mu


@dataclass(frozen=True)
class DividendStrategy:
    """Layered dividend payout: rate ``rates[j-1]`` applies while the surplus
    lies in ``[b_{j-1}, b_j)``, with implied ``b_0 = 0`` and ``b_k = inf``.

    ``thresholds`` holds ``b_1 < ... < b_{k-1}`` (may be empty for a single
    flat layer) and ``rates`` holds ``d_1 ... d_k``, one more entry than
    ``thresholds``.
    """

    thresholds: tuple[float, ...]
    rates: tuple[float, ...]

    def __init__(self, thresholds, rates):
        object.__setattr__(self, "thresholds", tuple(float(b) for b in thresholds))
        object.__setattr__(self, "rates", tuple(float(d) for d in rates))

    @property
    def layer_count(self) -> int:
        return len(self.rates)

    @property
    def max_rate(self) -> float:
        return max(self.rates) if self.rates else 0.0

    def bounds(self) -> tuple[float, ...]:
        """Layer edges ``(0, b_1, ..., b_{k-1}, inf)``."""
        return (0.0,) + self.thresholds + (math.inf,)


@dataclass(frozen=True)
class JumpDistribution:
    """Law of one jump size (claim or premium).

    ``kind`` is one of ``exponential``, ``deterministic`` or ``gamma``;
    ``mean`` is always the distribution mean. For ``gamma``, ``shape`` fixes
    the shape parameter and the scale is derived as ``mean / shape``.
    Samples are non-negative by construction.
    """

    kind: str = "exponential"
    mean: float = 1.0
    shape: Optional[float] = None

    KINDS = ("exponential", "deterministic", "gamma")

    def quantile(self, u):
        """Inverse c.d.f. at ``u`` (scalar or array), used by the reference
        path simulator so one uniform maps to one jump."""
        if self.kind == "exponential":
            return -self.mean * np.log(u)
        if self.kind == "deterministic":
            return np.broadcast_to(np.float64(self.mean), np.shape(u)).copy() \
                if np.ndim(u) else float(self.mean)
        if self.kind == "gamma":
            scale = self.mean / self.shape
            return gammaincinv(self.shape, u) * scale
        raise ValueError(f"unknown jump distribution kind {self.kind!r}")

    @property
    def is_exponential(self) -> bool:
        return self.kind == "exponential"


def exponential_jumps(mean: float) -> JumpDistribution:
    return JumpDistribution("exponential", float(mean))


@dataclass(frozen=True)
class PenaltyFunction:
    """Penalty ``w(surplus_prior, deficit)`` evaluated at ruin.

    Built-in kinds are declarative so they can live in a config file:

    * ``constant_one``: ``w = 1`` (reduces the penalty functional to the
      ruin probability when the interest force is 0);
    * ``deficit_indicator``: ``w = 1`` when ``deficit > threshold``;
    * ``deficit_power``: ``w = deficit ** exponent``.

    Arbitrary callables are accepted through ``custom`` in library code only.
    """

    kind: str = "constant_one"
    threshold: float = 0.0
    exponent: float = 1.0
    custom: Optional[Callable] = field(default=None, compare=False)

    KINDS = ("constant_one", "deficit_indicator", "deficit_power", "custom")

    def __call__(self, surplus_prior, deficit):
        if self.kind == "constant_one":
            return np.ones_like(np.asarray(deficit, dtype=float))
        if self.kind == "deficit_indicator":
            return (np.asarray(deficit, dtype=float) > self.threshold).astype(float)
        if self.kind == "deficit_power":
            return np.asarray(deficit, dtype=float) ** self.exponent
        if self.kind == "custom":
            fn = np.vectorize(self.custom, otypes=[float])
            return fn(surplus_prior, deficit)
        raise ValueError(f"unknown penalty kind {self.kind!r}")


@dataclass(frozen=True)
class DiscountSpec:
    """Interest forces: ``delta0`` discounts the penalty at ruin (>= 0),
    ``delta`` discounts dividend payments (> 0 whenever dividends are
    valued)."""

    delta0: float = 0.0
    delta: float = 0.01


@dataclass(frozen=True)
class ValidatedModel:
    """Parameter/strategy bundle that passed :func:`validate_model`.

    ``strategy`` may be ``None``, in which case the surplus process pays no
    dividends (the baseline model). Jump-size laws default to exponentials
    with the stated means; only those are accepted by the closed-form
    routines.
    """

    params: ModelParams
    strategy: Optional[DividendStrategy]
    claim_dist: JumpDistribution
    premium_dist: JumpDistribution


def _check_positive(name: str, value, violations: list) -> None:
    try:
        ok = math.isfinite(value) and value > 0.0
    except TypeError:
        ok = False
    if not ok:
        violations.append(Violation(
            "non_positive_parameter", name,
            f"must be strictly positive and finite, got {value!r}"))


def validate_model(
    params: ModelParams,
    strategy: Optional[DividendStrategy] = None,
    claim_dist: Optional[JumpDistribution] = None,
    premium_dist: Optional[JumpDistribution] = None,
) -> ValidatedModel:
    """Check every invariant of the inputs and return a validated bundle.

    Raises a :class:`ModelValidationError` carrying *all* violations. When
    every violation is of one kind the raised class is the matching
    subclass (:class:`NonPositiveParameter`, :class:`UnorderedThresholds`,
    :class:`EmptyRates`), which keeps single-fault handling precise.
    """
    violations: list[Violation] = []

    _check_positive("lambda", params.lam, violations)
    _check_positive("lambda_bar", params.lam_bar, violations)
    _check_positive("mu", params.mu, violations)
    _check_positive("mu_bar", params.mu_bar, violations)

    if strategy is not None:
        if len(strategy.rates) == 0:
            violations.append(Violation(
                "empty_rates", "rates", "a strategy needs at least one rate"))
        elif len(strategy.rates) != len(strategy.thresholds) + 1:
            violations.append(Violation(
                "empty_rates", "rates",
                f"need exactly {len(strategy.thresholds) + 1} rates for "
                f"{len(strategy.thresholds)} thresholds, got {len(strategy.rates)}"))
        for i, d in enumerate(strategy.rates):
            _check_positive(f"rates[{i}]", d, violations)
        prev = 0.0
        for i, b in enumerate(strategy.thresholds):
            if not (math.isfinite(b) and b > prev):
                violations.append(Violation(
                    "unordered_thresholds", f"thresholds[{i}]",
                    f"thresholds must satisfy 0 < b_1 < ... < b_k-1 < inf, got {b!r}"))
                break
            prev = b

    cdist = claim_dist if claim_dist is not None else exponential_jumps(params.mu)
    pdist = premium_dist if premium_dist is not None else exponential_jumps(params.mu_bar)
    for label, dist in (("claim_dist", cdist), ("premium_dist", pdist)):
        if dist.kind not in JumpDistribution.KINDS:
            violations.append(Violation(
                "non_positive_parameter", label, f"unknown kind {dist.kind!r}"))
        _check_positive(f"{label}.mean", dist.mean, violations)
        if dist.kind == "gamma":
            _check_positive(f"{label}.shape", dist.shape, violations)

    if violations:
        codes = {v.code for v in violations}
        if codes == {"non_positive_parameter"}:
            raise NonPositiveParameter(violations)
        if codes == {"unordered_thresholds"}:
            raise UnorderedThresholds(violations)
        if codes == {"empty_rates"}:
            raise EmptyRates(violations)
        raise ModelValidationError(violations)

    return ValidatedModel(params, strategy, cdist, pdist)


class NetProfitResult(tuple):
    """``(holds, margin)`` with named access."""

    __slots__ = ()

    def __new__(cls, holds: bool, margin: float):
        return super().__new__(cls, (holds, margin))

    @property
    def holds(self) -> bool:
        return self[0]

    @property
    def margin(self) -> float:
        return self[1]

    def __bool__(self) -> bool:
        return self[0]


def check_net_profit(
    params: ModelParams, strategy: Optional[DividendStrategy] = None
) -> NetProfitResult:
    """Strict net-profit check: expected premium income must exceed expected
    claim outflow plus the largest dividend rate.

    Returns the truth value together with the margin
    ``lam_bar*mu_bar - lam*mu - max_j d_j``; a zero margin fails (the
    inequality is strict). Only the largest rate matters, so permuting the
    rates never changes the answer.
    """
    top = strategy.max_rate if strategy is not None else 0.0
    margin = params.drift - top
    return NetProfitResult(margin > 0.0, margin)


def layer_index(strategy: DividendStrategy, x: float) -> int:
    """1-based index ``j`` of the layer ``[b_{j-1}, b_j)`` containing ``x``.

    Intervals are half-open on the right, so exactly at a threshold the
    upper layer applies: ``layer_index(b_j) == j + 1``.
    """
    if x < 0.0:
        raise NegativeSurplus(f"surplus must be non-negative, got {x}")
    for j, b in enumerate(strategy.thresholds, start=1):
        if x < b:
            return j
    return strategy.layer_count


def no_dividend_ruin(params: ModelParams, x: float) -> float:
    """Ruin probability of the baseline model without dividend payments.

    Closed form for exponential claim and premium sizes:

        psi*(x) = [lam (mu + mu_bar) / (mu_bar (lam + lam_bar))]
                  * exp(-(lam_bar mu_bar - lam mu) x / (mu mu_bar (lam + lam_bar)))

    Requires the no-dividend net-profit condition ``lam_bar mu_bar > lam mu``.
    """
    if x < 0.0:
        raise NegativeSurplus(f"surplus must be non-negative, got {x}")
    if params.drift <= 0.0:
        raise NetProfitViolated(
            f"need lam_bar*mu_bar > lam*mu, margin is {params.drift}")
    coeff = params.lam * (params.mu + params.mu_bar) / (
        params.mu_bar * params.total_rate)
    rate = params.drift / (params.mu * params.mu_bar * params.total_rate)
    return coeff * math.exp(-rate * x)
