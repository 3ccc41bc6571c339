"""Exact-event Monte Carlo for the dividend-modified surplus process.

Two engines sample the same law:

* :func:`simulate_path` is the readable reference: a per-event loop on the
  superposed jump process (one exponential clock with the combined
  intensity, a Bernoulli mark deciding claim vs premium), with analytic
  drain and per-segment discounting between events. It consumes a single
  :class:`ruindiv.rng.RngStream` and is meant for inspection, small
  studies and cross-checking.
* :func:`run_paths` drives the jitted batch kernel
  (:mod:`ruindiv._kernel`), which walks the claim clock directly and
  aggregates premium arrivals exactly while the path provably stays in the
  top layer. It is what the estimators and the CLI use.

Both discount dividends analytically per linear segment (never
time-stepped), treat a drain that reaches zero as ruin at that instant
with zero surplus-prior and zero deficit, and censor at the horizon
without erring. Estimates reduce path arrays with numpy's pairwise
summation in fixed index order, so results are identical for any worker
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernel
from .errors import MissingStrategy, NegativeSurplus
from .model import (
    DividendStrategy,
    ModelParams,
    PenaltyFunction,
    ValidatedModel,
    Z95,
    layer_index,
)
from .rng import GENERATOR_NAME, RngStream

_DIST_CODE = {"exponential": _kernel.DIST_EXPONENTIAL,
              "deterministic": _kernel.DIST_DETERMINISTIC,
              "gamma": _kernel.DIST_GAMMA}

DEFAULT_HORIZON = 3000.0


@dataclass(frozen=True)
class PathOutcome:
    """Terminal data of one simulated path.

    ``ruin_time`` is ``inf`` unless ruined within the horizon;
    drain-to-zero ruin carries ``surplus_prior == deficit == 0``;
    ``censored`` marks paths that reached the horizon alive.
    """

    ruined: bool
    ruin_time: float
    surplus_prior: float
    deficit: float
    discounted_dividends: float
    censored: bool


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate with provenance.

    ``std_error`` is the sample standard deviation over the square root of
    the path count, and the confidence interval is ``mean +- 1.959964 se``.
    ``censored_fraction`` reports horizon truncation; for dividend
    estimates ``tail_bound`` is the analytic cap ``d_k e^{-delta T}/delta``
    on the censoring bias.
    """

    mean: float
    std_error: float
    ci95_low: float
    ci95_high: float
    n_paths: int
    horizon: float
    seed: int
    censored_fraction: float
    generator: str = GENERATOR_NAME
    tail_bound: Optional[float] = None

    @classmethod
    def from_values(cls, values: np.ndarray, horizon: float, seed: int,
                    censored_fraction: float,
                    tail_bound: Optional[float] = None) -> "Estimate":
        n = len(values)
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, mean - Z95 * se, mean + Z95 * se, n, horizon,
                   seed, censored_fraction, GENERATOR_NAME, tail_bound)


@dataclass(frozen=True)
class PathBatch:
    """Vectorized outcomes of ``n_paths`` independent paths (path ``i`` is
    stream ``i`` of ``seed``)."""

    ruined: np.ndarray
    ruin_time: np.ndarray
    surplus_prior: np.ndarray
    deficit: np.ndarray
    discounted_dividends: np.ndarray
    censored: np.ndarray
    x0: float
    delta: float
    horizon: float
    seed: int

    @property
    def n_paths(self) -> int:
        return len(self.ruined)

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.censored))

    def outcome(self, i: int) -> PathOutcome:
        return PathOutcome(bool(self.ruined[i]), float(self.ruin_time[i]),
                           float(self.surplus_prior[i]), float(self.deficit[i]),
                           float(self.discounted_dividends[i]),
                           bool(self.censored[i]))


def drain_schedule(strategy: DividendStrategy, x: float) -> list[tuple[int, float]]:
    """Crossing times of the pure dividend drain started at ``x``.

    Returns ``[(j, a_j), (j-1, a_{j-1}), ..., (1, a_1)]`` where ``j`` is the
    starting layer, ``a_j = (x - b_{j-1}) / d_j`` is the time to leave it
    downward, each earlier layer adds its width over its rate, and ``a_1``
    is when the drain reaches zero.
    """
    if x < 0.0:
        raise NegativeSurplus(f"surplus must be non-negative, got {x}")
    j = layer_index(strategy, x)
    bounds = strategy.bounds()
    out = []
    t = (x - bounds[j - 1]) / strategy.rates[j - 1]
    out.append((j, t))
    for i in range(j - 1, 0, -1):
        t += (bounds[i] - bounds[i - 1]) / strategy.rates[i - 1]
        out.append((i, t))
    return out


def first_jump_dividends(params: ModelParams, strategy: DividendStrategy,
                         x: float, delta: float) -> float:
    """Expected discounted dividends collected before the first jump of the
    surplus process (the drain-only phase), starting from ``x``:

        sum_i d_i / r * (e^{-r a_{i+1}} - e^{-r a_i}),   r = lam + lam_bar + delta

    over the drain schedule, with the starting layer's upper time taken as
    zero. Returns 0 at ``x = 0``.
    """
    rate = params.total_rate + delta
    if rate <= 0.0:
        raise ValueError("need lam + lam_bar + delta > 0")
    total = 0.0
    prev = 0.0
    for j, a in drain_schedule(strategy, x):
        total += strategy.rates[j - 1] / rate * (
            math.exp(-rate * prev) - math.exp(-rate * a))
        prev = a
    return total


# ---------------------------------------------------------------------------
# Reference per-event engine
# ---------------------------------------------------------------------------

def _drain_segment(strategy, x, duration, t, disc, delta, divs):
    """Advance the drain for ``duration`` (or until zero); returns
    ``(x, t, disc, divs, ruined)`` with per-layer analytic discounting."""
    j = layer_index(strategy, x)
    bounds = strategy.bounds()
    rem = duration
    while rem > 0.0:
        floor = bounds[j - 1]
        d = strategy.rates[j - 1]
        reach = (x - floor) / d if d > 0.0 else math.inf
        seg = min(reach, rem)
        if seg > 0.0:
            if delta > 0.0:
                shrink = math.exp(-delta * seg)
                divs += d * disc * (1.0 - shrink) / delta
                disc *= shrink
            else:
                divs += d * seg
            t += seg
            rem -= seg
        if reach <= seg:
            x = floor
            if j == 1:
                return x, t, disc, divs, True
            j -= 1
        else:
            x -= d * seg
            rem = 0.0
    return x, t, disc, divs, False


def simulate_path(model: ValidatedModel, x0: float, delta: float,
                  horizon: float, stream: RngStream,
                  dividends_enabled: bool = True) -> PathOutcome:
    """Reference event-driven simulation of one path.

    Inter-event times are exponential with the combined intensity
    ``lam + lam_bar``; each event is a claim with probability
    ``lam / (lam + lam_bar)`` and a premium otherwise. Between events the
    surplus drains linearly through the layers; a drain that reaches zero
    before the next event is ruin at that instant with zero prior surplus
    and zero deficit. A claim exceeding the surplus is ruin with the
    recorded pre-claim surplus and overshoot. Reaching the horizon censors
    the path.
    """
    if x0 < 0.0:
        raise NegativeSurplus(f"initial surplus must be non-negative, got {x0}")
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    params = model.params
    strategy = model.strategy if dividends_enabled else None
    if dividends_enabled and strategy is None:
        raise MissingStrategy("model was validated without a dividend strategy")

    t = 0.0
    x = x0
    disc = 1.0
    divs = 0.0
    if strategy is not None and x <= 0.0:
        return PathOutcome(True, 0.0, 0.0, 0.0, 0.0, False)
    p_claim = params.lam / params.total_rate
    while True:
        t_event = t - math.log(stream.next_uniform()) / params.total_rate
        step = min(t_event, horizon) - t
        if strategy is not None:
            x, t, disc, divs, dead = _drain_segment(
                strategy, x, step, t, disc, delta, divs)
            if dead:
                return PathOutcome(True, t, 0.0, 0.0, divs, False)
        else:
            t += step
        if t_event >= horizon:
            return PathOutcome(False, math.inf, 0.0, 0.0, divs, True)
        if stream.next_uniform() < p_claim:
            y = float(model.claim_dist.quantile(stream.next_uniform()))
            if y > x:
                return PathOutcome(True, t, x, y - x, divs, False)
            x -= y
        else:
            x += float(model.premium_dist.quantile(stream.next_uniform()))


# ---------------------------------------------------------------------------
# Batch engine and estimators
# ---------------------------------------------------------------------------

def _dist_args(dist):
    return _DIST_CODE[dist.kind], dist.mean, dist.shape if dist.shape else 1.0


def run_paths(model: ValidatedModel, x0: float, *, delta: float = 0.0,
              n_paths: int, horizon: float = DEFAULT_HORIZON, seed: int = 0,
              dividends_enabled: bool = True) -> PathBatch:
    """Simulate ``n_paths`` independent paths with the batch kernel.

    Results are bit-identical for fixed ``(seed, n_paths, parameters)``
    regardless of thread count, and extending ``n_paths`` preserves the
    outcomes of earlier paths.
    """
    if x0 < 0.0:
        raise NegativeSurplus(f"initial surplus must be non-negative, got {x0}")
    if n_paths < 1:
        raise ValueError(f"n_paths must be at least 1, got {n_paths}")
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    strategy = model.strategy if dividends_enabled else None
    if dividends_enabled and strategy is None:
        raise MissingStrategy("model was validated without a dividend strategy")
    if strategy is not None:
        thresholds = np.asarray(strategy.thresholds, dtype=float)
        rates = np.asarray(strategy.rates, dtype=float)
    else:
        thresholds = np.zeros(0)
        rates = np.zeros(1)

    n = int(n_paths)
    ruined = np.zeros(n, dtype=np.uint8)
    tau = np.zeros(n)
    prior = np.zeros(n)
    deficit = np.zeros(n)
    divs = np.zeros(n)
    censored = np.zeros(n, dtype=np.uint8)
    ck, cm, cs = _dist_args(model.claim_dist)
    pk, pm, ps = _dist_args(model.premium_dist)
    seed64 = np.uint64(int(seed) & ((1 << 64) - 1))
    _kernel.run_batch(n, float(x0), float(horizon), seed64,
                      model.params.lam, model.params.lam_bar, float(delta),
                      ck, cm, cs, pk, pm, ps, thresholds, rates,
                      ruined, tau, prior, deficit, divs, censored)
    tau = np.where(ruined == 1, tau, math.inf)
    return PathBatch(ruined.astype(bool), tau, prior, deficit, divs,
                     censored.astype(bool), float(x0), float(delta),
                     float(horizon), int(seed))


def ruin_estimate_from(batch: PathBatch) -> Estimate:
    """Ruin-indicator mean of a batch; censored paths count as survival."""
    return Estimate.from_values(batch.ruined.astype(float), batch.horizon,
                                batch.seed, batch.censored_fraction)


def dividend_estimate_from(batch: PathBatch,
                           strategy: DividendStrategy) -> Estimate:
    """Discounted-dividend mean of a batch, with the analytic bound on the
    bias a censored path can contribute."""
    tail = strategy.rates[-1] * math.exp(-batch.delta * batch.horizon) / batch.delta
    return Estimate.from_values(batch.discounted_dividends, batch.horizon,
                                batch.seed, batch.censored_fraction, tail)


def gerber_shiu_estimate_from(batch: PathBatch, penalty: PenaltyFunction,
                              delta0: float) -> Estimate:
    """Mean of ``e^{-delta0 tau} w(surplus_prior, deficit)`` over ruined
    paths (0 for surviving or censored paths). Drain-to-zero ruin
    contributes ``e^{-delta0 tau} w(0, 0)``."""
    mask = batch.ruined
    values = np.zeros(batch.n_paths)
    if np.any(mask):
        w = np.asarray(penalty(batch.surplus_prior[mask], batch.deficit[mask]),
                       dtype=float)
        values[mask] = np.exp(-delta0 * batch.ruin_time[mask]) * w
    return Estimate.from_values(values, batch.horizon, batch.seed,
                                batch.censored_fraction)


def estimate_ruin(model: ValidatedModel, x0: float, *, n_paths: int,
                  horizon: float = DEFAULT_HORIZON, seed: int = 0,
                  dividends_enabled: bool = True) -> Estimate:
    """Monte Carlo ruin probability at ``x0`` (finite-horizon, censoring
    reported so truncation bias can be assessed)."""
    batch = run_paths(model, x0, delta=0.0, n_paths=n_paths, horizon=horizon,
                      seed=seed, dividends_enabled=dividends_enabled)
    return ruin_estimate_from(batch)


def estimate_dividends(model: ValidatedModel, x0: float, delta: float, *,
                       n_paths: int, horizon: float = DEFAULT_HORIZON,
                       seed: int = 0) -> Estimate:
    """Monte Carlo expected discounted dividends until ruin at ``x0``."""
    if delta <= 0.0:
        raise ValueError(f"delta must be positive to value dividends, got {delta}")
    if model.strategy is None:
        raise MissingStrategy("model was validated without a dividend strategy")
    batch = run_paths(model, x0, delta=delta, n_paths=n_paths, horizon=horizon,
                      seed=seed)
    return dividend_estimate_from(batch, model.strategy)


def estimate_gerber_shiu(model: ValidatedModel, x0: float,
                         penalty: PenaltyFunction, delta0: float, *,
                         n_paths: int, horizon: float = DEFAULT_HORIZON,
                         seed: int = 0,
                         dividends_enabled: bool = True) -> Estimate:
    """Monte Carlo expected discounted penalty at ruin.

    With the constant-one penalty and ``delta0 = 0`` this reduces exactly
    to :func:`estimate_ruin` on the same seed and path count (identical
    paths, identical value per path).
    """
    if delta0 < 0.0:
        raise ValueError(f"delta0 must be non-negative, got {delta0}")
    batch = run_paths(model, x0, delta=0.0, n_paths=n_paths, horizon=horizon,
                      seed=seed, dividends_enabled=dividends_enabled)
    return gerber_shiu_estimate_from(batch, penalty, delta0)
