"""Independent cross-check implementations, deliberately unlike the engine.

``coarse_penalty_estimate`` is a fixed-step (default dt = 1e-3) simulator:
per step it drains at the current layer rate, then fires at most one claim
and one premium with Bernoulli(dt * intensity) probabilities. It is biased
at O(dt) but shares no code or random stream with the event-driven engine.

``first_event_dividends_mc`` estimates the expected discounted dividends
collected strictly before the first jump by drawing the first-event time
directly and integrating the drain segments analytically (numpy RNG,
independent of the engine streams).
"""

from __future__ import annotations

import math

import numpy as np

from ruindiv.model import DividendStrategy, ModelParams
from ruindiv.simulation import drain_schedule


def coarse_penalty_estimate(params: ModelParams, strategy: DividendStrategy,
                            x0: float, penalty, delta0: float, n_paths: int,
                            horizon: float, dt: float = 1e-3,
                            seed: int = 0) -> tuple[float, float]:
    """Fixed-step estimate of E[e^(-delta0 tau) w(prior, deficit); ruin].

    Returns (mean, std_error).
    """
    rng = np.random.default_rng(seed)
    n_steps = int(round(horizon / dt))
    x = np.full(n_paths, float(x0))
    alive = np.ones(n_paths, dtype=bool)
    values = np.zeros(n_paths)
    thresholds = np.asarray(strategy.thresholds)
    rates = np.asarray(strategy.rates)
    p_claim = params.lam * dt
    p_prem = params.lam_bar * dt

    for step in range(n_steps):
        if not alive.any():
            break
        t = step * dt
        # drain at the current layer rate
        idx = np.searchsorted(thresholds, x[alive], side="right")
        x[alive] -= rates[idx] * dt
        drained = alive & (x <= 0.0)
        if drained.any():
            values[drained] = math.exp(-delta0 * t) * float(
                np.asarray(penalty(0.0, 0.0)))
            alive &= ~drained
        u = rng.random(n_paths)
        hits = alive & (u < p_claim)
        if hits.any():
            sizes = rng.exponential(params.mu, int(hits.sum()))
            xs = x[hits]
            over = sizes > xs
            hit_idx = np.nonzero(hits)[0]
            if over.any():
                dead = hit_idx[over]
                values[dead] = np.exp(-delta0 * t) * np.asarray(
                    penalty(xs[over], sizes[over] - xs[over]), dtype=float)
                alive[dead] = False
            x[hit_idx[~over]] -= sizes[~over]
        u2 = rng.random(n_paths)
        prems = alive & (u2 < p_prem)
        if prems.any():
            x[prems] += rng.exponential(params.mu_bar, int(prems.sum()))

    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n_paths))
    return mean, se


def first_event_dividends_mc(params: ModelParams, strategy: DividendStrategy,
                             x: float, delta: float, n_paths: int,
                             seed: int = 0) -> tuple[float, float]:
    """Monte Carlo mean of dividends discounted up to the first jump.

    Draws the first-event time of the superposed process and evaluates the
    discounted drain dividends analytically on [0, min(t1, drain-to-zero)].
    Returns (mean, std_error).
    """
    rng = np.random.default_rng(seed)
    t1 = rng.exponential(1.0 / params.total_rate, n_paths)
    schedule = drain_schedule(strategy, x)
    cut = np.minimum(t1, schedule[-1][1])
    total = np.zeros(n_paths)
    prev = 0.0
    for j, a in schedule:
        hi = np.clip(cut, prev, a)
        total += strategy.rates[j - 1] / delta * (
            np.exp(-delta * prev) - np.exp(-delta * hi))
        prev = a
    mean = float(total.mean())
    se = float(total.std(ddof=1) / math.sqrt(n_paths))
    return mean, se
