"""Jitted batch engine for the dividend-modified surplus process.

One path is driven by the claim clock: claim gaps are exponential with the
claim intensity, and the premium flow inside each gap is either

* aggregated exactly (count from the product form of the Poisson draw, sum
  of sizes in one shot) while the pure-drain lower bound keeps the path
  inside the top layer, where the dividend rate is constant and premiums
  cannot change it, or
* replayed premium by premium with an analytic drain walk through the
  layers (segment-wise discounting, exact drain-to-zero ruin times) while
  the path may touch a threshold.

Both branches sample the same law as the per-event superposition reference
in :mod:`ruindiv.simulation`; the aggregated branch just avoids spending an
event loop on premium arrivals that provably cannot interact with the layer
structure. Everything is deterministic per path: path ``i`` consumes only
counter-based stream ``i`` of the seed (see :mod:`ruindiv.rng`), so results
do not depend on scheduling or on how many threads numba uses.
"""

from __future__ import annotations

import numpy as np
from numba import float64, int64, njit, prange, types, uint64

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_MULT1 = U64(0xBF58476D1CE4E5B9)
_MULT2 = U64(0x94D049BB133111EB)
_U53 = 1.1102230246251565e-16

DIST_EXPONENTIAL = 0
DIST_DETERMINISTIC = 1
DIST_GAMMA = 2

# Explicit unsigned signatures matter: without them a Python-int caller
# would get an int64 specialization, and int64/uint64 mixing promotes to
# float64 inside numba, silently corrupting the bit stream.
_pair = types.Tuple((float64, uint64))


@njit(uint64(uint64), inline="always", cache=True)
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MULT1
    z = (z ^ (z >> U64(27))) * _MULT2
    return z ^ (z >> U64(31))


@njit(uint64(uint64, uint64), inline="always", cache=True)
def _stream_base(seed, idx):
    return _mix64(_mix64(seed) + (idx + U64(1)) * _GAMMA)


@njit(float64(uint64, uint64), inline="always", cache=True)
def _u01(base, ctr):
    # top 53 bits + 1 -> (0, 1], never 0, safe under log
    return ((_mix64(base + (ctr + U64(1)) * _GAMMA) >> U64(11)) + U64(1)) * _U53


@njit(_pair(uint64, uint64), cache=True)
def _standard_normal(base, ctr):
    """Polar method; returns (value, new_counter)."""
    while True:
        v1 = 2.0 * _u01(base, ctr) - 1.0
        ctr += U64(1)
        v2 = 2.0 * _u01(base, ctr) - 1.0
        ctr += U64(1)
        s = v1 * v1 + v2 * v2
        if 0.0 < s < 1.0:
            return v1 * np.sqrt(-2.0 * np.log(s) / s), ctr


@njit(_pair(uint64, uint64, float64, float64), cache=True)
def _gamma_sample(base, ctr, shape, scale):
    """Marsaglia-Tsang gamma draw; returns (value, new_counter)."""
    boost = 1.0
    k = shape
    if k < 1.0:
        u = _u01(base, ctr)
        ctr += U64(1)
        boost = u ** (1.0 / k)
        k += 1.0
    d = k - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    while True:
        zn, ctr = _standard_normal(base, ctr)
        v = 1.0 + c * zn
        if v <= 0.0:
            continue
        v = v * v * v
        u = _u01(base, ctr)
        ctr += U64(1)
        if np.log(u) < 0.5 * zn * zn + d - d * v + d * np.log(v):
            return boost * d * v * scale, ctr


@njit(_pair(uint64, uint64, int64, float64, float64), inline="always", cache=True)
def _jump_size(base, ctr, kind, mean, shape):
    """One jump size; returns (value, new_counter)."""
    if kind == DIST_EXPONENTIAL:
        u = _u01(base, ctr)
        return -mean * np.log(u), ctr + U64(1)
    if kind == DIST_DETERMINISTIC:
        return mean, ctr
    return _gamma_sample(base, ctr, shape, mean / shape)


@njit(_pair(uint64, uint64, float64, int64, float64, float64), cache=True)
def _premium_window(base, ctr, mean_count, kind, mean, shape):
    """Premium inflow over one window with expected count <= 500."""
    thresh = np.exp(-mean_count)
    prod = 1.0
    if kind == DIST_EXPONENTIAL:
        # fold all size uniforms into one log, flushing before underflow
        log_sizes = 0.0
        sprod = 1.0
        while True:
            prod *= _u01(base, ctr)
            ctr += U64(1)
            if prod < thresh:
                break
            sprod *= _u01(base, ctr)
            ctr += U64(1)
            if sprod < 1e-250:
                log_sizes += np.log(sprod)
                sprod = 1.0
        return -mean * (log_sizes + np.log(sprod)), ctr
    total = 0.0
    while True:
        prod *= _u01(base, ctr)
        ctr += U64(1)
        if prod < thresh:
            return total, ctr
        size, ctr = _jump_size(base, ctr, kind, mean, shape)
        total += size


@njit(_pair(uint64, uint64, float64, int64, float64, float64), cache=True)
def _premium_block(base, ctr, mean_count, kind, mean, shape):
    """Total premium inflow over a window with expected count
    ``mean_count``; returns (sum, new_counter).

    Long windows are split into sub-windows of expected count 500 (counts
    over disjoint windows are independent) so the product form of the
    Poisson draw never underflows.
    """
    total = 0.0
    while mean_count > 500.0:
        s, ctr = _premium_window(base, ctr, 500.0, kind, mean, shape)
        total += s
        mean_count -= 500.0
    s, ctr = _premium_window(base, ctr, mean_count, kind, mean, shape)
    return total + s, ctr


@njit(cache=True)
def _simulate_one(x0, horizon, seed, path, lam, lam_bar, delta,
                  claim_kind, claim_mean, claim_shape,
                  prem_kind, prem_mean, prem_shape,
                  thresholds, rates):
    """One full path; returns (ruined, tau, prior, deficit, divs, censored).

    ``rates`` may be a single zero entry, which disables dividends (the
    drain never moves and never ruins).
    """
    k = len(rates)
    top_floor = thresholds[k - 2] if k >= 2 else 0.0
    d_top = rates[k - 1]
    base = _stream_base(U64(seed), U64(path))
    ctr = U64(0)

    t = 0.0
    x = x0
    disc = 1.0
    divs = 0.0
    if x <= 0.0 and rates[0] > 0.0:
        # the drain leaves zero immediately: ruin at time zero, no deficit
        return True, 0.0, 0.0, 0.0, 0.0, False

    while True:
        u = _u01(base, ctr)
        ctr += U64(1)
        end = t - np.log(u) / lam
        if end > horizon:
            end = horizon

        # advance the premium/drain dynamics over (t, end)
        while t < end:
            gap = end - t
            if x >= top_floor and x - d_top * gap >= top_floor:
                # whole gap provably inside the top layer: aggregate premiums
                if d_top > 0.0:
                    if delta > 0.0:
                        shrink = np.exp(-delta * gap)
                        divs += d_top * disc * (1.0 - shrink) / delta
                        disc *= shrink
                    else:
                        divs += d_top * gap
                if end < horizon:
                    s, ctr = _premium_block(base, ctr, lam_bar * gap,
                                            prem_kind, prem_mean, prem_shape)
                    x += s - d_top * gap
                t = end
                break
            # near a boundary: one premium at a time with an exact drain walk
            u = _u01(base, ctr)
            ctr += U64(1)
            nxt = t - np.log(u) / lam_bar
            if nxt > end:
                nxt = end
            rem = nxt - t
            j = k
            for jj in range(k - 1):
                if x < thresholds[jj]:
                    j = jj + 1
                    break
            while rem > 0.0:
                floor = thresholds[j - 2] if j >= 2 else 0.0
                d = rates[j - 1]
                reach = (x - floor) / d if d > 0.0 else np.inf
                seg = reach if reach < rem else rem
                if seg > 0.0:
                    if d > 0.0:
                        if delta > 0.0:
                            shrink = np.exp(-delta * seg)
                            divs += d * disc * (1.0 - shrink) / delta
                            disc *= shrink
                        else:
                            divs += d * seg
                    t += seg
                    rem -= seg
                if reach <= seg:
                    x = floor
                    if j == 1:
                        # drained to zero before any jump: ruin, no deficit
                        return True, t, 0.0, 0.0, divs, False
                    j -= 1
                else:
                    x -= d * seg
                    rem = 0.0
            if nxt < end:
                size, ctr = _jump_size(base, ctr, prem_kind, prem_mean, prem_shape)
                x += size
        if end >= horizon:
            return False, np.inf, 0.0, 0.0, divs, True

        # claim at t == end
        y, ctr = _jump_size(base, ctr, claim_kind, claim_mean, claim_shape)
        if y > x:
            return True, t, x, y - x, divs, False
        x -= y


@njit(parallel=True, cache=True)
def run_batch(n_paths, x0, horizon, seed, lam, lam_bar, delta,
              claim_kind, claim_mean, claim_shape,
              prem_kind, prem_mean, prem_shape,
              thresholds, rates,
              ruined, tau, prior, deficit, divs, censored):
    """Simulate ``n_paths`` independent paths into preallocated arrays.

    Path ``i`` uses stream ``i`` only, so outputs are identical for any
    thread count and inserting extra paths never changes earlier ones.
    """
    for i in prange(n_paths):
        r, t_, p_, df, dv, c_ = _simulate_one(
            x0, horizon, seed, i, lam, lam_bar, delta,
            claim_kind, claim_mean, claim_shape,
            prem_kind, prem_mean, prem_shape, thresholds, rates)
        ruined[i] = 1 if r else 0
        tau[i] = t_
        prior[i] = p_
        deficit[i] = df
        divs[i] = dv
        censored[i] = 1 if c_ else 0
