#!/usr/bin/env python3
"""Cross-validate the closed-form solutions against the Monte Carlo engine.

For each requested starting surplus, solves the ruin probability and the
dividend value analytically, simulates the same quantities, and prints the
agreement in standard-error units.

Usage:
    python scripts/closed_form_vs_mc.py --paths 100000 --x0 0,1,5,10,20
"""

import argparse
import sys
import time

from ruindiv.closed_form import eval_piecewise, solve_dividends, solve_ruin
from ruindiv.model import DividendStrategy, ModelParams, validate_model
from ruindiv.simulation import dividend_estimate_from, ruin_estimate_from, run_paths


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=100_000)
    parser.add_argument("--horizon", type=float, default=3000.0)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--delta", type=float, default=0.01)
    parser.add_argument("--x0", default="0,1,5,10,20")
    parser.add_argument("--thresholds", default="5")
    parser.add_argument("--rates", default="0.05,0.1")
    args = parser.parse_args()

    params = ModelParams(0.1, 2.3, 3.0, 0.2)
    strategy = DividendStrategy(
        tuple(float(b) for b in args.thresholds.split(",") if b),
        tuple(float(d) for d in args.rates.split(",")))
    model = validate_model(params, strategy)
    psi = solve_ruin(params, strategy)
    v = solve_dividends(params, strategy, args.delta)

    print(f"{'x0':>6} {'quantity':>10} {'closed form':>12} {'monte carlo':>12} "
          f"{'std err':>10} {'z':>6}")
    t0 = time.perf_counter()
    worst = 0.0
    for raw in args.x0.split(","):
        x0 = float(raw)
        batch = run_paths(model, x0, delta=args.delta, n_paths=args.paths,
                          horizon=args.horizon, seed=args.seed + int(x0))
        for name, est, target in (
            ("ruin", ruin_estimate_from(batch), eval_piecewise(psi, x0)),
            ("dividends", dividend_estimate_from(batch, strategy),
             eval_piecewise(v, x0)),
        ):
            z = abs(est.mean - target) / est.std_error if est.std_error else 0.0
            worst = max(worst, z)
            print(f"{x0:6.1f} {name:>10} {target:12.6f} {est.mean:12.6f} "
                  f"{est.std_error:10.6f} {z:6.2f}")
    print(f"worst |z| = {worst:.2f}  ({time.perf_counter() - t0:.1f}s)")
    return 0 if worst <= 4.0 else 1


if __name__ == "__main__":
    sys.exit(main())
