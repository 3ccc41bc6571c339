"""Command-line front-end.

Four commands, all driven by a config file plus overriding flags:

* ``solve``     closed-form ruin probability and dividend value
* ``simulate``  Monte Carlo estimates (any supported jump distribution)
* ``table``     three-column report (baseline ruin, layered ruin, dividends)
* ``residual``  equation-defect verification of the closed-form solutions

Exit codes: 0 success, 1 residual tolerance exceeded, 2 configuration
problems, 3 net-profit violation, 4 singular or near-singular linear
system, 5 non-positive cubic discriminant.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import Optional, TextIO

import numpy as np

from . import __version__
from .closed_form import (
    DIVIDEND,
    RUIN,
    PiecewiseSolution,
    dividend_residual,
    eval_piecewise,
    residual_scale,
    ruin_residual,
    solve_dividends,
    solve_ruin,
)
from .config import (
    RunConfig,
    _check_format,
    _check_quantities,
    dump_config,
    load_config,
    normalize_grid,
    parse_float_list,
)
from .errors import (
    ConfigError,
    ModelValidationError,
    NetProfitViolated,
    NonExponentialModel,
    NonPositiveDiscriminant,
    RuindivError,
    SingularMatrix,
)
from .model import no_dividend_ruin, validate_model
from .simulation import (
    dividend_estimate_from,
    gerber_shiu_estimate_from,
    ruin_estimate_from,
    run_paths,
)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_NET_PROFIT = 3
EXIT_SINGULAR = 4
EXIT_DISCRIMINANT = 5

PLOT_POINTS = 256


def _g(x) -> str:
    """Deterministic general-purpose number formatting."""
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_csv(fh: TextIO, header: list[str], rows) -> None:
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(row) + "\n")


def _require_strategy(cfg: RunConfig):
    if cfg.strategy is None:
        raise ConfigError("this command needs a [strategy] section")
    return cfg.strategy


def _check_near_singular(solution: PiecewiseSolution) -> None:
    if solution.near_singular:
        raise SingularMatrix(
            f"condition estimate {solution.condition:.3e} marks the system "
            "near-singular; results are not trustworthy")


def _solve_both(cfg: RunConfig):
    strategy = _require_strategy(cfg)
    if cfg.discount.delta <= 0.0:
        raise ConfigError("valuing dividends needs delta > 0 in [discount]")
    validate_model(cfg.params, strategy)
    psi = solve_ruin(cfg.params, strategy)
    v = solve_dividends(cfg.params, strategy, cfg.discount.delta)
    _check_near_singular(psi)
    _check_near_singular(v)
    return psi, v


def _layer_rows(solution: PiecewiseSolution):
    for entry in solution.to_record()["layers"]:
        for i, z in enumerate(entry["exponents"]):
            raw = entry["raw_coefficients"][i]
            yield [solution.kind, str(entry["layer"]), _g(entry["lower"]),
                   _g(entry["upper"]) if entry["upper"] is not None else "inf",
                   _g(z), _g(entry["scaled_coefficients"][i]),
                   _g(raw) if raw is not None else "overflow",
                   _g(entry["constant"]), _g(solution.condition)]


_LAYER_HEADER = ["kind", "layer", "lower", "upper", "exponent",
                 "scaled_coefficient", "raw_coefficient", "constant",
                 "condition_estimate"]


def _sibling(path: str, suffix: str) -> str:
    stem = path[:-4] if path.endswith(".csv") else path
    return stem + suffix


def cmd_solve(cfg: RunConfig) -> int:
    """Write layer coefficients and grid evaluations of both solutions."""
    cfg.require_exponential("simulate")
    psi, v = _solve_both(cfg)
    if cfg.fmt == "record":
        record = {
            "config": dump_config(cfg),
            "ruin": psi.to_record(),
            "dividends": v.to_record(),
            "grid": [
                {"x": x, "ruin_probability": eval_piecewise(psi, x),
                 "dividend_value": eval_piecewise(v, x)}
                for x in cfg.grid
            ],
        }
        fh, close = _open_out(cfg.out)
        try:
            json.dump(record, fh, indent=2)
            fh.write("\n")
        finally:
            if close:
                fh.close()
        return EXIT_OK
    rows = [[_g(x), _g(eval_piecewise(psi, x)), _g(eval_piecewise(v, x))]
            for x in cfg.grid]
    fh, close = _open_out(cfg.out)
    try:
        _write_csv(fh, ["x", "ruin_probability", "dividend_value"], rows)
    finally:
        if close:
            fh.close()
    # layer details: companion file next to a real output path, stderr otherwise
    layer_rows = list(_layer_rows(psi)) + list(_layer_rows(v))
    if close:
        with open(_sibling(cfg.out, "_layers.csv"), "w", encoding="utf-8",
                  newline="") as lfh:
            _write_csv(lfh, _LAYER_HEADER, layer_rows)
    else:
        _write_csv(sys.stderr, _LAYER_HEADER, layer_rows)
    return EXIT_OK


def _f6(value: float) -> str:
    # snap solver round-off so 6-decimal cells never show negative zero
    return format(0.0 if abs(value) < 5e-13 else value, ".6f")


def cmd_table(cfg: RunConfig) -> int:
    """Three-column table (baseline ruin, layered ruin, dividend value) on
    the grid, six decimals, plus a dense plot-data companion file."""
    cfg.require_exponential("simulate")
    psi, v = _solve_both(cfg)
    rows = [[_g(x),
             _f6(no_dividend_ruin(cfg.params, x)),
             _f6(eval_piecewise(psi, x)),
             _f6(eval_piecewise(v, x))]
            for x in cfg.grid]
    header = ["x", "psi_star", "psi", "v"]
    fh, close = _open_out(cfg.out)
    try:
        _write_csv(fh, header, rows)
    finally:
        if close:
            fh.close()
    if close:
        xs = np.linspace(0.0, max(cfg.grid) if max(cfg.grid) > 0 else 1.0,
                         PLOT_POINTS)
        plot_rows = [[_g(float(x)),
                      _g(no_dividend_ruin(cfg.params, float(x))),
                      _g(eval_piecewise(psi, float(x))),
                      _g(eval_piecewise(v, float(x)))]
                     for x in xs]
        with open(_sibling(cfg.out, "_plot.csv"), "w", encoding="utf-8",
                  newline="") as pfh:
            _write_csv(pfh, header, plot_rows)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    """Monte Carlo estimates per grid point for the configured quantities."""
    if cfg.n_paths < 1:
        raise ConfigError(f"n_paths must be at least 1, got {cfg.n_paths}")
    if cfg.horizon <= 0.0:
        raise ConfigError(f"horizon must be positive, got {cfg.horizon}")
    dividends_on = cfg.strategy is not None
    if "dividends" in cfg.quantities and not dividends_on:
        raise ConfigError("estimating dividends needs a [strategy] section")
    if "dividends" in cfg.quantities and cfg.discount.delta <= 0.0:
        raise ConfigError("valuing dividends needs delta > 0 in [discount]")
    model = validate_model(cfg.params, cfg.strategy, cfg.claim_dist,
                           cfg.premium_dist)
    header = ["x", "quantity", "mean", "std_error", "ci95_low", "ci95_high",
              "n_paths", "horizon", "seed", "censored_fraction",
              "tail_bound", "generator"]
    rows = []
    records = []
    for x in cfg.grid:
        delta = cfg.discount.delta if "dividends" in cfg.quantities else 0.0
        batch = run_paths(model, x, delta=delta, n_paths=cfg.n_paths,
                          horizon=cfg.horizon, seed=cfg.seed,
                          dividends_enabled=dividends_on)
        estimates = {}
        if "ruin" in cfg.quantities:
            estimates["ruin"] = ruin_estimate_from(batch)
        if "dividends" in cfg.quantities:
            estimates["dividends"] = dividend_estimate_from(batch, cfg.strategy)
        if "gerber_shiu" in cfg.quantities:
            estimates["gerber_shiu"] = gerber_shiu_estimate_from(
                batch, cfg.penalty, cfg.discount.delta0)
        for name, est in estimates.items():
            rows.append([_g(x), name, _g(est.mean), _g(est.std_error),
                         _g(est.ci95_low), _g(est.ci95_high),
                         str(est.n_paths), _g(est.horizon), str(est.seed),
                         _g(est.censored_fraction), _g(est.tail_bound),
                         est.generator])
            records.append({"x": x, "quantity": name,
                            **dataclasses.asdict(est)})
    fh, close = _open_out(cfg.out)
    try:
        if cfg.fmt == "record":
            json.dump({"config": dump_config(cfg), "estimates": records},
                      fh, indent=2)
            fh.write("\n")
        else:
            _write_csv(fh, header, rows)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_residual(cfg: RunConfig) -> int:
    """Sample random non-threshold points and report the defect of both
    solved equations; nonzero exit if the relative maximum exceeds the
    configured tolerance."""
    cfg.require_exponential("simulate")
    psi, v = _solve_both(cfg)
    strategy = cfg.strategy
    rng = np.random.default_rng(cfg.seed)
    top = strategy.thresholds[-1] if strategy.thresholds else 0.0
    hi = 2.0 * top + 10.0
    points = []
    while len(points) < 100:
        x = float(rng.uniform(0.0, hi))
        if all(abs(x - b) > 1e-6 for b in strategy.thresholds) and x > 1e-6:
            points.append(x)
    scales = {RUIN: residual_scale(RUIN, cfg.params, strategy),
              DIVIDEND: residual_scale(DIVIDEND, cfg.params, strategy,
                                       cfg.discount.delta)}
    rel = {RUIN: [], DIVIDEND: []}
    for x in points:
        rel[RUIN].append(abs(ruin_residual(cfg.params, strategy, psi, x))
                         / scales[RUIN])
        rel[DIVIDEND].append(
            abs(dividend_residual(cfg.params, strategy, cfg.discount.delta,
                                  v, x)) / scales[DIVIDEND])
    rows = []
    worst = 0.0
    for kind in (RUIN, DIVIDEND):
        values = np.array(rel[kind])
        worst = max(worst, float(values.max()))
        rows.append([kind, str(len(points)), _g(float(values.max())),
                     _g(float(np.median(values))), _g(cfg.tolerance),
                     "pass" if values.max() <= cfg.tolerance else "fail"])
    fh, close = _open_out(cfg.out)
    try:
        _write_csv(fh, ["kind", "n_points", "max_relative_residual",
                        "median_relative_residual", "tolerance", "status"],
                   rows)
    finally:
        if close:
            fh.close()
    return EXIT_OK if worst <= cfg.tolerance else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruindiv",
        description="Ruin probabilities and discounted dividends for a "
                    "risk model with compound-Poisson premiums under a "
                    "layered dividend strategy.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("solve", "closed-form solve (exponential jumps only)"),
        ("simulate", "Monte Carlo estimation"),
        ("table", "baseline/layered ruin and dividend table"),
        ("residual", "verify the solved equations pointwise"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="configuration file")
        p.add_argument("--grid", help="comma list of evaluation points")
        p.add_argument("--paths", type=int, help="Monte Carlo path count")
        p.add_argument("--horizon", type=float, help="simulation horizon")
        p.add_argument("--seed", type=int, help="64-bit seed")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", dest="fmt", choices=["csv", "record"],
                       help="output format")
        p.add_argument("--tolerance", type=float,
                       help="relative residual tolerance")
        p.add_argument("--quantities",
                       help="comma list among ruin,dividends,gerber_shiu")
        p.add_argument("--dump-config", action="store_true",
                       help="print the effective configuration and exit")
    return parser


def _apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    if args.grid is not None:
        updates["grid"] = normalize_grid(parse_float_list(args.grid, "grid"))
    if args.paths is not None:
        updates["n_paths"] = args.paths
    if args.horizon is not None:
        updates["horizon"] = args.horizon
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out"] = args.out
    if args.fmt is not None:
        updates["fmt"] = _check_format(args.fmt)
    if args.tolerance is not None:
        updates["tolerance"] = args.tolerance
    if args.quantities is not None:
        updates["quantities"] = _check_quantities(
            tuple(q.strip() for q in args.quantities.split(",") if q.strip()))
    return dataclasses.replace(cfg, **updates) if updates else cfg


_COMMANDS = {"solve": cmd_solve, "simulate": cmd_simulate,
             "table": cmd_table, "residual": cmd_residual}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(args.config), args)
        if args.dump_config:
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        return _COMMANDS[args.command](cfg)
    except (ConfigError, ModelValidationError, NonExponentialModel) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NetProfitViolated as exc:
        print(f"error: net-profit: {exc}", file=sys.stderr)
        return EXIT_NET_PROFIT
    except SingularMatrix as exc:
        print(f"error: singular: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except NonPositiveDiscriminant as exc:
        print(f"error: discriminant: {exc}", file=sys.stderr)
        return EXIT_DISCRIMINANT
    except (RuindivError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
