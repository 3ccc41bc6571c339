"""Plain-text run configuration, shared by the library and the CLI.

The format is key=value sections::

    [model]
    lambda = 0.1
    lambda_bar = 2.3
    mu = 3
    mu_bar = 0.2

    [strategy]
    thresholds = 5
    rates = 0.05, 0.1

    [discount]
    delta0 = 0
    delta = 0.01

    [penalty]
    kind = constant_one

plus an optional ``[run]`` section carrying command options (grid, paths,
horizon, seed, format, quantities, tolerance), which command-line flags
override. ``dump_config`` emits the effective configuration in the same
format; parsing the dump reproduces the :class:`RunConfig` exactly.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError, NonExponentialModel
from .model import (
    DiscountSpec,
    DividendStrategy,
    JumpDistribution,
    ModelParams,
    PenaltyFunction,
)

DEFAULT_GRID = (0.0, 1.0, 2.0, 5.0, 7.0, 10.0, 15.0, 20.0, 50.0, 70.0)
FORMATS = ("csv", "record")
QUANTITIES = ("ruin", "dividends", "gerber_shiu")


@dataclass(frozen=True)
class RunConfig:
    """Everything one command invocation needs."""

    params: ModelParams
    strategy: Optional[DividendStrategy] = None
    claim_dist: JumpDistribution = field(
        default_factory=lambda: JumpDistribution("exponential", 1.0))
    premium_dist: JumpDistribution = field(
        default_factory=lambda: JumpDistribution("exponential", 1.0))
    discount: DiscountSpec = DiscountSpec()
    penalty: PenaltyFunction = PenaltyFunction()
    grid: tuple[float, ...] = DEFAULT_GRID
    n_paths: int = 10_000
    horizon: float = 3000.0
    seed: int = 0
    out: Optional[str] = None
    fmt: str = "csv"
    tolerance: float = 1e-8
    quantities: tuple[str, ...] = ("ruin", "dividends")

    def require_exponential(self, hint: str) -> None:
        if not (self.claim_dist.is_exponential and self.premium_dist.is_exponential):
            raise NonExponentialModel(
                "closed-form commands require exponential claim and premium "
                f"sizes; use the `{hint}` command for other distributions")


def _get_float(section, key, where, default=None) -> float:
    raw = section.get(key)
    if raw is None:
        if default is not None:
            return default
        raise ConfigError(f"missing key {key!r} in [{where}]")
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{where}] {key} = {raw!r} is not a number") from exc


def parse_float_list(raw: str, what: str) -> tuple[float, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    try:
        return tuple(float(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"{what} must be a comma list of numbers, got {raw!r}") from exc


def _parse_jump(section, prefix: str, mean: float) -> JumpDistribution:
    kind = section.get(f"{prefix}_kind", "exponential").strip()
    if kind not in JumpDistribution.KINDS:
        raise ConfigError(
            f"[model] {prefix}_kind must be one of {JumpDistribution.KINDS}, got {kind!r}")
    shape = None
    if kind == "gamma":
        shape = _get_float(section, f"{prefix}_shape", "model")
    elif f"{prefix}_shape" in section:
        raise ConfigError(f"[model] {prefix}_shape only applies to gamma jumps")
    return JumpDistribution(kind, mean, shape)


_KNOWN_KEYS = {
    "model": {"lambda", "lambda_bar", "mu", "mu_bar",
              "claim_kind", "claim_shape", "premium_kind", "premium_shape"},
    "strategy": {"thresholds", "rates"},
    "discount": {"delta0", "delta"},
    "penalty": {"kind", "threshold", "exponent"},
    "run": {"grid", "n_paths", "horizon", "seed", "format", "tolerance",
            "quantities"},
}


def parse_config_text(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(parser[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")

    if "model" not in parser:
        raise ConfigError("configuration needs a [model] section")
    m = parser["model"]
    params = ModelParams(
        _get_float(m, "lambda", "model"),
        _get_float(m, "lambda_bar", "model"),
        _get_float(m, "mu", "model"),
        _get_float(m, "mu_bar", "model"),
    )
    claim_dist = _parse_jump(m, "claim", params.mu)
    premium_dist = _parse_jump(m, "premium", params.mu_bar)

    strategy = None
    if "strategy" in parser:
        s = parser["strategy"]
        raw_thresholds = s.get("thresholds", "").strip()
        thresholds = parse_float_list(raw_thresholds, "thresholds") \
            if raw_thresholds else ()
        if "rates" not in s:
            raise ConfigError("missing key 'rates' in [strategy]")
        rates = parse_float_list(s["rates"], "rates")
        strategy = DividendStrategy(thresholds, rates)

    discount = DiscountSpec()
    if "discount" in parser:
        d = parser["discount"]
        discount = DiscountSpec(_get_float(d, "delta0", "discount", 0.0),
                                _get_float(d, "delta", "discount", 0.01))
        if discount.delta0 < 0.0:
            raise ConfigError("[discount] delta0 must be non-negative")
        if discount.delta < 0.0:
            raise ConfigError("[discount] delta must be non-negative")

    penalty = PenaltyFunction()
    if "penalty" in parser:
        p = parser["penalty"]
        kind = p.get("kind", "constant_one").strip()
        if kind not in ("constant_one", "deficit_indicator", "deficit_power"):
            raise ConfigError(
                f"[penalty] kind must be declarative (constant_one, "
                f"deficit_indicator, deficit_power), got {kind!r}")
        penalty = PenaltyFunction(kind,
                                  _get_float(p, "threshold", "penalty", 0.0),
                                  _get_float(p, "exponent", "penalty", 1.0))

    cfg = RunConfig(params, strategy, claim_dist, premium_dist, discount, penalty)
    if "run" in parser:
        r = parser["run"]
        updates = {}
        if "grid" in r:
            updates["grid"] = normalize_grid(parse_float_list(r["grid"], "grid"))
        if "n_paths" in r:
            try:
                updates["n_paths"] = int(r["n_paths"])
            except ValueError as exc:
                raise ConfigError(f"[run] n_paths must be an integer") from exc
        if "horizon" in r:
            updates["horizon"] = _get_float(r, "horizon", "run")
        if "seed" in r:
            try:
                updates["seed"] = int(r["seed"])
            except ValueError as exc:
                raise ConfigError(f"[run] seed must be an integer") from exc
        if "format" in r:
            updates["fmt"] = _check_format(r["format"].strip())
        if "tolerance" in r:
            updates["tolerance"] = _get_float(r, "tolerance", "run")
        if "quantities" in r:
            updates["quantities"] = _check_quantities(
                tuple(q.strip() for q in r["quantities"].split(",") if q.strip()))
        cfg = replace(cfg, **updates)
    return cfg


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {fmt!r}")
    return fmt


def _check_quantities(quantities: tuple[str, ...]) -> tuple[str, ...]:
    for q in quantities:
        if q not in QUANTITIES:
            raise ConfigError(f"quantities must be among {QUANTITIES}, got {q!r}")
    if not quantities:
        raise ConfigError("at least one quantity is required")
    return quantities


def normalize_grid(grid: tuple[float, ...]) -> tuple[float, ...]:
    if not grid:
        raise ConfigError("evaluation grid must not be empty")
    for x in grid:
        if not (math.isfinite(x) and x >= 0.0):
            raise ConfigError(f"grid values must be finite and non-negative, got {x}")
    return tuple(sorted(set(grid)))


def make_config(params: ModelParams, **overrides) -> RunConfig:
    """RunConfig with jump laws defaulting to exponentials at the model
    means, as the parser produces."""
    base = RunConfig(
        params,
        claim_dist=JumpDistribution("exponential", params.mu),
        premium_dist=JumpDistribution("exponential", params.mu_bar),
    )
    return replace(base, **overrides) if overrides else base


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path!r}: {exc}") from exc


def _fmt(x: float) -> str:
    return format(x, ".17g")


def dump_config(cfg: RunConfig) -> str:
    """Serialize the effective configuration; parsing the result yields an
    equal :class:`RunConfig` (output path is carried by flags, not dumped)."""
    out = io.StringIO()
    p = cfg.params
    out.write("[model]\n")
    out.write(f"lambda = {_fmt(p.lam)}\n")
    out.write(f"lambda_bar = {_fmt(p.lam_bar)}\n")
    out.write(f"mu = {_fmt(p.mu)}\n")
    out.write(f"mu_bar = {_fmt(p.mu_bar)}\n")
    for prefix, dist in (("claim", cfg.claim_dist), ("premium", cfg.premium_dist)):
        if dist.kind != "exponential":
            out.write(f"{prefix}_kind = {dist.kind}\n")
        if dist.kind == "gamma":
            out.write(f"{prefix}_shape = {_fmt(dist.shape)}\n")
    if cfg.strategy is not None:
        out.write("\n[strategy]\n")
        out.write("thresholds = " + ", ".join(_fmt(b) for b in cfg.strategy.thresholds) + "\n")
        out.write("rates = " + ", ".join(_fmt(d) for d in cfg.strategy.rates) + "\n")
    out.write("\n[discount]\n")
    out.write(f"delta0 = {_fmt(cfg.discount.delta0)}\n")
    out.write(f"delta = {_fmt(cfg.discount.delta)}\n")
    out.write("\n[penalty]\n")
    out.write(f"kind = {cfg.penalty.kind}\n")
    out.write(f"threshold = {_fmt(cfg.penalty.threshold)}\n")
    out.write(f"exponent = {_fmt(cfg.penalty.exponent)}\n")
    out.write("\n[run]\n")
    out.write("grid = " + ", ".join(_fmt(x) for x in cfg.grid) + "\n")
    out.write(f"n_paths = {cfg.n_paths}\n")
    out.write(f"horizon = {_fmt(cfg.horizon)}\n")
    out.write(f"seed = {cfg.seed}\n")
    out.write(f"format = {cfg.fmt}\n")
    out.write(f"tolerance = {_fmt(cfg.tolerance)}\n")
    out.write("quantities = " + ", ".join(cfg.quantities) + "\n")
    return out.getvalue()
