"""Ruin probabilities, penalty functionals and discounted dividends for a
risk model with compound-Poisson premiums and a layered dividend strategy.

Closed-form solutions (exponential jump sizes) live in
:mod:`ruindiv.closed_form`; the exact-event Monte Carlo engine in
:mod:`ruindiv.simulation`; model types and validation in
:mod:`ruindiv.model`. The ``ruindiv`` command line fronts all of it.
"""

from .closed_form import (
    LinearSystem,
    PiecewiseSolution,
    RootSet,
    assemble_dividend_system,
    assemble_ruin_system,
    dividend_cubic_roots,
    dividend_residual,
    eval_derivative,
    eval_piecewise,
    ruin_quadratic_roots,
    ruin_residual,
    solve_dense,
    solve_dividends,
    solve_ruin,
    two_layer_delta,
)
from .model import (
    DiscountSpec,
    DividendStrategy,
    JumpDistribution,
    ModelParams,
    PenaltyFunction,
    ValidatedModel,
    check_net_profit,
    layer_index,
    no_dividend_ruin,
    validate_model,
)
from .simulation import (
    Estimate,
    PathBatch,
    PathOutcome,
    drain_schedule,
    estimate_dividends,
    estimate_gerber_shiu,
    estimate_ruin,
    first_jump_dividends,
    run_paths,
    simulate_path,
)

__version__ = "0.1.0"

__all__ = [
    "DiscountSpec",
    "DividendStrategy",
    "Estimate",
    "JumpDistribution",
    "LinearSystem",
    "ModelParams",
    "PathBatch",
    "PathOutcome",
    "PenaltyFunction",
    "PiecewiseSolution",
    "RootSet",
    "ValidatedModel",
    "__version__",
    "assemble_dividend_system",
    "assemble_ruin_system",
    "check_net_profit",
    "dividend_cubic_roots",
    "dividend_residual",
    "drain_schedule",
    "estimate_dividends",
    "estimate_gerber_shiu",
    "estimate_ruin",
    "eval_derivative",
    "eval_piecewise",
    "first_jump_dividends",
    "layer_index",
    "no_dividend_ruin",
    "ruin_quadratic_roots",
    "ruin_residual",
    "run_paths",
    "simulate_path",
    "solve_dense",
    "solve_dividends",
    "solve_ruin",
    "two_layer_delta",
    "validate_model",
]
