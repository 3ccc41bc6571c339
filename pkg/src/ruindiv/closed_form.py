"""Closed-form piecewise-exponential solutions for exponential jump sizes.

On each layer ``[b_{j-1}, b_j)`` the ruin probability solves a linear ODE
with constant coefficients, so it is a combination of two exponentials plus
a constant; the dividend value uses three exponentials plus ``d_j / delta``.
The exponents are characteristic roots (quadratic for ruin, cubic for
dividends) and the coefficients come from a dense ``(3k-1) x (3k-1)`` linear
system built from the boundary form of the integro-differential equation at
each layer anchor, the value at zero, and derivative-pasting/continuity
conditions at the thresholds.

Numerics
--------
Everything is expressed in a per-layer *scaled* basis
``exp(z * (x - b_{j-1}))``: raw-basis constants can overflow double
precision by dozens of orders of magnitude, while scaled coefficients stay
moderate. Matrix entries combine all exponents analytically before a single
``exp`` so no intermediate factor overflows, rows are equilibrated before
LU factorization with partial pivoting, and a 1-norm condition estimate is
attached to every solution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgWarning, get_lapack_funcs, lu_factor, lu_solve

from .errors import (
    NearSingularWarning,
    NegativeSurplus,
    NetProfitViolated,
    NonPositiveDiscriminant,
    SingularMatrix,
    ThresholdPoint,
    WrongLayerCount,
)
from .model import DividendStrategy, ModelParams, check_net_profit, layer_index

#: condition-estimate threshold beyond which a solve is flagged near-singular
NEAR_SINGULAR_LIMIT = 1e12

#: distance from a threshold below which residual evaluation refuses to run
THRESHOLD_EPS = 1e-9

RUIN = "ruin"
DIVIDEND = "dividend"


# ---------------------------------------------------------------------------
# Characteristic roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootSet:
    """Real characteristic roots of one layer, sorted ascending, together
    with the discriminant that certifies they are real and distinct."""

    exponents: tuple[float, ...]
    discriminant: float


def ruin_quadratic_roots(params: ModelParams, d: float) -> RootSet:
    """Both (strictly negative) roots of the ruin characteristic quadratic

        d mu mu_bar z^2 + (d (mu_bar - mu) + mu mu_bar (lam + lam_bar)) z
            + (lam_bar mu_bar - lam mu - d) = 0

    for a layer with dividend rate ``d``. The discriminant is evaluated in
    the cancellation-free sum-of-squares form
    ``(d (mu + mu_bar) + mu mu_bar (lam - lam_bar))^2
    + 4 lam lam_bar mu^2 mu_bar^2``; the larger-magnitude root is computed
    first and the other recovered from the product, which avoids the
    near-cancellation of the textbook formula.
    """
    lam, lam_bar, mu, mu_bar = params.lam, params.lam_bar, params.mu, params.mu_bar
    a = d * mu * mu_bar
    b = d * (mu_bar - mu) + mu * mu_bar * (lam + lam_bar)
    c = lam_bar * mu_bar - lam * mu - d
    if c <= 0.0:
        raise NetProfitViolated(
            f"net profit margin for rate {d} is {c}; closed form needs it positive")
    disc = (d * (mu + mu_bar) + mu * mu_bar * (lam - lam_bar)) ** 2 \
        + 4.0 * lam * lam_bar * mu ** 2 * mu_bar ** 2
    # b > 0 whenever c > 0, so -(b + sqrt(disc)) never cancels
    z_low = -(b + math.sqrt(disc)) / (2.0 * a)
    z_high = (c / a) / z_low
    return RootSet((z_low, z_high), disc)


def cubic_discriminant(params: ModelParams, d: float, delta: float) -> float:
    """Discriminant of the dividend characteristic cubic for rate ``d``."""
    lam, lam_bar, mu, mu_bar = params.lam, params.lam_bar, params.mu, params.mu_bar
    p2 = d * (mu_bar - mu) + mu * mu_bar * (lam + lam_bar + delta)
    p1 = mu_bar * (lam_bar + delta) - mu * (lam + delta) - d
    a = d * mu * mu_bar
    return (
        -18.0 * delta * a * p2 * p1
        + 4.0 * delta * p2 ** 3
        + p2 ** 2 * p1 ** 2
        - 4.0 * a * p1 ** 3
        - 27.0 * (delta * a) ** 2
    )


def dividend_cubic_roots(params: ModelParams, d: float, delta: float) -> RootSet:
    """Three distinct real roots of the dividend characteristic cubic

        d mu mu_bar z^3 + (d (mu_bar - mu) + mu mu_bar (lam + lam_bar + delta)) z^2
            + (mu_bar (lam_bar + delta) - mu (lam + delta) - d) z - delta = 0.

    Solved by the trigonometric method on the depressed cubic (valid exactly
    when the discriminant is positive, which also guarantees realness) and
    polished with two Newton steps, reaching relative residuals below 1e-13.
    Raises :class:`NonPositiveDiscriminant` when the hypothesis fails.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    lam, lam_bar, mu, mu_bar = params.lam, params.lam_bar, params.mu, params.mu_bar
    a = d * mu * mu_bar
    b = d * (mu_bar - mu) + mu * mu_bar * (lam + lam_bar + delta)
    c = mu_bar * (lam_bar + delta) - mu * (lam + delta) - d
    e = -delta
    disc = cubic_discriminant(params, d, delta)
    if disc <= 0.0:
        raise NonPositiveDiscriminant(
            f"cubic discriminant is {disc} for rate {d}, delta {delta}; "
            "three distinct real roots are required")

    # depressed cubic t^3 + p t + q with z = t - b / (3a); disc > 0 forces p < 0
    p = (3.0 * a * c - b * b) / (3.0 * a * a)
    q = (2.0 * b ** 3 - 9.0 * a * b * c + 27.0 * a * a * e) / (27.0 * a ** 3)
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    theta = math.acos(min(1.0, max(-1.0, arg)))
    shift = b / (3.0 * a)
    roots = [m * math.cos((theta - 2.0 * math.pi * i) / 3.0) - shift for i in range(3)]

    def polish(z: float) -> float:
        for _ in range(2):
            f = ((a * z + b) * z + c) * z + e
            fp = (3.0 * a * z + 2.0 * b) * z + c
            if fp != 0.0:
                z -= f / fp
        return z

    roots = sorted(polish(z) for z in roots)
    if not roots[0] < roots[1] < roots[2]:
        raise NonPositiveDiscriminant(
            f"cubic roots did not separate for rate {d}, delta {delta}: {roots}")
    return RootSet(tuple(roots), disc)


# ---------------------------------------------------------------------------
# Linear system assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearSystem:
    """Dense system determining the scaled layer coefficients.

    ``row_labels`` names the condition family each row encodes
    (``("boundary", j)`` for the integro-differential equation at anchor
    ``b_{j-1}``, ``("initial",)`` for the value at zero,
    ``("pasting", j)`` / ``("continuity", j)`` for the threshold
    conditions); ``col_labels`` identifies each unknown as
    ``(layer, "exp", i)`` for a scaled exponential coefficient or
    ``(layer, "const")`` for a layer constant.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    row_labels: tuple[tuple, ...]
    col_labels: tuple[tuple, ...]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def _exp(arg: float) -> float:
    """exp with -inf arguments mapping cleanly to 0 and no overflow above
    the double range (layer widths may be infinite)."""
    if arg == -math.inf:
        return 0.0
    if arg > 709.0:
        return math.inf
    return math.exp(arg)


def _layer_roots(params, strategy, delta: Optional[float]) -> list[tuple[float, ...]]:
    """Per-layer exponents that carry unknown coefficients.

    Ruin (``delta is None``): both negative quadratic roots everywhere.
    Dividend: all three cubic roots on interior layers; on the top layer the
    positive root's coefficient is structurally zero, so only the two
    negative roots are kept.
    """
    k = strategy.layer_count
    roots = []
    for j in range(1, k + 1):
        d = strategy.rates[j - 1]
        if delta is None:
            roots.append(ruin_quadratic_roots(params, d).exponents)
        else:
            zs = dividend_cubic_roots(params, d, delta).exponents
            if zs[2] <= 0.0 or zs[1] >= 0.0:
                raise NonPositiveDiscriminant(
                    f"expected one positive and two negative roots, got {zs}")
            roots.append(zs[:2] if j == k else zs)
    return roots


def _column_layout(roots, k: int, with_consts: bool):
    """Column labels plus a lookup from label to column index."""
    labels = []
    for j in range(1, k + 1):
        for i in range(len(roots[j - 1])):
            labels.append((j, "exp", i))
        if with_consts and j < k:
            labels.append((j, "const"))
    index = {lab: pos for pos, lab in enumerate(labels)}
    return tuple(labels), index


def _assemble(params: ModelParams, strategy: DividendStrategy,
              delta: Optional[float]) -> LinearSystem:
    """Shared assembly for the ruin (``delta is None``) and dividend systems.

    All exponentials are expressed in the per-layer scaled basis
    ``exp(z (x - b_{j-1}))``; every matrix entry folds its row prefactor
    into the exponent before exponentiating, so each entry is a sum of
    ``exp`` of non-positive (or mildly positive) arguments.
    """
    ok, margin = check_net_profit(params, strategy)
    if not ok:
        raise NetProfitViolated(
            f"net profit margin is {margin}; must be strictly positive")
    lam, lam_bar, mu, mu_bar = params.lam, params.lam_bar, params.mu, params.mu_bar
    k = strategy.layer_count
    b = strategy.bounds()
    rates = strategy.rates
    ruin = delta is None
    total = lam + lam_bar + (0.0 if ruin else delta)

    roots = _layer_roots(params, strategy, delta)
    col_labels, col = _column_layout(roots, k, with_consts=ruin)
    n = 3 * k - 1
    if len(col_labels) != n:
        raise AssertionError(f"column layout has {len(col_labels)} != {n} unknowns")
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    row_labels: list[tuple] = []

    # boundary form of the integro-differential equation at each anchor
    for j in range(1, k + 1):
        row = j - 1
        row_labels.append(("boundary", j))
        p = b[j - 1]
        d_j = rates[j - 1]
        # layers fully below the anchor enter through the claim-side integral
        for l in range(1, j):
            for i, z in enumerate(roots[l - 1]):
                A[row, col[(l, "exp", i)]] = lam / (mu * z + 1.0) * (
                    _exp(z * (b[l] - b[l - 1]) + (b[l] - p) / mu)
                    - _exp((b[l - 1] - p) / mu))
            if ruin:
                A[row, col[(l, "const")]] = lam * (
                    _exp((b[l] - p) / mu) - _exp((b[l - 1] - p) / mu))
        # the anchored layer itself
        for i, z in enumerate(roots[j - 1]):
            w = b[j] - b[j - 1]
            upper = _exp((z - 1.0 / mu_bar) * w) if w != math.inf else 0.0
            A[row, col[(j, "exp", i)]] = (
                lam_bar / (mu_bar * z - 1.0) * (upper - 1.0) - (d_j * z + total))
        if ruin and j < k:
            A[row, col[(j, "const")]] = -(lam_bar * _exp(-(b[j] - p) / mu_bar) + lam)
        # layers above the anchor enter through the premium-side integral
        for l in range(j + 1, k + 1):
            for i, z in enumerate(roots[l - 1]):
                up = z * (b[l] - b[l - 1]) - (b[l] - p) / mu_bar
                A[row, col[(l, "exp", i)]] = lam_bar / (mu_bar * z - 1.0) * (
                    _exp(up) - _exp(-(b[l - 1] - p) / mu_bar))
            if ruin and l < k:
                A[row, col[(l, "const")]] = -lam_bar * (
                    _exp(-(b[l] - p) / mu_bar) - _exp(-(b[l - 1] - p) / mu_bar))
        if ruin:
            rhs[row] = -lam * _exp(-p / mu)
        else:
            acc = rates[j - 1] * (lam + lam_bar) / delta
            for l in range(1, j):
                acc -= lam / delta * rates[l - 1] * (
                    _exp((b[l] - p) / mu) - _exp((b[l - 1] - p) / mu))
            for l in range(j, k + 1):
                acc += lam_bar / delta * rates[l - 1] * (
                    _exp(-(b[l] - p) / mu_bar) - _exp(-(b[l - 1] - p) / mu_bar))
            rhs[row] = acc

    # value at zero: layer-1 anchors at 0, so scaled == raw coefficients
    row = k
    row_labels.append(("initial",))
    for i in range(len(roots[0])):
        A[row, col[(1, "exp", i)]] = 1.0
    if ruin:
        if k > 1:  # single-layer case: layer 1 is the top layer, constant 0
            A[row, col[(1, "const")]] = 1.0
        rhs[row] = 1.0
    else:
        rhs[row] = -rates[0] / delta

    # derivative pasting at each threshold
    for j in range(1, k):
        row = k + j
        row_labels.append(("pasting", j))
        w = b[j] - b[j - 1]
        for i, z in enumerate(roots[j - 1]):
            A[row, col[(j, "exp", i)]] = rates[j - 1] * z * _exp(z * w)
        for i, z in enumerate(roots[j]):
            A[row, col[(j + 1, "exp", i)]] = -rates[j] * z
        rhs[row] = 0.0 if ruin else rates[j - 1] - rates[j]

    # continuity at each threshold
    for j in range(1, k):
        row = 2 * k - 1 + j
        row_labels.append(("continuity", j))
        w = b[j] - b[j - 1]
        for i, z in enumerate(roots[j - 1]):
            A[row, col[(j, "exp", i)]] = _exp(z * w)
        for i in range(len(roots[j])):
            A[row, col[(j + 1, "exp", i)]] = -1.0
        if ruin:
            A[row, col[(j, "const")]] = 1.0
            if j + 1 < k:
                A[row, col[(j + 1, "const")]] = -1.0
            rhs[row] = 0.0
        else:
            rhs[row] = (rates[j] - rates[j - 1]) / delta

    return LinearSystem(A, rhs, tuple(row_labels), col_labels)


def assemble_ruin_system(params: ModelParams,
                         strategy: DividendStrategy) -> LinearSystem:
    """Build the ``(3k-1)``-dimensional system for the scaled ruin
    coefficients: one boundary row per layer anchor, the value-one row at
    zero, and derivative-pasting plus continuity rows at each threshold.
    The top layer carries no constant column (its constant is zero). For
    ``k = 1`` this degenerates to a 2x2 system."""
    return _assemble(params, strategy, None)


def assemble_dividend_system(params: ModelParams, strategy: DividendStrategy,
                             delta: float) -> LinearSystem:
    """Dividend-value analogue of :func:`assemble_ruin_system`: three
    exponential columns per interior layer, two on the top layer, no
    constant columns (layer constants are the known ``d_j / delta``), and
    rate-jump source terms on the right-hand side."""
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    return _assemble(params, strategy, delta)


# ---------------------------------------------------------------------------
# Dense solve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolveResult:
    solution: np.ndarray
    condition: float
    near_singular: bool


def solve_dense(system: LinearSystem) -> SolveResult:
    """Row-equilibrate, LU-factorize with partial pivoting, and solve.

    Returns the solution with a 1-norm condition estimate of the
    equilibrated matrix. An exactly zero pivot raises
    :class:`SingularMatrix`; a condition estimate above
    ``NEAR_SINGULAR_LIMIT`` flags (and warns) ``near_singular`` but still
    returns the result.
    """
    A = np.array(system.matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"system must be square, got shape {A.shape}")
    rhs = np.array(system.rhs, dtype=float)
    scale = np.max(np.abs(A), axis=1)
    if np.any(scale == 0.0):
        raise SingularMatrix("system has an all-zero row")
    A /= scale[:, None]
    rhs = rhs / scale
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A)
    if np.any(np.diag(lu) == 0.0):
        raise SingularMatrix("factorization produced an exactly zero pivot")
    x = lu_solve((lu, piv), rhs)

    gecon = get_lapack_funcs(("gecon",), (lu,))[0]
    anorm = np.linalg.norm(A, 1)
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:  # pragma: no cover - invalid argument only
        raise RuntimeError(f"condition estimator failed with info={info}")
    condition = math.inf if rcond == 0.0 else 1.0 / float(rcond)
    near = condition > NEAR_SINGULAR_LIMIT
    if near:
        warnings.warn(
            f"condition estimate {condition:.3e} exceeds {NEAR_SINGULAR_LIMIT:.0e}",
            NearSingularWarning, stacklevel=2)
    return SolveResult(x, condition, near)


# ---------------------------------------------------------------------------
# Piecewise solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolutionLayer:
    """One layer of a piecewise solution, in the scaled basis

        f(x) = sum_i coefficients[i] * exp(exponents[i] * (x - lower)) + constant

    valid on ``[lower, upper)``.
    """

    lower: float
    upper: float
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]
    constant: float

    def value(self, x: float) -> float:
        s = self.constant
        for c, z in zip(self.coefficients, self.exponents):
            s += c * _exp(z * (x - self.lower))
        return s

    def derivative(self, x: float) -> float:
        s = 0.0
        for c, z in zip(self.coefficients, self.exponents):
            s += c * z * _exp(z * (x - self.lower))
        return s

    def raw_coefficients(self) -> tuple[Optional[float], ...]:
        """Unscaled-basis coefficients ``c * exp(-z * lower)``; ``None``
        where the conversion overflows double precision."""
        out = []
        for c, z in zip(self.coefficients, self.exponents):
            arg = -z * self.lower
            out.append(c * math.exp(arg) if arg <= 709.0 else None)
        return tuple(out)


@dataclass(frozen=True)
class PiecewiseSolution:
    """Solved ruin probability or dividend value, one record per layer,
    plus the condition estimate of the system it came from."""

    kind: str
    layers: tuple[SolutionLayer, ...]
    condition: float
    near_singular: bool = False

    def layer_for(self, x: float) -> SolutionLayer:
        if x < 0.0:
            raise NegativeSurplus(f"surplus must be non-negative, got {x}")
        for layer in self.layers:
            if x < layer.upper:
                return layer
        return self.layers[-1]

    @property
    def thresholds(self) -> tuple[float, ...]:
        return tuple(layer.upper for layer in self.layers[:-1])

    @property
    def limit_at_infinity(self) -> float:
        return self.layers[-1].constant

    def to_record(self) -> dict:
        """Serializable description: per-layer anchors, exponents, scaled
        and raw-basis coefficients (raw omitted where not finite), constant
        terms, and the condition estimate."""
        return {
            "kind": self.kind,
            "condition_estimate": self.condition,
            "near_singular": self.near_singular,
            "layers": [
                {
                    "layer": j + 1,
                    "lower": layer.lower,
                    "upper": None if layer.upper == math.inf else layer.upper,
                    "exponents": list(layer.exponents),
                    "scaled_coefficients": list(layer.coefficients),
                    "raw_coefficients": list(layer.raw_coefficients()),
                    "constant": layer.constant,
                }
                for j, layer in enumerate(self.layers)
            ],
        }


def _extract(kind, system, result, roots, strategy, delta) -> PiecewiseSolution:
    k = strategy.layer_count
    b = strategy.bounds()
    col = {lab: pos for pos, lab in enumerate(system.col_labels)}
    layers = []
    for j in range(1, k + 1):
        zs = roots[j - 1]
        coeffs = tuple(float(result.solution[col[(j, "exp", i)]])
                       for i in range(len(zs)))
        if kind == RUIN:
            const = float(result.solution[col[(j, "const")]]) if j < k else 0.0
        else:
            const = strategy.rates[j - 1] / delta
        layers.append(SolutionLayer(b[j - 1], b[j], zs, coeffs, const))
    return PiecewiseSolution(kind, tuple(layers), result.condition,
                             result.near_singular)


def solve_ruin(params: ModelParams, strategy: DividendStrategy) -> PiecewiseSolution:
    """Ruin probability under the layered dividend strategy.

    Composes root finding, system assembly and the dense solve. The top
    layer's constant is structurally zero (its column is absent), which
    encodes the decay of the ruin probability at infinity; the value-one
    condition at zero is a solved row.
    """
    system = _assemble(params, strategy, None)
    roots = _layer_roots(params, strategy, None)
    return _extract(RUIN, system, solve_dense(system), roots, strategy, None)


def solve_dividends(params: ModelParams, strategy: DividendStrategy,
                    delta: float) -> PiecewiseSolution:
    """Expected discounted dividend payments until ruin; the solution is
    zero at zero and approaches ``d_k / delta`` at infinity."""
    system = assemble_dividend_system(params, strategy, delta)
    roots = _layer_roots(params, strategy, delta)
    return _extract(DIVIDEND, system, solve_dense(system), roots, strategy, delta)


def eval_piecewise(solution: PiecewiseSolution, x: float) -> float:
    """Evaluate the solution at ``x >= 0`` using its layer's scaled basis.

    At a threshold the two adjacent layer formulas agree to solver
    precision (continuity is a solved row), so the half-open upper layer is
    used.
    """
    return solution.layer_for(x).value(x)


def eval_derivative(solution: PiecewiseSolution, x: float,
                    side: str = "right") -> float:
    """One-sided derivative at ``x``.

    ``side`` matters only at thresholds, where the derivative genuinely
    jumps whenever adjacent rates differ: ``left`` evaluates the layer
    ending at ``x``, ``right`` the layer starting there. Inside a layer
    both sides coincide.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if x < 0.0:
        raise NegativeSurplus(f"surplus must be non-negative, got {x}")
    if side == "left":
        for layer in solution.layers:
            if layer.upper == x:
                return layer.derivative(x)
    return solution.layer_for(x).derivative(x)


# ---------------------------------------------------------------------------
# Two-layer determinant
# ---------------------------------------------------------------------------

def two_layer_delta(params: ModelParams, strategy: DividendStrategy) -> float:
    """Closed-form determinant deciding unique solvability of the two-layer
    ruin system; nonzero iff the reduced system is uniquely solvable."""
    if strategy.layer_count != 2:
        raise WrongLayerCount(
            f"two_layer_delta needs exactly 2 layers, got {strategy.layer_count}")
    ok, margin = check_net_profit(params, strategy)
    if not ok:
        raise NetProfitViolated(f"net profit margin is {margin}")
    lam, lam_bar, mu, mu_bar = params.lam, params.lam_bar, params.mu, params.mu_bar
    d1, d2 = strategy.rates
    b1 = strategy.thresholds[0]
    z1, z2 = sorted(ruin_quadratic_roots(params, d1).exponents, reverse=True)
    # z1, z2 here follow the (+sqrt, -sqrt) labelling of the root formulas
    g1 = lam_bar * mu_bar - lam * mu - d1
    g2 = lam_bar * mu_bar - lam * mu - d2
    eb = math.exp(b1 / mu_bar)
    em = math.exp(-b1 / mu)
    e1 = math.exp(z1 * b1)
    e2 = math.exp(z2 * b1)
    zdiff = z1 - z2
    zcross = z2 * e1 - z1 * e2
    total = (
        d1 * mu_bar * zdiff * (eb - em) * (g1 * eb - g2)
        - d1 * mu_bar * eb * zdiff * g1 * (eb - em)
        + d1 * mu * (1.0 - 1.0 / mu_bar) * (e1 - e2) * (g1 * eb - g2)
        + (d2 - d1) * (e1 - e2) * g1 * (eb - em)
        + d1 ** 2 * mu * eb * (mu_bar - 1.0) * zcross
        + d1 * mu_bar * (d2 - d1) * (eb - em) * zcross
    )
    return total / (lam_bar * (mu + mu_bar) ** 2)


# ---------------------------------------------------------------------------
# Integro-differential residuals
# ---------------------------------------------------------------------------

def _integral_terms(solution: PiecewiseSolution, params: ModelParams,
                    x: float, j: int) -> tuple[float, float]:
    """Both weighted integrals of the solved function, evaluated
    analytically layer by layer in the scaled basis.

    Returns ``lower = (lam / mu) e^{-x/mu} int_0^x f(u) e^{u/mu} du`` and
    ``upper = (lam_bar / mu_bar) e^{x/mu_bar} int_x^inf f(u) e^{-u/mu_bar} du``
    with every exponent combined before exponentiation.
    """
    lam, lam_bar, mu, mu_bar = params.lam, params.lam_bar, params.mu, params.mu_bar
    layers = solution.layers
    lower = 0.0
    for l in range(j - 1):
        lay = layers[l]
        for c, z in zip(lay.coefficients, lay.exponents):
            lower += lam * c / (mu * z + 1.0) * (
                _exp(z * (lay.upper - lay.lower) + (lay.upper - x) / mu)
                - _exp((lay.lower - x) / mu))
        lower += lam * lay.constant * (
            _exp((lay.upper - x) / mu) - _exp((lay.lower - x) / mu))
    lay = layers[j - 1]
    for c, z in zip(lay.coefficients, lay.exponents):
        lower += lam * c / (mu * z + 1.0) * (
            _exp(z * (x - lay.lower)) - _exp((lay.lower - x) / mu))
    lower += lam * lay.constant * (1.0 - _exp((lay.lower - x) / mu))

    upper = 0.0
    for c, z in zip(lay.coefficients, lay.exponents):
        top = z * (lay.upper - lay.lower) - (lay.upper - x) / mu_bar \
            if lay.upper != math.inf else -math.inf
        upper += lam_bar * c / (mu_bar * z - 1.0) * (
            _exp(top) - _exp(z * (x - lay.lower)))
    upper -= lam_bar * lay.constant * (_exp(-(lay.upper - x) / mu_bar) - 1.0)
    for l in range(j, len(layers)):
        lay = layers[l]
        for c, z in zip(lay.coefficients, lay.exponents):
            top = z * (lay.upper - lay.lower) - (lay.upper - x) / mu_bar \
                if lay.upper != math.inf else -math.inf
            upper += lam_bar * c / (mu_bar * z - 1.0) * (
                _exp(top) - _exp(-(lay.lower - x) / mu_bar))
        upper -= lam_bar * lay.constant * (
            _exp(-(lay.upper - x) / mu_bar) - _exp(-(lay.lower - x) / mu_bar))
    return lower, upper


def _guard_threshold(strategy: DividendStrategy, x: float) -> int:
    if x < 0.0:
        raise NegativeSurplus(f"surplus must be non-negative, got {x}")
    for b in strategy.thresholds:
        if abs(x - b) < THRESHOLD_EPS:
            raise ThresholdPoint(
                f"residual is two-valued at threshold {b}; x={x} is too close")
    return layer_index(strategy, x)


def ruin_residual(params: ModelParams, strategy: DividendStrategy,
                  solution: PiecewiseSolution, x: float) -> float:
    """Pointwise defect of the ruin integro-differential equation at ``x``:

        d_j f'(x) + (lam + lam_bar) f(x)
            - (lam/mu) e^{-x/mu} int_0^x f e^{u/mu} du - lam e^{-x/mu}
            - (lam_bar/mu_bar) e^{x/mu_bar} int_x^inf f e^{-u/mu_bar} du

    with both integrals taken analytically. A solved instance has residuals
    at round-off level; evaluation at a threshold is refused (the equation
    is two-valued there).
    """
    j = _guard_threshold(strategy, x)
    d_j = strategy.rates[j - 1]
    lhs = d_j * eval_derivative(solution, x) \
        + params.total_rate * eval_piecewise(solution, x)
    lower, upper = _integral_terms(solution, params, x, j)
    rhs = lower + params.lam * _exp(-x / params.mu) + upper
    return lhs - rhs


def dividend_residual(params: ModelParams, strategy: DividendStrategy,
                      delta: float, solution: PiecewiseSolution,
                      x: float) -> float:
    """Pointwise defect of the dividend-value equation at ``x``; as
    :func:`ruin_residual` but with discounting and the ``+ d_j`` source
    term, and no claim-overshoot term."""
    j = _guard_threshold(strategy, x)
    d_j = strategy.rates[j - 1]
    lhs = d_j * eval_derivative(solution, x) \
        + (params.total_rate + delta) * eval_piecewise(solution, x)
    lower, upper = _integral_terms(solution, params, x, j)
    rhs = lower + upper + d_j
    return lhs - rhs


def residual_scale(kind: str, params: ModelParams, strategy: DividendStrategy,
                   delta: float = 0.0) -> float:
    """Natural magnitude of the equation terms, used to express residuals
    relatively: the zero-order coefficient times the solution's sup
    (1 for ruin, ``d_k / delta`` for dividends)."""
    if kind == RUIN:
        return params.total_rate
    return (params.total_rate + delta) * strategy.rates[-1] / delta
