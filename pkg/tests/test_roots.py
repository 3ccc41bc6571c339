import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ruindiv.closed_form import (
    cubic_discriminant,
    dividend_cubic_roots,
    ruin_quadratic_roots,
)
from ruindiv.errors import NetProfitViolated, NonPositiveDiscriminant
from ruindiv.model import ModelParams

from conftest import BASE


@st.composite
def params_and_rate(draw):
    """Random parameters with a dividend rate keeping the margin positive."""
    lam = draw(st.floats(0.02, 4.0))
    lam_bar = draw(st.floats(0.02, 4.0))
    mu = draw(st.floats(0.05, 8.0))
    mu_bar = draw(st.floats(0.05, 8.0))
    margin = lam_bar * mu_bar - lam * mu
    assume(margin > 0.01)
    d = margin * draw(st.floats(0.05, 0.9))
    return ModelParams(lam, lam_bar, mu, mu_bar), d


class TestQuadraticRoots:
    def test_low_rate_values(self):
        roots = ruin_quadratic_roots(BASE, 0.05).exponents
        assert roots[0] == pytest.approx(-43.248552, abs=1e-5)
        assert roots[1] == pytest.approx(-0.084781, abs=1e-5)

    def test_high_rate_values(self):
        roots = ruin_quadratic_roots(BASE, 0.1).exponents
        assert roots[0] == pytest.approx(-19.28147, abs=1e-5)
        assert roots[1] == pytest.approx(-0.051863, abs=1e-5)

    def test_net_profit_guard(self):
        with pytest.raises(NetProfitViolated):
            ruin_quadratic_roots(BASE, 0.2)

    @given(params_and_rate())
    @settings(max_examples=200)
    def test_vieta_and_negativity(self, case):
        params, d = case
        roots = ruin_quadratic_roots(params, d)
        z1, z2 = roots.exponents
        assert z1 < 0.0 and z2 < 0.0
        assert z1 <= z2
        a = d * params.mu * params.mu_bar
        b = d * (params.mu_bar - params.mu) \
            + params.mu * params.mu_bar * params.total_rate
        c = params.lam_bar * params.mu_bar - params.lam * params.mu - d
        assert z1 + z2 == pytest.approx(-b / a, rel=1e-12)
        assert z1 * z2 == pytest.approx(c / a, rel=1e-12)
        assert roots.discriminant == pytest.approx(b * b - 4 * a * c, rel=1e-9)


class TestCubicRoots:
    def test_low_rate_values(self):
        roots = dividend_cubic_roots(BASE, 0.05, 0.01).exponents
        assert roots[0] == pytest.approx(-43.470279, abs=1e-5)
        assert roots[1] == pytest.approx(-0.124597, abs=1e-5)
        assert roots[2] == pytest.approx(0.061543, abs=1e-5)

    def test_high_rate_values(self):
        roots = dividend_cubic_roots(BASE, 0.1, 0.01).exponents
        assert roots[0] == pytest.approx(-19.405407, abs=1e-5)
        assert roots[1] == pytest.approx(-0.107684, abs=1e-5)
        assert roots[2] == pytest.approx(0.079758, abs=1e-5)

    def test_polished_residual(self):
        params, d, delta = BASE, 0.05, 0.01
        a = d * params.mu * params.mu_bar
        b = d * (params.mu_bar - params.mu) \
            + params.mu * params.mu_bar * (params.total_rate + delta)
        c = params.mu_bar * (params.lam_bar + delta) \
            - params.mu * (params.lam + delta) - d
        for z in dividend_cubic_roots(params, d, delta).exponents:
            f = ((a * z + b) * z + c) * z - delta
            scale = abs(a * z ** 3) + abs(b * z * z) + abs(c * z) + delta
            assert abs(f) / scale < 1e-13

    def test_discriminant_guard(self):
        # unreachable for positive parameters; exercise the guard with an
        # unphysical intensity that produces a complex pair
        bad = ModelParams(-2.0, 0.5, 1.0, 1.0)
        assert cubic_discriminant(bad, 1.0, 1.0) < 0.0
        with pytest.raises(NonPositiveDiscriminant):
            dividend_cubic_roots(bad, 1.0, 1.0)

    def test_delta_must_be_positive(self):
        with pytest.raises(ValueError):
            dividend_cubic_roots(BASE, 0.05, 0.0)

    @given(params_and_rate(), st.floats(1e-4, 2.0))
    @settings(max_examples=200)
    def test_vieta_and_sign_pattern(self, case, delta):
        params, d = case
        roots = dividend_cubic_roots(params, d, delta)
        z1, z2, z3 = roots.exponents
        assert z1 < z2 < z3
        # one positive root, two negative, for every valid layer
        assert z2 < 0.0 < z3
        a = d * params.mu * params.mu_bar
        assert z1 * z2 * z3 == pytest.approx(delta / a, rel=1e-12)
        assert roots.discriminant > 0.0
        # the roots interlace the transform poles
        assert z1 < -1.0 / params.mu < z2
        assert z3 < 1.0 / params.mu_bar
