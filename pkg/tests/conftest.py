import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ruindiv.model import DividendStrategy, ModelParams, validate_model

# jit compilation on first call makes per-example deadlines meaningless
settings.register_profile(
    "ruindiv",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ruindiv")

# Base demo scenario used throughout the suite. Expected values frozen in
# the tests are cross-validated within the suite itself by the residual
# checks and by Monte Carlo agreement.
BASE = ModelParams(lam=0.1, lam_bar=2.3, mu=3.0, mu_bar=0.2)
STRAT_LOW_HIGH = DividendStrategy((5.0,), (0.05, 0.1))
STRAT_HIGH_LOW = DividendStrategy((5.0,), (0.1, 0.05))
STRAT_THREE = DividendStrategy((3.0, 7.0), (0.03, 0.05, 0.08))
DELTA = 0.01

# x -> (baseline ruin, layered ruin, dividend value) for the two demo
# strategies at the parameters above.
TABLE_LOW_HIGH = {
    0.0: (0.666667, 1.000000, 0.000000),
    1.0: (0.596560, 0.777184, 3.663273),
    2.0: (0.533825, 0.737542, 4.283457),
    5.0: (0.382502, 0.636926, 5.911685),
    7.0: (0.306284, 0.575029, 6.716708),
    10.0: (0.219462, 0.492173, 7.623108),
    15.0: (0.125917, 0.379750, 8.612682),
    20.0: (0.072245, 0.293007, 9.190265),
    50.0: (0.002577, 0.061825, 9.967986),
    70.0: (0.000279, 0.021912, 9.996285),
}
TABLE_HIGH_LOW = {
    0.0: (0.666667, 1.000000, 0.000000),
    1.0: (0.596560, 0.721066, 2.611525),
    2.0: (0.533825, 0.663275, 2.930525),
    5.0: (0.382502, 0.506845, 3.490686),
    7.0: (0.306284, 0.426750, 3.805635),
    10.0: (0.219462, 0.330912, 4.178134),
    15.0: (0.125917, 0.216577, 4.559200),
    20.0: (0.072245, 0.141747, 4.763582),
    50.0: (0.002577, 0.011141, 4.994372),
    70.0: (0.000279, 0.002044, 4.999534),
}

BASE_CONFIG = """\
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
"""


@pytest.fixture(scope="session")
def base_model():
    return validate_model(BASE, STRAT_LOW_HIGH)


@pytest.fixture(scope="session")
def solved():
    """Session cache of solved instances: (strategy key) -> (psi, v)."""
    from ruindiv.closed_form import solve_dividends, solve_ruin

    out = {}
    for key, strat in (("low_high", STRAT_LOW_HIGH),
                       ("high_low", STRAT_HIGH_LOW),
                       ("three", STRAT_THREE)):
        out[key] = (solve_ruin(BASE, strat), solve_dividends(BASE, strat, DELTA))
    return out


@pytest.fixture(scope="session")
def warm_kernel():
    """Compile the batch kernel once so timed tests measure simulation only."""
    from ruindiv.simulation import run_paths

    model = validate_model(BASE, STRAT_LOW_HIGH)
    run_paths(model, 1.0, delta=DELTA, n_paths=4, horizon=5.0, seed=0)
    return True


def random_two_layer_instances(n, seed=20240817):
    """Valid random 2-layer (params, strategy) pairs with positive margin."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        lam, lam_bar = rng.uniform(0.02, 3.0, 2)
        mu, mu_bar = rng.uniform(0.05, 5.0, 2)
        margin0 = lam_bar * mu_bar - lam * mu
        if margin0 <= 0.02:
            continue
        dmax = margin0 * rng.uniform(0.2, 0.9)
        d1, d2 = rng.uniform(0.1, 1.0, 2) * dmax
        b1 = rng.uniform(0.3, 15.0)
        out.append((ModelParams(lam, lam_bar, mu, mu_bar),
                    DividendStrategy((b1,), (d1, d2))))
    return out
