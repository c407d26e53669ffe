import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from elgdist.data import relief_times

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# parameter grid used by the distribution and moment checks
ALPHAS = (0.5, 1.0, 2.0, 5.0, 15.0)
THETAS = (0.5, 1.0, 2.0)
PS = (-2.0, 0.0, 0.5, 0.9)

# published ELG estimates for the relief data, four significant figures
PUBLISHED_ELG = (15.5628, 1.5270, 0.9059)


@pytest.fixture(scope="session")
def relief():
    return relief_times()


@pytest.fixture(scope="session")
def relief_newton(relief):
    from elgdist.estimation import fit_mle_newton
    return fit_mle_newton(relief)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT:
            terminalreporter.write_line(line)
