import numpy as np
import pytest

from dcfair import Dataset


def planted_bias(n=600, d=3, shift=1.0, seed=0, groups=2):
    """Two (or more) groups; group 2's first feature is shifted up so an
    unconstrained model scores it higher."""
    rng = np.random.default_rng(seed)
    g = rng.integers(1, groups + 1, n)
    g[:groups] = np.arange(1, groups + 1)
    x = rng.standard_normal((n, d))
    x[:, 0] += (g == 2) * shift
    y = np.where(x[:, 0] + 0.5 * x[:, 1] + 0.3 * rng.standard_normal(n) > 0.5, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    y[2 % n], y[3 % n] = -1.0, 1.0
    return Dataset(x, y, g)


@pytest.fixture
def small_data():
    return planted_bias(n=120, d=3, seed=3)


@pytest.fixture
def three_group_data():
    return planted_bias(n=150, d=2, seed=5, groups=3)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
