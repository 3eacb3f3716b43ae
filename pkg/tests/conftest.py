import numpy as np
import pytest

from balanced_da.core import LabeledDomain, UnlabeledDomain


def random_pair(seed, n=30, m=25, D=5, C=3, shift=1.0):
    """Small Gaussian source/target pair with every class present on the source side."""
    rng = np.random.default_rng(seed)
    means = 3.0 * rng.standard_normal((C, D))
    ys = np.r_[np.arange(1, C + 1), rng.integers(1, C + 1, n - C)]
    yt = rng.integers(1, C + 1, m)
    Xs = means[ys - 1] + rng.standard_normal((n, D))
    Xt = means[yt - 1] + shift + rng.standard_normal((m, D))
    return LabeledDomain(Xs, ys), UnlabeledDomain(Xt), yt


@pytest.fixture
def pair():
    return random_pair(0)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
