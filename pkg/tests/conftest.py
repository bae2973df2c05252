import numpy as np
import pytest

from cxgboost.dataset import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_causal(n=200, d=3, seed=0, missing=0.0):
    """Small random causal dataset with ground truth."""
    r = np.random.default_rng(seed)
    x = r.normal(size=(n, d))
    if missing:
        x[r.random(x.shape) < missing] = np.nan
    t = (r.random(n) < 0.5).astype(int)
    mu0 = 0.2 * np.nan_to_num(x[:, 0])
    mu1 = mu0 + 1.0
    y = np.where(t == 1, mu1, mu0) + 0.1 * r.normal(size=n)
    return Dataset(x, y, t, mu0, mu1)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
