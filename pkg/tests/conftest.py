import numpy as np
import pytest

from randerslie.lie_core import catalog_get
from randerslie.randers import InnerProduct, RandersData

ACCEPTANCE_LINES: dict[str, str] = {}

CATALOG = ["abelian(3)", "heisenberg3", "aff1", "so3"]


@pytest.fixture
def rng():
    return np.random.default_rng(20101026)


@pytest.fixture(params=CATALOG)
def algebra(request):
    return catalog_get(request.param)


def random_spd(n, rng, low=0.5, high=2.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    G = Q @ np.diag(rng.uniform(low, high, n)) @ Q.T
    return (G + G.T) / 2


def random_randers(n, rng, max_norm=0.9):
    G = random_spd(n, rng)
    x = rng.standard_normal(n)
    x *= rng.uniform(0, max_norm) / np.sqrt(x @ G @ x)
    return RandersData(InnerProduct(G), x)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[0])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
