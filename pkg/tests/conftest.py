import math
from pathlib import Path

import pytest
from hypothesis import settings

from qgs.catalog import TEST_GRAPHS

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

DATA = Path(__file__).resolve().parent.parent / "data" / "graphs"


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture(params=sorted(TEST_GRAPHS))
def test_graph(request):
    return request.param, TEST_GRAPHS[request.param]()


def robin_k(sigma: float, n: int) -> float:
    """n-th root (n >= 1) of k tan k = sigma on the unit interval, by bisection."""
    if sigma == 0.0:
        return (n - 1) * math.pi
    lo = (n - 1) * math.pi
    hi = lo + math.pi / 2
    f = lambda k: k * math.sin(k) - sigma * math.cos(k)  # noqa: E731
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
