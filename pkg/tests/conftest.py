import numpy as np
import pytest

from proxnaggs.model import CompositeProblem, LeastSquaresRidge
from proxnaggs.problems import gen_elastic_net, with_reference


def quadratic_1d(center=0.0, r=None):
    """``f(x) = (x - center)^2 / 2`` in one dimension."""
    f = LeastSquaresRidge(np.array([[1.0]]), np.array([center]))
    return CompositeProblem(f) if r is None else CompositeProblem(f, r)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def easy_en():
    """Strongly convex desk elastic-net instance with its reference attached."""
    return with_reference(gen_elastic_net(n=60, d=30, seed=3))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
