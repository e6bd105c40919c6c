import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sgl import from_edges, materialize

settings.register_profile(
    "sgl",
    max_examples=100,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("sgl")


def two_vertex(q=(0.0, 0.0), m=(1.0, 1.0), b=1.0):
    return from_edges([1, 2], [(1, 2, b)], q={1: q[0], 2: q[1]}, m={1: m[0], 2: m[1]})


def single_vertex(q=0.0, m=1.0):
    return from_edges([0], [], q={0: q}, m={0: m})


def whole(model):
    return materialize(model, model.vertices)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
