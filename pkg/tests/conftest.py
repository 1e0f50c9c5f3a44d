import os

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from hodgewalk import build_complex

MAX_SIMPLICES = 30

# fixed example streams keep the suite reproducible; HYPOTHESIS_PROFILE=explore randomizes
settings.register_profile("repro", derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
settings.register_profile("explore", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))


def random_complex(rng, max_simplices=MAX_SIMPLICES, max_dim=3, n_vertices=7):
    """Closure of a few random vertex sets, resampled until it is small enough."""
    while True:
        n_max = rng.integers(1, 6)
        sets = []
        for _ in range(n_max):
            size = rng.integers(1, max_dim + 2)
            sets.append(rng.choice(n_vertices, size=size, replace=False).tolist())
        c = build_complex(sets)
        if len(c) <= max_simplices:
            return c


def random_suite(n, seed=20240601, **kw):
    rng = np.random.default_rng(seed)
    return [random_complex(rng, **kw) for _ in range(n)]


@st.composite
def complexes(draw, max_dim=3, n_vertices=7):
    sets = draw(st.lists(
        st.lists(st.integers(0, n_vertices - 1), min_size=1, max_size=max_dim + 1, unique=True),
        min_size=1, max_size=5))
    c = build_complex(sets)
    assume(len(c) <= MAX_SIMPLICES)
    return c


@pytest.fixture
def triangle():
    return build_complex([[0, 1, 2]])


@pytest.fixture
def tetra():
    return build_complex([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])


@pytest.fixture
def cycle3():
    return build_complex([[0, 1], [1, 2], [0, 2]])


@pytest.fixture
def cycle4():
    return build_complex([[0, 1], [1, 2], [2, 3], [0, 3]])


@pytest.fixture
def two_triangles():
    return build_complex([[0, 1, 2], [1, 2, 3]])


@pytest.fixture
def wedge():
    return build_complex([[0, 1], [1, 2], [0, 2], [0, 3], [3, 4], [0, 4]])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
