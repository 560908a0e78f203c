import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

from gdx.builtins import (  # noqa: E402
    JORDAN_CYCLE,
    PENNIES_CYCLE,
    SHAPLEY_CYCLE,
    jordan,
    jordan_weighted,
    matching_pennies,
    matching_pennies_asym,
    shapley,
)
from gdx.game import Game  # noqa: E402
from gdx.graph import build_graph, validate_walk  # noqa: E402


@st.composite
def games(draw, max_players=3, max_strategies=3, max_profiles=27, integer=False):
    n = draw(st.integers(1, max_players))
    dims = []
    for _ in range(n):
        dims.append(draw(st.integers(2, max_strategies)))
        if np.prod(dims) > max_profiles:
            dims[-1] = 2
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    shape = tuple(dims) + (n,)
    u = rng.integers(-3, 4, shape).astype(float) if integer else rng.standard_normal(shape)
    return Game(u)


@pytest.fixture
def pennies():
    return matching_pennies()


@pytest.fixture
def shapley_game():
    return shapley()


@pytest.fixture
def shapley_walk(shapley_game):
    return validate_walk(build_graph(shapley_game), SHAPLEY_CYCLE)


@pytest.fixture
def jordan_walk():
    return validate_walk(build_graph(jordan()), JORDAN_CYCLE)


@pytest.fixture
def pennies_walk(pennies):
    return validate_walk(build_graph(pennies), PENNIES_CYCLE)


def walk_of(game, cycle):
    return validate_walk(build_graph(game), cycle)


__all__ = ["games", "walk_of", "jordan_weighted", "matching_pennies_asym"]


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[n])
