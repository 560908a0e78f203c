"""Canonical games.

Shapley's and Jordan's games are only pinned down by their preference
graphs; the instances below are concrete generic realizations of those
graphs. ``check_builtin_shapes`` asserts the graph shape each instance is
supposed to have.
"""

from __future__ import annotations

import numpy as np

from gdx.errors import GameError
from gdx.game import Game

HT = ("H", "T")


def bimatrix(a, b, labels=None, name: str = "") -> Game:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return Game(np.stack([a, b], axis=-1), labels, name=name)


def shapley() -> Game:
    # cyclic win/draw/lose levels {0, 1, 2}; the off-diagonal 6-cycle is the unique sink
    a = [[0, 2, 1], [1, 0, 2], [2, 1, 0]]
    b = [[0, 1, 2], [2, 0, 1], [1, 2, 0]]
    return bimatrix(a, b, name="shapley")


def jordan_weighted(a: float = 1.0, b: float = 1.0, c: float = 1.0) -> Game:
    """Jordan's 2x2x2 game with win payoffs ``a, b, c`` for players 1-3.

    Player 1 wants to match player 2, player 2 to match player 3, player 3
    to mismatch player 1.
    """
    if min(a, b, c) <= 0:
        raise GameError("jordan win payoffs must be positive")
    u = np.zeros((2, 2, 2, 3))
    for s1 in range(2):
        for s2 in range(2):
            for s3 in range(2):
                u[s1, s2, s3] = (a * (s1 == s2), b * (s2 == s3), c * (s3 != s1))
    name = "jordan" if a == b == c == 1 else f"jordan_weighted({a:g},{b:g},{c:g})"
    return Game(u, [HT, HT, HT], name=name)


def jordan() -> Game:
    return jordan_weighted(1.0, 1.0, 1.0)


def matching_pennies() -> Game:
    a = np.array([[1, -1], [-1, 1]])
    return bimatrix(a, -a, [HT, HT], name="matching_pennies")


def matching_pennies_asym() -> Game:
    a = np.array([[3, -1], [-1, 1]])
    return bimatrix(a, -a, [HT, HT], name="matching_pennies_asym")


def rps() -> Game:
    a = np.array([[0, -1, 1], [1, 0, -1], [-1, 1, 0]])
    labels = [("R", "P", "S")] * 2
    return bimatrix(a, -a, labels, name="rps")


BUILTINS = {
    "shapley": shapley,
    "jordan": jordan,
    "jordan_weighted": jordan_weighted,
    "matching_pennies": matching_pennies,
    "matching_pennies_asym": matching_pennies_asym,
    "rps": rps,
}


def builtin(name: str, *params: float) -> Game:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise GameError(f"unknown builtin {name!r}; choose from {', '.join(sorted(BUILTINS))}") from None
    if params and name != "jordan_weighted":
        raise GameError(f"builtin {name!r} takes no parameters")
    return factory(*params)


# cycles in 0-based profile indices, in the order best-response dynamics traverses them
SHAPLEY_CYCLE = ((0, 2), (1, 2), (1, 0), (2, 0), (2, 1), (0, 1))
JORDAN_CYCLE = ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1), (1, 1, 0), (1, 0, 0))
PENNIES_CYCLE = ((0, 0), (0, 1), (1, 1), (1, 0))


def check_builtin_shapes() -> None:
    """Assert each builtin realizes the preference-graph shape it stands for."""
    from gdx.graph import build_graph, is_sink_cycle, sink_equilibria, validate_walk

    cases = [
        (shapley(), SHAPLEY_CYCLE),
        (jordan(), JORDAN_CYCLE),
        (jordan_weighted(1, 2, 3), JORDAN_CYCLE),
        (matching_pennies(), PENNIES_CYCLE),
        (matching_pennies_asym(), PENNIES_CYCLE),
    ]
    for game, cycle in cases:
        graph = build_graph(game)
        sinks = sink_equilibria(graph)
        assert len(sinks) == 1, game.name
        assert sinks[0].profiles == frozenset(cycle), game.name
        assert is_sink_cycle(graph, validate_walk(graph, cycle)), game.name
