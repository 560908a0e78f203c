import numpy as np
import pytest
from conftest import games
from hypothesis import given
from oracles import brute_arcs, closure_sccs
from scipy.sparse.csgraph import breadth_first_order

from gdx.builtins import (
    JORDAN_CYCLE,
    PENNIES_CYCLE,
    SHAPLEY_CYCLE,
    jordan,
    jordan_weighted,
    matching_pennies,
    shapley,
)
from gdx.errors import MissingArc, NonAdjacent, NotSimpleCycle, WrongDirection
from gdx.game import Game
from gdx.graph import (
    Walk,
    build_graph,
    enumerate_simple_cycles,
    is_sink_cycle,
    sink_equilibria,
    strongly_connected_components,
    validate_walk,
)
from gdx.io import random_game


def test_pennies_graph():
    g = build_graph(matching_pennies())
    assert len(g.nodes) == 4
    assert len(g.arcs) == 4
    assert all(a.weight == 2 for a in g.arcs)
    walk = validate_walk(g, PENNIES_CYCLE)
    assert {(a.source, a.target) for a in walk.arcs} == {(a.source, a.target) for a in g.arcs}


def test_shapley_graph():
    g = build_graph(shapley())
    assert len(g.nodes) == 9
    for p in SHAPLEY_CYCLE:
        assert len(g.out_arcs[p]) == 1
    validate_walk(g, SHAPLEY_CYCLE)
    # diagonal profiles are sources: nothing improves into them
    for s in range(3):
        assert not any(a.target == (s, s) for a in g.arcs)
        assert len(g.out_arcs[(s, s)]) == 4


def test_single_player_order():
    g = build_graph(Game(np.array([[0.0], [1.0], [2.0]])))
    arcs = {(a.source, a.target): a.weight for a in g.arcs}
    assert arcs == {((0,), (1,)): 1.0, ((1,), (2,)): 1.0, ((0,), (2,)): 2.0}


def test_ties_both_directions():
    u = np.zeros((2, 2, 2))
    u[1, 0, 0] = 1.0
    g = build_graph(Game(u))
    tie = g.arc((0, 0), (0, 1))
    assert tie is not None and tie.is_tie
    assert g.arc((0, 1), (0, 0)).is_tie
    assert g.arc((1, 0), (0, 0)) is None


@given(games())
def test_arcs_match_brute_force(game):
    g = build_graph(game)
    assert {(a.source, a.target) for a in g.arcs} == brute_arcs(game.payoffs)
    for a in g.arcs:
        diff = [k for k in range(game.num_players) if a.source[k] != a.target[k]]
        assert diff == [a.player]
        assert a.weight == game.payoffs[a.target][a.player] - game.payoffs[a.source][a.player] >= 0
        if a.weight > 0:
            assert g.arc(a.target, a.source) is None
        else:
            assert g.arc(a.target, a.source) is not None


@given(games(integer=True))
def test_scc_matches_transitive_closure(game):
    g = build_graph(game)
    comps, sinks = closure_sccs(game.payoffs)
    assert set(strongly_connected_components(g)) == set(comps)
    assert {s.profiles for s in sink_equilibria(g)} == set(sinks)


@given(games(integer=True))
def test_sinks_nonempty_and_reachable(game):
    g = build_graph(game)
    sinks = sink_equilibria(g)
    assert sinks
    sink_idx = {game.profile_index(p) for s in sinks for p in s.profiles}
    adj = g.adjacency()
    for start in range(game.num_profiles):
        reached = set(breadth_first_order(adj, start, directed=True, return_predecessors=False))
        assert reached & sink_idx


def test_sink_examples():
    (s,) = sink_equilibria(build_graph(matching_pennies()))
    assert s.profiles == frozenset(PENNIES_CYCLE)
    (s,) = sink_equilibria(build_graph(shapley()))
    assert s.profiles == frozenset(SHAPLEY_CYCLE) and not s.is_singleton
    u = np.array([[[3, 3], [0, 1]], [[1, 0], [2, 2]]], dtype=float)
    u[0, 0] = [5, 5]
    sinks = sink_equilibria(build_graph(Game(u)))
    assert any(x.profiles == {(0, 0)} and x.is_singleton for x in sinks)


def test_dominant_strategy_singleton_sink():
    a = np.array([[3.0, 2.0], [1.0, 0.0]])
    g = build_graph(Game(np.stack([a, a.T], axis=-1)))
    assert [s.profiles for s in sink_equilibria(g)] == [frozenset({(0, 0)})]


class TestValidateWalk:
    def test_pennies(self):
        w = validate_walk(build_graph(matching_pennies()), PENNIES_CYCLE)
        assert len(w) == 4 and w.weights() == (2, 2, 2, 2)

    def test_non_adjacent(self):
        with pytest.raises(NonAdjacent) as e:
            validate_walk(build_graph(matching_pennies()), [(0, 0), (1, 1)])
        assert e.value.index == 0

    def test_wrong_direction(self):
        rev = list(reversed(PENNIES_CYCLE))
        with pytest.raises(WrongDirection) as e:
            validate_walk(build_graph(matching_pennies()), rev)
        assert e.value.index == 0

    def test_missing_arc(self):
        # both directions absent is impossible in a total game, so use a profile repeated
        with pytest.raises((MissingArc, NonAdjacent)):
            validate_walk(build_graph(matching_pennies()), [(0, 0), (0, 0)])

    def test_diagonal_walk_rejected(self):
        g = build_graph(shapley())
        with pytest.raises((WrongDirection, MissingArc)):
            validate_walk(g, [(0, 0), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1), (0, 1)])

    def test_error_index_points_at_bad_transition(self):
        c = SHAPLEY_CYCLE
        with pytest.raises(WrongDirection) as e:
            validate_walk(build_graph(shapley()), [c[0], c[1], c[2], c[1]], closed=False)
        assert e.value.index == 2

    def test_open_path(self):
        w = validate_walk(build_graph(shapley()), SHAPLEY_CYCLE[:3], closed=False)
        assert len(w.arcs) == 2


class TestSinkCycle:
    @pytest.mark.parametrize(
        "game,cycle",
        [(shapley(), SHAPLEY_CYCLE), (jordan(), JORDAN_CYCLE), (jordan_weighted(1, 2, 3), JORDAN_CYCLE)],
    )
    def test_builtin_cycles_are_sinks(self, game, cycle):
        g = build_graph(game)
        assert is_sink_cycle(g, validate_walk(g, cycle))

    def test_non_sink_cycle(self):
        game = random_game([3, 3], 4)
        g = build_graph(game)
        walk = validate_walk(g, [(0, 1), (2, 1), (2, 0), (1, 0), (1, 2), (1, 1)])
        assert not is_sink_cycle(g, walk)

    def test_not_simple(self):
        g = build_graph(matching_pennies())
        w = validate_walk(g, PENNIES_CYCLE * 2)
        with pytest.raises(NotSimpleCycle):
            is_sink_cycle(g, w)

    @given(games(max_players=3, max_strategies=3, max_profiles=12))
    def test_sink_cycle_is_sink_component(self, game):
        g = build_graph(game)
        sinks = {s.profiles for s in sink_equilibria(g)}
        for w in enumerate_simple_cycles(g, 6):
            if is_sink_cycle(g, w):
                assert frozenset(w.profiles) in sinks


class TestEnumerateCycles:
    def test_pennies(self):
        cycles = list(enumerate_simple_cycles(build_graph(matching_pennies()), 4))
        assert [c.profiles for c in cycles] == [PENNIES_CYCLE]

    def test_shapley(self):
        cycles = list(enumerate_simple_cycles(build_graph(shapley()), 6))
        assert any(set(c.profiles) == set(SHAPLEY_CYCLE) for c in cycles)

    def test_potential_game_acyclic(self):
        # identical-interest games are exact potential games
        rng = np.random.default_rng(3)
        phi = rng.standard_normal((3, 3, 2))
        g = build_graph(Game(np.stack([phi, phi, phi], axis=-1)))
        assert list(enumerate_simple_cycles(g, 12)) == []

    @given(games(max_profiles=12))
    def test_cycles_valid_unique_canonical(self, game):
        g = build_graph(game)
        seen = set()
        for w in enumerate_simple_cycles(g, 6):
            assert isinstance(w, Walk) and w.is_simple and len(w) >= 4
            assert validate_walk(g, w.profiles) == w
            assert w.profiles[0] == min(w.profiles)
            key = frozenset(zip(w.profiles, w.profiles[1:] + w.profiles[:1]))
            assert key not in seen
            seen.add(key)
