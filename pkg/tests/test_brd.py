import numpy as np
import pytest
from conftest import games, walk_of
from hypothesis import assume, given
from hypothesis import strategies as st
from oracles import euler_brd

from gdx.brd import (
    HitTie,
    ReachedPNE,
    Status,
    SwitchEvent,
    detect_period,
    in_section,
    next_switch,
    section_return,
    simulate,
)
from gdx.builtins import PENNIES_CYCLE, SHAPLEY_CYCLE, bimatrix, matching_pennies, shapley
from gdx.errors import AmbiguousArgmax, Deviated, SectionError
from gdx.game import Game
from gdx.graph import build_graph, validate_walk
from gdx.stability import arc_matrix, stability_test

PENNIES_3X3 = bimatrix(
    [[1, -1, 0], [-1, 1, 0], [2, 2, 1]],
    [[-1, 1, -2], [1, -1, -2], [0, 0.5, -1]],
    name="pennies+dominant-row",
)


def dominant_game():
    a = np.array([[3.0, 2.0], [1.0, 0.0]])
    return Game(np.stack([a, a.T], axis=-1))


class TestNextSwitch:
    def test_ambiguous_entry(self):
        with pytest.raises(AmbiguousArgmax):
            next_switch(matching_pennies(), np.array([0.0, 0, 1, 0]))

    def test_pennies_half(self):
        ev = next_switch(matching_pennies(), np.array([1.0, 0, 1, 0]))
        assert isinstance(ev, SwitchEvent)
        assert ev.time == 0.5
        assert (ev.player, ev.from_strategy, ev.to_strategy) == (1, 0, 1)
        assert ev.profile_after == (0, 1)
        np.testing.assert_allclose(ev.state, [1.5, -0.5, 0.5, 0.5])

    def test_pennies_half_dense_oracle(self):
        times, seq = euler_brd(matching_pennies().payoffs, [1.0, 0, 1, 0], (2, 2), 1e-4, 0.6)
        assert seq[:2] == [(0, 0), (0, 1)]
        assert abs(times[0] - 0.5) < 2e-4

    def test_pne(self):
        g = dominant_game()
        from gdx.game import counterfactual_rates

        assert next_switch(g, counterfactual_rates(g, (0, 0))) == ReachedPNE((0, 0))

    def test_hit_tie(self):
        # both players want to leave (0, 0) and reach indifference at the same moment
        a = np.array([[0.0, 0.0], [1.0, 0.0]])
        g = Game(np.stack([a, a.T], axis=-1))
        ev = next_switch(g, np.array([1.0, 0.0, 1.0, 0.0]))
        assert isinstance(ev, HitTie)
        assert ev.time == pytest.approx(1.0)
        assert set(ev.candidates) == {(0, 1), (1, 1)}


class TestSimulate:
    def test_pennies_cycle(self):
        traj = simulate(matching_pennies(), np.array([1.0, 0, 0.5, 0]), max_switches=12)
        assert traj.status is Status.COMPLETED
        assert len(traj.events) == 12 and len(traj.sequence_of_play) == 13
        cyc = [PENNIES_CYCLE[k % 4] for k in range(13)]
        assert traj.sequence_of_play == cyc

    def test_pennies_dense_oracle(self):
        traj = simulate(matching_pennies(), np.array([1.0, 0, 0.5, 0]), max_switches=12)
        exact = traj.switch_times()
        errors = []
        for dt in (1e-3, 1e-4):
            times, seq = euler_brd(matching_pennies().payoffs, [1.0, 0, 0.5, 0], (2, 2), dt, exact[-1] - 0.01)
            assert seq == traj.sequence_of_play[: len(seq)]
            assert len(seq) >= 12
            errors.append(np.max(np.abs(np.array(times) - exact[: len(times)])))
        # forward Euler detects each crossing up to one step late: first order in dt
        assert errors[1] < errors[0] / 5
        assert errors[1] < 1e-2

    def test_shapley_converges_to_cycle(self):
        rng = np.random.default_rng(1)
        traj = simulate(shapley(), rng.standard_normal(6), max_switches=60)
        last = traj.sequence_of_play[-18:]
        assert last[:6] == last[6:12] == last[12:]
        assert set(last) == set(SHAPLEY_CYCLE)
        assert set(detect_period(traj.sequence_of_play)) == set(SHAPLEY_CYCLE)

    def test_reaches_pne(self):
        traj = simulate(dominant_game(), np.array([0.0, 1.0, 0.0, 2.0]))
        assert traj.status is Status.REACHED_PNE
        assert traj.sequence_of_play[-1] == (0, 0)

    def test_ambiguous_start_is_status(self):
        traj = simulate(matching_pennies(), np.zeros(4))
        assert traj.status is Status.AMBIGUOUS_ARGMAX and traj.events == []

    def test_times_increase(self):
        traj = simulate(shapley(), np.arange(6.0), max_switches=30)
        assert np.all(np.diff(traj.switch_times()) > 0)


class TestSectionReturn:
    def test_pennies_returns_start(self, pennies_walk):
        w0 = np.array([0.0, 0.0, 0.0, -1.0])
        np.testing.assert_allclose(section_return(matching_pennies(), w0, pennies_walk), w0, atol=1e-12)

    def test_shapley_eigenvector(self, shapley_game, shapley_walk):
        v = stability_test(shapley_game, shapley_walk)
        w = v.eigvec
        out = section_return(shapley_game, w, shapley_walk)
        assert np.linalg.norm(out - v.lam.real * w) <= 1e-8 * np.linalg.norm(v.lam.real * w)

    def test_not_in_section(self, shapley_walk):
        with pytest.raises(SectionError):
            section_return(shapley(), np.arange(6.0), shapley_walk)

    def test_deviates(self):
        walk = walk_of(PENNIES_3X3, PENNIES_CYCLE)
        w0 = np.array([0.0, 0.0, -1.0, 0.0, -1.0, -5.0])
        with pytest.raises(Deviated) as e:
            section_return(PENNIES_3X3, w0, walk)
        assert 0 <= e.value.step < 4

    def test_in_section(self, pennies_walk):
        g = matching_pennies()
        assert in_section(g, np.array([0.0, 0.0, 0.0, -1.0]), pennies_walk)
        assert not in_section(g, np.array([0.0, -1.0, 0.0, -1.0]), pennies_walk)


class TestDetectPeriod:
    def test_alternating(self):
        a, b = (0,), (1,)
        assert detect_period([a, b] * 3, min_reps=3) == (a, b)

    def test_prefix_ignored(self):
        a, b, c, d = (0,), (1,), (2,), (3,)
        assert detect_period([d, d, c] + [a, b, c] * 3) == (a, b, c)

    def test_none(self):
        assert detect_period([(0,), (1,), (2,)]) is None

    def test_min_reps(self):
        with pytest.raises(ValueError):
            detect_period([(0,)], min_reps=1)


def _generic_start(game, rng):
    return rng.standard_normal(game.dim)


@given(games(max_players=3, max_strategies=3), st.integers(0, 2**32 - 1))
def test_post_switch_is_arc_matrix(game, seed):
    w = _generic_start(game, np.random.default_rng(seed))
    ev = next_switch(game, w)
    assume(isinstance(ev, SwitchEvent))
    graph = build_graph(game)
    m = arc_matrix(game, graph.arc(ev.profile_before, ev.profile_after)).matrix
    expected = m @ w
    assert np.all(np.abs(ev.state - expected) <= 1e-12 * max(1.0, float(np.max(np.abs(expected)))))


@given(games(max_players=3, max_strategies=3), st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_scale_equivariance(game, seed, theta):
    w = _generic_start(game, np.random.default_rng(seed))
    a = simulate(game, w, max_switches=20)
    b = simulate(game, theta * w, max_switches=20)
    assume(a.status is not Status.HIT_TIE and b.status is not Status.HIT_TIE)
    assert a.sequence_of_play == b.sequence_of_play
    np.testing.assert_allclose(b.switch_times(), theta * a.switch_times(), rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(b.terminal, theta * a.terminal, rtol=1e-10, atol=1e-10 * theta)


@given(games(max_players=3, max_strategies=3), st.integers(0, 2**32 - 1), st.floats(-50, 50))
def test_shift_invariance(game, seed, c):
    rng = np.random.default_rng(seed)
    w = _generic_start(game, rng)
    i = int(rng.integers(game.num_players))
    shifted = w.copy()
    shifted[game.block(i)] += c
    a = simulate(game, w, max_switches=20)
    b = simulate(game, shifted, max_switches=20)
    assume(a.status is not Status.HIT_TIE and b.status is not Status.HIT_TIE)
    assert a.sequence_of_play == b.sequence_of_play
    np.testing.assert_allclose(np.diff(b.switch_times()), np.diff(a.switch_times()), rtol=1e-8, atol=1e-8)


@given(games(max_players=3, max_strategies=3), st.integers(0, 2**32 - 1))
def test_play_is_a_walk(game, seed):
    traj = simulate(game, _generic_start(game, np.random.default_rng(seed)), max_switches=40)
    if len(traj.sequence_of_play) >= 2:
        validate_walk(build_graph(game), traj.sequence_of_play, closed=False)
    for ev in traj.events:
        diff = [k for k in range(game.num_players) if ev.profile_before[k] != ev.profile_after[k]]
        assert diff == [ev.player]
