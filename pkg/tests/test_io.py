import json

import numpy as np
import pytest
from conftest import games
from hypothesis import given

from gdx.builtins import jordan, shapley
from gdx.errors import GameError, GameFileError
from gdx.game import Game
from gdx.io import dumps_game, game_from_dict, game_to_dict, is_generic, load_game, random_game, save_game


@given(games())
def test_round_trip_bitwise(game):
    back = game_from_dict(json.loads(dumps_game(game)))
    assert np.array_equal(back.payoffs, game.payoffs)
    assert back.labels == game.labels


def test_save_and_load(tmp_path):
    path = tmp_path / "jordan.json"
    save_game(jordan(), path)
    g = load_game(path)
    assert g == jordan() and g.name == "jordan"


def test_profile_order_last_player_fastest():
    doc = game_to_dict(shapley())
    assert doc["payoffs"][1] == list(shapley().payoffs[0, 1])
    assert doc["players"] == 2 and doc["schema_version"] == 1


def test_wrong_profile_count():
    doc = game_to_dict(shapley())
    doc["payoffs"] = doc["payoffs"][:-1]
    with pytest.raises(GameFileError, match="expected 9 profile entries for dims \\[3, 3\\], got 8"):
        game_from_dict(doc)


@pytest.mark.parametrize(
    "mutate,match",
    [
        (lambda d: d.pop("players"), "missing field 'players'"),
        (lambda d: d.update(schema_version=7), "unsupported version"),
        (lambda d: d.update(players=True), "positive integer"),
        (lambda d: d["strategies"].append(["a", "b"]), "expected 2 label lists"),
        (lambda d: d["strategies"].__setitem__(0, ["only"]), "at least 2 strategies"),
        (lambda d: d["payoffs"][0].append(1.0), "list of 2 numbers"),
        (lambda d: d["payoffs"][3].__setitem__(0, "x"), "is not a number"),
    ],
)
def test_schema_diagnostics(mutate, match):
    doc = game_to_dict(shapley())
    mutate(doc)
    with pytest.raises(GameFileError, match=match):
        game_from_dict(doc)


def test_non_finite_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(dumps_game(shapley()).replace("0.0", "NaN", 1))
    with pytest.raises(GameFileError, match="non-finite"):
        load_game(path)


def test_json_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"players": 2,\n  oops}')
    with pytest.raises(GameFileError, match="line 2 column 3"):
        load_game(path)


def test_random_game_deterministic():
    a, b = random_game([3, 3], 11), random_game([3, 3], 11)
    assert np.array_equal(a.payoffs, b.payoffs)
    assert not np.array_equal(a.payoffs, random_game([3, 3], 12).payoffs)
    g = random_game([2, 3, 2], 5, "gauss")
    assert g.dims == (2, 3, 2) and g.num_players == 3


def test_random_games_generic():
    for seed in range(1000):
        assert is_generic(random_game([2, 2], seed))


def test_is_generic_detects_tie():
    assert is_generic(shapley())
    assert not is_generic(Game(np.zeros((2, 2, 2))))


@pytest.mark.parametrize("dims,dist", [([1, 2], "uniform01"), ([], "uniform01"), ([2, 2], "cauchy")])
def test_random_game_rejects(dims, dist):
    with pytest.raises(GameError):
        random_game(dims, 0, dist)
