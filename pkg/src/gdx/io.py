"""Game files and random game generation.

Game files are JSON documents::

    {
      "schema_version": 1,
      "players": 3,
      "strategies": [["H", "T"], ["H", "T"], ["H", "T"]],
      "payoffs": [[1, 1, 0], [1, 0, 1], ...]
    }

``payoffs`` lists one utility vector per pure profile in row-major order,
the last player's index varying fastest. For a 2x2x2 game the order is
(H,H,H), (H,H,T), (H,T,H), (H,T,T), (T,H,H), (T,H,T), (T,T,H), (T,T,T).

Floats are written with ``repr`` precision, so saving and reloading
reproduces the tensor bit for bit.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from gdx.errors import GameError, GameFileError, RetriesExhausted
from gdx.game import Game

SCHEMA_VERSION = 1
DISTRIBUTIONS = ("uniform01", "gauss")
MAX_RETRIES = 100


def game_to_dict(game: Game) -> dict[str, Any]:
    flat = game.payoffs.reshape(game.num_profiles, game.num_players)
    return {
        "schema_version": SCHEMA_VERSION,
        "players": game.num_players,
        "name": game.name,
        "strategies": [list(row) for row in game.labels],
        "payoffs": [[float(v) for v in row] for row in flat],
    }


def game_from_dict(doc: Any) -> Game:
    """Build a game from a parsed game-file document, checking the schema."""
    if not isinstance(doc, dict):
        raise GameFileError("top level must be an object")
    for key in ("schema_version", "players", "strategies", "payoffs"):
        if key not in doc:
            raise GameFileError(f"missing field {key!r}")
    version = doc["schema_version"]
    if version != SCHEMA_VERSION:
        raise GameFileError(f"field 'schema_version': unsupported version {version!r}, expected {SCHEMA_VERSION}")
    n = doc["players"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise GameFileError(f"field 'players': expected a positive integer, got {n!r}")
    strategies = doc["strategies"]
    if not isinstance(strategies, list) or len(strategies) != n:
        raise GameFileError(f"field 'strategies': expected {n} label lists")
    for i, row in enumerate(strategies):
        if not isinstance(row, list) or not all(isinstance(s, str) for s in row):
            raise GameFileError(f"field 'strategies[{i}]': expected a list of strings")
        if len(row) < 2:
            raise GameFileError(f"field 'strategies[{i}]': every player needs at least 2 strategies")
    dims = [len(row) for row in strategies]
    expected = math.prod(dims)
    payoffs = doc["payoffs"]
    if not isinstance(payoffs, list):
        raise GameFileError("field 'payoffs': expected a list")
    if len(payoffs) != expected:
        raise GameFileError(
            f"field 'payoffs': expected {expected} profile entries for dims {dims}, got {len(payoffs)}"
        )
    for k, row in enumerate(payoffs):
        if not isinstance(row, list) or len(row) != n:
            raise GameFileError(f"field 'payoffs[{k}]': expected a list of {n} numbers")
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise GameFileError(f"field 'payoffs[{k}]': {v!r} is not a number")
            if not math.isfinite(v):
                raise GameFileError(f"field 'payoffs[{k}]': non-finite payoff {v!r}")
    tensor = np.array(payoffs, dtype=float).reshape(*dims, n)
    name = doc.get("name", "")
    try:
        return Game(tensor, strategies, name=str(name) if name else "")
    except GameError as exc:
        raise GameFileError(str(exc)) from exc


def _reject_constant(token: str) -> float:
    raise GameFileError(f"non-finite payoff {token}")


def load_game(path: str | os.PathLike) -> Game:
    text = Path(path).read_text()
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise GameFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return game_from_dict(doc)
    except GameFileError as exc:
        raise GameFileError(f"{path}: {exc}") from exc


def dumps_game(game: Game) -> str:
    return json.dumps(game_to_dict(game), indent=1, allow_nan=False) + "\n"


def save_game(game: Game, path: str | os.PathLike) -> None:
    Path(path).write_text(dumps_game(game))


def is_generic(game: Game) -> bool:
    """No player is indifferent across any unilateral deviation."""
    u = game.payoffs
    for i in range(game.num_players):
        ui = np.moveaxis(u[..., i], i, -1)
        s = np.sort(ui, axis=-1)
        if np.any(s[..., 1:] == s[..., :-1]):
            return False
    return True


def random_game(dims: Sequence[int], seed: int, distribution: str = "uniform01") -> Game:
    """I.i.d. random payoffs, deterministic in ``seed``.

    A draw with an exact tie in some player's unilateral deviation payoffs is
    discarded and redrawn from ``seed + 1``, and so on.
    """
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise GameError(f"every player needs at least 2 strategies, got dims {list(dims)}")
    if distribution not in DISTRIBUTIONS:
        raise GameError(f"unknown distribution {distribution!r}; choose from {', '.join(DISTRIBUTIONS)}")
    shape = dims + (len(dims),)
    for attempt in range(MAX_RETRIES):
        rng = np.random.default_rng(seed + attempt)
        u = rng.random(shape) if distribution == "uniform01" else rng.standard_normal(shape)
        game = Game(u, name=f"random-{'x'.join(map(str, dims))}-{seed + attempt}")
        if is_generic(game):
            return game
    raise RetriesExhausted(f"no generic game in {MAX_RETRIES} draws from seed {seed}")
