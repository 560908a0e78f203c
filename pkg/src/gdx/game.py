"""Finite N-player normal-form games and utility evaluation.

Payoffs are held in a dense array of shape ``dims + (N,)`` so that
``payoffs[p]`` is the utility vector of pure profile ``p``. Flattening the
profile axes in C order gives the canonical row-major profile order (last
player's index varies fastest) used by game files and graph node ids.

A point in payoff space is a flat float array of length ``sum(dims)``; player
``i`` owns the slice ``game.block(i)``.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from gdx.errors import GameError

Profile = tuple[int, ...]
MixedProfile = tuple[np.ndarray, ...]


class Game:
    """An N-player normal-form game with a total payoff tensor.

    Parameters
    ----------
    payoffs : array_like
        Array of shape ``(|S_1|, ..., |S_N|, N)``.
    labels : sequence of sequence of str, optional
        Strategy names per player. Purely cosmetic; defaults to ``s1, s2, ...``.
    name : str, optional
    """

    def __init__(self, payoffs, labels: Sequence[Sequence[str]] | None = None, name: str = ""):
        u = np.array(payoffs, dtype=float)
        if u.ndim < 2:
            raise GameError("payoff array needs at least one strategy axis and a utility axis")
        dims = u.shape[:-1]
        if u.shape[-1] != len(dims):
            raise GameError(
                f"utility axis has length {u.shape[-1]} but there are {len(dims)} players"
            )
        if any(d < 2 for d in dims):
            raise GameError(f"every player needs at least 2 strategies, got dims {dims}")
        if not np.all(np.isfinite(u)):
            raise GameError("payoffs must be finite")
        u.setflags(write=False)
        self.payoffs = u
        self.dims: tuple[int, ...] = tuple(int(d) for d in dims)
        if labels is None:
            labels = [[f"s{k + 1}" for k in range(d)] for d in self.dims]
        labels = tuple(tuple(str(s) for s in row) for row in labels)
        if tuple(len(row) for row in labels) != self.dims:
            raise GameError("strategy label counts do not match payoff dimensions")
        self.labels: tuple[tuple[str, ...], ...] = labels
        self.name = name
        self.offsets: tuple[int, ...] = tuple(int(o) for o in np.concatenate([[0], np.cumsum(self.dims)]))

    @property
    def num_players(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        """Dimension of payoff space, ``sum(|S_i|)``."""
        return self.offsets[-1]

    @property
    def num_profiles(self) -> int:
        return int(np.prod(self.dims))

    def block(self, player: int) -> slice:
        return slice(self.offsets[player], self.offsets[player + 1])

    def coord(self, player: int, strategy: int) -> int:
        """Flat payoff-space index of ``(player, strategy)``."""
        return self.offsets[player] + strategy

    def profiles(self) -> Iterator[Profile]:
        """All pure profiles in row-major order."""
        return itertools.product(*(range(d) for d in self.dims))

    def profile_index(self, p: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(p), self.dims))

    def profile_at(self, index: int) -> Profile:
        return tuple(int(k) for k in np.unravel_index(index, self.dims))

    def check_profile(self, p: Sequence[int]) -> Profile:
        p = tuple(int(k) for k in p)
        if len(p) != self.num_players or any(not 0 <= k < d for k, d in zip(p, self.dims)):
            raise GameError(f"profile {p} is not valid for dims {self.dims}")
        return p

    def utility(self, p: Sequence[int]) -> np.ndarray:
        return self.payoffs[tuple(p)]

    def split(self, w: np.ndarray) -> list[np.ndarray]:
        """View a payoff-space vector as per-player blocks."""
        return [w[self.block(i)] for i in range(self.num_players)]

    def profile_label(self, p: Sequence[int]) -> str:
        return "(" + ",".join(self.labels[i][k] for i, k in enumerate(p)) + ")"

    @cached_property
    def _rate_table(self) -> np.ndarray:
        table = np.empty((self.num_profiles, self.dim))
        for idx, p in enumerate(self.profiles()):
            for i in range(self.num_players):
                q = list(p)
                for s in range(self.dims[i]):
                    q[i] = s
                    table[idx, self.offsets[i] + s] = self.payoffs[tuple(q)][i]
        table.setflags(write=False)
        return table

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.payoffs, other.payoffs)

    def __hash__(self) -> int:
        return hash((self.dims, self.payoffs.tobytes()))

    def __repr__(self) -> str:
        dims = "x".join(map(str, self.dims))
        return f"Game({self.name or 'unnamed'}, {dims})"


def check_mixed(game: Game, x: Sequence[Sequence[float]], tol: float = 1e-12) -> MixedProfile:
    """Validate a mixed profile and return it as a tuple of float arrays."""
    if len(x) != game.num_players:
        raise GameError(f"mixed profile has {len(x)} players, game has {game.num_players}")
    out = []
    for i, xi in enumerate(x):
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (game.dims[i],):
            raise GameError(f"player {i} distribution has shape {xi.shape}, expected ({game.dims[i]},)")
        if np.any(xi < 0) or abs(xi.sum() - 1.0) > tol:
            raise GameError(f"player {i} distribution is not a probability vector")
        out.append(xi)
    return tuple(out)


def pure_as_mixed(game: Game, p: Sequence[int]) -> MixedProfile:
    p = game.check_profile(p)
    return tuple(np.eye(d)[k] for d, k in zip(game.dims, p))


def product_distribution(x: Sequence[np.ndarray]) -> np.ndarray:
    """Product distribution over pure profiles; ``z[p] = prod_i x[i][p_i]``."""
    z = np.ones(())
    for xi in x:
        z = np.multiply.outer(z, np.asarray(xi, dtype=float))
    return z


def expected_utility(game: Game, x: Sequence[Sequence[float]]) -> np.ndarray:
    """Expected utility vector of a mixed profile.

    Contracts the payoff tensor one player axis at a time, so a pure profile
    returns its tensor entry exactly.
    """
    x = check_mixed(game, x)
    res = game.payoffs
    for xi in x:
        res = np.tensordot(xi, res, axes=(0, 0))
    return res


def counterfactual_rates(game: Game, p: Sequence[int]) -> np.ndarray:
    """Payoff-space velocity of best-response dynamics while ``p`` is played.

    Coordinate ``(i, s)`` is ``u_i(s; p_{-i})``.
    """
    p = game.check_profile(p)
    return game._rate_table[game.profile_index(p)].copy()


def best_response_sets(game: Game, w: np.ndarray) -> tuple[frozenset[int], ...]:
    """Per-player sets of strategies attaining the block maximum of ``w`` (exact comparison)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (game.dim,):
        raise GameError(f"payoff point has shape {w.shape}, expected ({game.dim},)")
    out = []
    for block in game.split(w):
        m = block.max()
        out.append(frozenset(int(s) for s in np.flatnonzero(block == m)))
    return tuple(out)


def restrict_subgame(
    game: Game, subsets: Sequence[Sequence[int]]
) -> tuple[Game, tuple[tuple[int, ...], ...]]:
    """Restrict each player to a subset of strategies.

    Returns the subgame and, per player, the original index of each retained
    strategy (subgame index ``k`` maps to ``index_maps[i][k]``).
    """
    if len(subsets) != game.num_players:
        raise GameError("need one strategy subset per player")
    index_maps = []
    for i, sub in enumerate(subsets):
        sub = tuple(sorted({int(s) for s in sub}))
        if not sub:
            raise GameError(f"empty strategy subset for player {i}")
        if sub[0] < 0 or sub[-1] >= game.dims[i]:
            raise GameError(f"strategy subset for player {i} out of range")
        index_maps.append(sub)
    payoffs = game.payoffs[np.ix_(*index_maps, range(game.num_players))]
    labels = [[game.labels[i][s] for s in sub] for i, sub in enumerate(index_maps)]
    return Game(payoffs, labels, name=f"{game.name}|sub" if game.name else ""), tuple(index_maps)


def strategy_payoffs(game: Game, x: Sequence[np.ndarray]) -> np.ndarray:
    """Payoff-space vector of ``U_i(s; x_{-i})`` for every ``(i, s)``.

    Each player's own distribution is ignored. No validation, this is on the
    replicator's hot path.
    """
    out = np.empty(game.dim)
    for i, spec in enumerate(_einsum_specs(game.dims)):
        operands = [game.payoffs[..., i]] + [x[j] for j in range(game.num_players) if j != i]
        out[game.block(i)] = np.einsum(spec, *operands)
    return out


_SPEC_CACHE: dict[tuple[int, ...], list[str]] = {}


def _einsum_specs(dims: tuple[int, ...]) -> list[str]:
    specs = _SPEC_CACHE.get(dims)
    if specs is None:
        letters = "abcdefghijklmnopqrstuvwxyz"[: len(dims)]
        specs = [
            ",".join([letters] + [c for j, c in enumerate(letters) if j != i]) + "->" + letters[i]
            for i in range(len(dims))
        ]
        _SPEC_CACHE[dims] = specs
    return specs
