"""Preference graphs, sink equilibria and walks.

Nodes are pure profiles. There is an arc ``p -> q`` whenever ``p`` and ``q``
differ in one player's strategy and that player weakly gains by the move;
its weight is the gain. Zero-weight (tie) arcs appear in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from gdx.errors import MissingArc, NonAdjacent, NotSimpleCycle, WrongDirection
from gdx.game import Game, Profile


@dataclass(frozen=True)
class Arc:
    source: Profile
    target: Profile
    player: int
    weight: float

    @property
    def from_strategy(self) -> int:
        return self.source[self.player]

    @property
    def to_strategy(self) -> int:
        return self.target[self.player]

    @property
    def is_tie(self) -> bool:
        return self.weight == 0.0


@dataclass(frozen=True)
class Walk:
    """A periodic walk ``p_1, ..., p_K`` (wrapping back to ``p_1``).

    ``arcs[i]`` joins ``profiles[i]`` to ``profiles[(i + 1) % K]``.
    """

    profiles: tuple[Profile, ...]
    arcs: tuple[Arc, ...]

    def __len__(self) -> int:
        return len(self.profiles)

    @property
    def is_simple(self) -> bool:
        return len(set(self.profiles)) == len(self.profiles)

    def weights(self) -> tuple[float, ...]:
        return tuple(a.weight for a in self.arcs)


@dataclass(frozen=True)
class SinkComponent:
    profiles: frozenset[Profile]

    @property
    def is_singleton(self) -> bool:
        return len(self.profiles) == 1

    def sorted(self) -> list[Profile]:
        return sorted(self.profiles)


@dataclass(frozen=True, eq=False)
class PreferenceGraph:
    game: Game
    arcs: tuple[Arc, ...]
    out_arcs: dict[Profile, tuple[Arc, ...]] = field(repr=False)
    _lookup: dict[tuple[Profile, Profile], Arc] = field(repr=False)

    @property
    def nodes(self) -> list[Profile]:
        return list(self.game.profiles())

    def arc(self, source: Sequence[int], target: Sequence[int]) -> Arc | None:
        return self._lookup.get((tuple(source), tuple(target)))

    def adjacency(self, positive_only: bool = False) -> csr_matrix:
        """Sparse 0/1 adjacency matrix indexed by row-major profile index."""
        n = self.game.num_profiles
        idx = self.game.profile_index
        pairs = [(idx(a.source), idx(a.target)) for a in self.arcs if not (positive_only and a.is_tie)]
        if not pairs:
            return csr_matrix((n, n), dtype=np.int8)
        rows, cols = zip(*pairs)
        return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))


def build_graph(game: Game) -> PreferenceGraph:
    arcs = []
    out: dict[Profile, list[Arc]] = {}
    for p in game.profiles():
        out[p] = []
        up = game.utility(p)
        for i in range(game.num_players):
            for s in range(game.dims[i]):
                if s == p[i]:
                    continue
                q = p[:i] + (s,) + p[i + 1 :]
                gain = float(game.utility(q)[i] - up[i])
                if gain >= 0.0:
                    arc = Arc(p, q, i, gain)
                    arcs.append(arc)
                    out[p].append(arc)
    lookup = {(a.source, a.target): a for a in arcs}
    return PreferenceGraph(game, tuple(arcs), {p: tuple(v) for p, v in out.items()}, lookup)


def strongly_connected_components(graph: PreferenceGraph) -> list[frozenset[Profile]]:
    """SCCs ordered by their smallest profile."""
    n, labels = connected_components(graph.adjacency(), directed=True, connection="strong")
    groups: dict[int, list[Profile]] = {}
    for idx, label in enumerate(labels):
        groups.setdefault(int(label), []).append(graph.game.profile_at(idx))
    return sorted((frozenset(v) for v in groups.values()), key=min)


def sink_equilibria(graph: PreferenceGraph) -> list[SinkComponent]:
    """Strongly connected components with no arc leaving them.

    Tie arcs run both ways, so they never leave a component; a component is
    a sink exactly when it has no outgoing positive-weight arc.
    """
    sinks = []
    for comp in strongly_connected_components(graph):
        if all(a.target in comp for p in comp for a in graph.out_arcs[p]):
            sinks.append(SinkComponent(comp))
    return sinks


def validate_walk(graph: PreferenceGraph, profiles: Sequence[Sequence[int]], closed: bool = True) -> Walk:
    """Resolve the arcs joining consecutive profiles.

    With ``closed=True`` (the default) the sequence wraps around and the
    result is a periodic walk; with ``closed=False`` it is checked as an open
    path and the returned ``Walk.arcs`` has one entry fewer than profiles.

    Raises
    ------
    NonAdjacent, WrongDirection, MissingArc
        Carrying the index ``i`` of the first bad transition ``i -> i + 1``.
    """
    game = graph.game
    seq = tuple(game.check_profile(p) for p in profiles)
    if closed and len(seq) < 2:
        raise ValueError("a periodic walk needs at least 2 profiles")
    n = len(seq) if closed else len(seq) - 1
    arcs = []
    for i in range(n):
        p, q = seq[i], seq[(i + 1) % len(seq)]
        diff = [j for j in range(game.num_players) if p[j] != q[j]]
        if len(diff) != 1:
            raise NonAdjacent(i)
        arc = graph.arc(p, q)
        if arc is None:
            if graph.arc(q, p) is not None:
                raise WrongDirection(i)
            raise MissingArc(i)
        arcs.append(arc)
    return Walk(seq, tuple(arcs))


def is_sink_cycle(graph: PreferenceGraph, walk: Walk) -> bool:
    """True iff each cycle node has exactly one outgoing arc, the cycle arc, of positive weight."""
    if not walk.is_simple:
        raise NotSimpleCycle("walk repeats a profile")
    for p, arc in zip(walk.profiles, walk.arcs):
        out = graph.out_arcs[p]
        if len(out) != 1 or out[0] != arc or arc.is_tie:
            return False
    return True


def enumerate_simple_cycles(graph: PreferenceGraph, max_len: int) -> Iterator[Walk]:
    """Yield each simple directed cycle of length ``<= max_len`` once.

    Only positive-weight arcs are followed. Each cycle starts at its
    lexicographically smallest profile.
    """
    if max_len < 2:
        return
    game = graph.game
    idx = game.profile_index
    succ: dict[Profile, list[Arc]] = {
        p: sorted((a for a in arcs if not a.is_tie), key=lambda a: idx(a.target))
        for p, arcs in graph.out_arcs.items()
    }
    for start in game.profiles():
        s = idx(start)
        path = [start]
        path_arcs: list[Arc] = []
        on_path = {start}
        stack = [iter(succ[start])]
        while stack:
            arc = next(stack[-1], None)
            if arc is None:
                stack.pop()
                if path_arcs:
                    path_arcs.pop()
                    on_path.discard(path.pop())
                continue
            t = arc.target
            if t == start:
                yield Walk(tuple(path), tuple(path_arcs) + (arc,))
            elif idx(t) > s and t not in on_path and len(path) < max_len:
                path.append(t)
                path_arcs.append(arc)
                on_path.add(t)
                stack.append(iter(succ[t]))
