"""Event-driven best-response dynamics in payoff space.

While a pure profile ``p`` is the unique argmax of ``w``, every coordinate
moves at the constant rate ``counterfactual_rates(p)``, so trajectories are
piecewise linear and switching times have closed forms. No time stepping.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from gdx.errors import AmbiguousArgmax, Deviated, SectionError
from gdx.game import Game, Profile, counterfactual_rates
from gdx.graph import Walk

TIE_RTOL = 1e-9
SECTION_MARGIN = 1e-12


@dataclass(frozen=True)
class SwitchEvent:
    time: float
    player: int
    from_strategy: int
    to_strategy: int
    profile_before: Profile
    profile_after: Profile
    state: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class ReachedPNE:
    profile: Profile


@dataclass(frozen=True)
class HitTie:
    time: float
    candidates: tuple[tuple[int, int], ...]


class Status(enum.Enum):
    COMPLETED = "completed"
    HIT_TIE = "hit_tie"
    REACHED_PNE = "reached_pne"
    AMBIGUOUS_ARGMAX = "ambiguous_argmax"


@dataclass
class BrdTrajectory:
    start: np.ndarray
    events: list[SwitchEvent]
    sequence_of_play: list[Profile]
    terminal: np.ndarray
    terminal_time: float
    status: Status

    def switch_times(self) -> np.ndarray:
        return np.array([e.time for e in self.events])


def unique_argmax(game: Game, w: np.ndarray, margin: float = SECTION_MARGIN) -> Profile:
    """The argmax profile of ``w``, or ``AmbiguousArgmax`` if any block is tied within ``margin``."""
    w = np.asarray(w, dtype=float)
    scale = max(1.0, float(np.max(np.abs(w))))
    p = []
    for i, block in enumerate(game.split(w)):
        order = np.argsort(block)
        if block[order[-1]] - block[order[-2]] <= margin * scale:
            raise AmbiguousArgmax(f"player {i} has a tied argmax")
        p.append(int(order[-1]))
    return tuple(p)


def next_switch(
    game: Game, w: np.ndarray, profile: Sequence[int] | None = None, time: float = 0.0
) -> SwitchEvent | ReachedPNE | HitTie:
    """First best-response switch from ``w``.

    ``profile`` is the profile currently played. When omitted it is taken as
    the argmax of ``w``, which must then be unique. Passing it explicitly lets
    callers continue from a point that sits exactly on the switching
    hyperplane just crossed.
    """
    w = np.asarray(w, dtype=float)
    p = unique_argmax(game, w) if profile is None else game.check_profile(profile)
    rates = counterfactual_rates(game, p)
    best = np.inf
    cands: list[tuple[float, int, int]] = []
    for i in range(game.num_players):
        cur = game.coord(i, p[i])
        for s in range(game.dims[i]):
            if s == p[i]:
                continue
            k = game.coord(i, s)
            gain = rates[k] - rates[cur]
            if gain <= 0.0:
                continue
            tau = max((w[cur] - w[k]) / gain, 0.0)
            cands.append((tau, i, s))
            best = min(best, tau)
    if not cands:
        return ReachedPNE(p)
    tol = TIE_RTOL * (1.0 + abs(time + best))
    first = [c for c in cands if c[0] - best <= tol]
    if len(first) > 1:
        return HitTie(time + best, tuple((i, s) for _, i, s in first))
    tau, i, s = first[0]
    q = p[:i] + (s,) + p[i + 1 :]
    return SwitchEvent(time + tau, i, p[i], s, p, q, w + rates * tau)


def simulate(
    game: Game,
    w0: np.ndarray,
    max_switches: int | None = None,
    profile: Sequence[int] | None = None,
) -> BrdTrajectory:
    """Run BRD from ``w0`` for at most ``max_switches`` switches.

    Stops early on a strict pure Nash equilibrium (the trajectory then runs
    forever without switching) or on a near-simultaneous switch.
    """
    w0 = np.array(w0, dtype=float)
    if max_switches is None:
        max_switches = 10 * game.dim * game.num_profiles
    try:
        p = unique_argmax(game, w0) if profile is None else game.check_profile(profile)
    except AmbiguousArgmax:
        return BrdTrajectory(w0, [], [], w0.copy(), 0.0, Status.AMBIGUOUS_ARGMAX)
    w, t = w0, 0.0
    events: list[SwitchEvent] = []
    play = [p]
    status = Status.COMPLETED
    while len(events) < max_switches:
        ev = next_switch(game, w, p, t)
        if isinstance(ev, ReachedPNE):
            status = Status.REACHED_PNE
            break
        if isinstance(ev, HitTie):
            status = Status.HIT_TIE
            break
        events.append(ev)
        w, t, p = ev.state, ev.time, ev.profile_after
        play.append(p)
    return BrdTrajectory(w0, events, play, w, t, status)


def in_section(game: Game, w: np.ndarray, walk: Walk, margin: float = SECTION_MARGIN) -> bool:
    """Whether both ``p_1`` and ``p_K`` are argmaxes of ``w`` and every other strategy is strictly lower."""
    first, last = walk.profiles[0], walk.profiles[-1]
    w = np.asarray(w, dtype=float)
    scale = max(1.0, float(np.max(np.abs(w))))
    for i, block in enumerate(game.split(w)):
        top = {first[i], last[i]}
        vals = [block[s] for s in top]
        if max(vals) - min(vals) > margin * scale:
            return False
        others = [block[s] for s in range(len(block)) if s not in top]
        if others and max(others) >= min(vals) - margin * scale:
            return False
    return True


def section_return(game: Game, w: np.ndarray, walk: Walk) -> np.ndarray:
    """BRD Poincare return map on the section of ``walk``.

    Starting from ``w`` in the section (tie between ``p_K`` and ``p_1``),
    plays ``p_1`` and follows BRD for one lap. Returns the point where the
    ``p_K -> p_1`` switch recurs.

    Raises
    ------
    SectionError
        ``w`` is not in the section.
    Deviated
        The realized sequence of play left the walk; ``step`` is the index
        of the first arc not followed.
    """
    w = np.asarray(w, dtype=float)
    if not in_section(game, w, walk):
        raise SectionError("point is not in the walk's return section")
    k = len(walk)
    p, t = walk.profiles[0], 0.0
    for step in range(k):
        ev = next_switch(game, w, p, t)
        if not isinstance(ev, SwitchEvent):
            raise Deviated(step, type(ev).__name__)
        expected = walk.profiles[(step + 1) % k]
        if ev.profile_after != expected:
            raise Deviated(step, f"switched to {ev.profile_after}, expected {expected}")
        w, t, p = ev.state, ev.time, ev.profile_after
    return w


def detect_period(seq: Sequence[Profile], min_reps: int = 2) -> tuple[Profile, ...] | None:
    """Smallest period repeated at least ``min_reps`` times at the end of ``seq``.

    The returned cycle is rotated to start at its lexicographically smallest
    rotation, so runs entering the same cycle at different points agree.
    """
    if min_reps < 2:
        raise ValueError("min_reps must be at least 2")
    seq = list(seq)
    n = len(seq)
    for period in range(1, n // min_reps + 1):
        tail = seq[n - period * min_reps :]
        if all(tail[j] == tail[j + period] for j in range(len(tail) - period)):
            cyc = seq[n - period :]
            return canonical_rotation(cyc)
    return None


def canonical_rotation(cycle: Sequence[Profile]) -> tuple[Profile, ...]:
    cycle = list(cycle)
    return min(tuple(cycle[i:] + cycle[:i]) for i in range(len(cycle)))
