"""Replicator dynamic in payoff space.

In payoff space the replicator is the exponential-weights flow
``w'_{i,s} = U_i(s; softmax(w_{-i}))``. It is integrated with an adaptive
Dormand-Prince pair. After every accepted step each player's block is
shifted so its maximum is zero; the field is invariant under such shifts
and the accumulated offsets are kept so states can be reported in the
original coordinates.

Sequence of play is read off the per-player argmax with a hysteresis gap:
a player's leading strategy changes only once a challenger is ahead by more
than ``hysteresis``. Change times are located inside the step by root
finding on the re-stepped solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from gdx import _dopri
from gdx.brd import in_section
from gdx.errors import Deviated, SectionError, StepUnderflow
from gdx.game import Game, MixedProfile, Profile, strategy_payoffs
from gdx.graph import Walk

ABS_TOL = 1e-9
REL_TOL = 1e-7
HYSTERESIS = 1e-6
EVENT_XTOL = 1e-10


def payoff_to_strategy(game: Game, w: np.ndarray) -> MixedProfile:
    """Per-player softmax of a payoff-space point."""
    out = []
    for block in game.split(np.asarray(w, dtype=float)):
        e = np.exp(block - block.max())
        out.append(e / e.sum())
    return tuple(out)


def rd_field(game: Game, w: np.ndarray) -> np.ndarray:
    return strategy_payoffs(game, payoff_to_strategy(game, w))


@dataclass
class IntegratorStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0
    max_error: float = 0.0


@dataclass(frozen=True)
class PlayInterval:
    profile: Profile
    entry: float
    exit: float


@dataclass
class RdTrajectory:
    times: np.ndarray
    states: np.ndarray = field(repr=False)
    sequence_of_play: list[PlayInterval]
    stats: IntegratorStats

    @property
    def profiles(self) -> list[Profile]:
        return [iv.profile for iv in self.sequence_of_play]


@dataclass(frozen=True)
class _Step:
    t0: float
    h: float
    y0: np.ndarray
    k0: np.ndarray
    offset0: np.ndarray


class _Replicator:
    """Stepping state of one replicator trajectory."""

    def __init__(self, game: Game, w0: np.ndarray, atol: float, rtol: float):
        if not (atol > 0 and rtol > 0):
            raise ValueError("tolerances must be positive")
        self.game = game
        self.atol, self.rtol = atol, rtol
        self.stats = IntegratorStats()
        self.t = 0.0
        self.offset = np.zeros(game.dim)
        self.y = np.array(w0, dtype=float)
        self._renormalize()
        self.k = self.f(self.y)
        self.h = _dopri.initial_step(self.f, self.y, self.k, atol, rtol)

    def f(self, y: np.ndarray) -> np.ndarray:
        self.stats.evaluations += 1
        return rd_field(self.game, y)

    def _renormalize(self) -> None:
        for i in range(self.game.num_players):
            b = self.game.block(i)
            m = self.y[b].max()
            self.y[b] -= m
            self.offset[b] += m

    @property
    def w(self) -> np.ndarray:
        """Current state in original coordinates."""
        return self.y + self.offset

    def advance(self, h_max: float = np.inf) -> _Step:
        while True:
            h = min(self.h, h_max)
            if h <= 1e-14 * max(1.0, abs(self.t)):
                raise StepUnderflow(f"step size {h:.3g} underflowed at t={self.t:.6g}")
            y_new, err, k_new = _dopri.step(self.f, self.y, h, self.k)
            en = _dopri.error_norm(err, self.y, y_new, self.atol, self.rtol)
            if en <= 1.0:
                break
            self.stats.rejected += 1
            self.h = _dopri.next_step_size(h, en)
        info = _Step(self.t, h, self.y, self.k, self.offset.copy())
        self.stats.accepted += 1
        self.stats.max_error = max(self.stats.max_error, en)
        self.t += h
        self.y = y_new
        self.k = k_new
        self._renormalize()
        if h == self.h:
            self.h = _dopri.next_step_size(h, en)
        return info

    def at(self, step: _Step, tau: float) -> np.ndarray:
        """State ``tau`` into ``step``, in that step's shifted frame."""
        if tau <= 0.0:
            return step.y0
        return _dopri.step(self.f, step.y0, tau, step.k0)[0]

    def root(self, step: _Step, g, lo: float, hi: float) -> float:
        """Local time in ``[lo, hi]`` where ``g(state)`` crosses zero upward."""
        return brentq(lambda tau: g(self.at(step, tau)), lo, hi, xtol=EVENT_XTOL)


def _leader_changes(rep: _Replicator, step: _Step, leaders: list[int], delta: float) -> list[tuple[float, int, int]]:
    """Players whose leading strategy changed during ``step``, as ``(local_time, player, new)``."""
    game = rep.game
    out = []
    for j, block in enumerate(game.split(rep.y)):
        new = int(np.argmax(block))
        old = leaders[j]
        if new == old or block[new] - block[old] <= delta:
            continue
        a, b = game.coord(j, new), game.coord(j, old)
        tau = rep.root(step, lambda y: y[a] - y[b] - delta, 0.0, step.h)
        out.append((tau, j, new))
    out.sort()
    return out


def rd_simulate(
    game: Game,
    w0: np.ndarray,
    t_end: float,
    abs_tol: float = ABS_TOL,
    rel_tol: float = REL_TOL,
    hysteresis: float = HYSTERESIS,
    max_steps: int = 1_000_000,
) -> RdTrajectory:
    """Integrate the replicator from ``w0`` to ``t_end``.

    Samples are taken at every accepted step, in original (unshifted)
    coordinates.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    rep = _Replicator(game, w0, abs_tol, rel_tol)
    leaders = [int(np.argmax(b)) for b in game.split(rep.y)]
    times, states = [0.0], [rep.w]
    play: list[PlayInterval] = []
    current, entry = tuple(leaders), 0.0
    while rep.t < t_end:
        if rep.stats.accepted >= max_steps:
            raise StepUnderflow(f"exceeded {max_steps} steps before t_end")
        step = rep.advance(t_end - rep.t)
        for tau, j, new in _leader_changes(rep, step, leaders, hysteresis):
            t_switch = step.t0 + tau
            play.append(PlayInterval(current, entry, t_switch))
            leaders[j] = new
            current, entry = tuple(leaders), t_switch
        times.append(rep.t)
        states.append(rep.w)
    play.append(PlayInterval(current, entry, rep.t))
    return RdTrajectory(np.array(times), np.array(states), play, rep.stats)


@dataclass(frozen=True)
class SectionReturn:
    point: np.ndarray
    time: float
    stats: IntegratorStats


def default_time_budget(game: Game, w: np.ndarray, walk: Walk) -> float:
    w_min = min(a.weight for a in walk.arcs)
    return 1e4 * len(walk) * (1.0 + float(np.max(np.abs(w)))) / w_min


def rd_section_return(
    game: Game,
    w: np.ndarray,
    walk: Walk,
    abs_tol: float = ABS_TOL,
    rel_tol: float = REL_TOL,
    hysteresis: float = HYSTERESIS,
    t_max: float | None = None,
) -> SectionReturn:
    """Replicator return map on a walk's section.

    Starts at ``w`` (where ``p_K`` and ``p_1`` are both best responses) with
    ``p_1`` in play, follows the replicator through one lap of the walk and
    returns the state, in original coordinates, where ``p_1`` catches up with
    ``p_K`` again.

    Raises
    ------
    SectionError
        ``w`` is not in the section.
    Deviated
        Play left the walk (``step`` indexes the arc that was not followed)
        or the lap did not close within ``t_max``.
    """
    w = np.asarray(w, dtype=float)
    if not in_section(game, w, walk):
        raise SectionError("point is not in the walk's return section")
    if t_max is None:
        t_max = default_time_budget(game, w, walk)
    k = len(walk)
    closing = walk.arcs[-1]
    a = game.coord(closing.player, closing.to_strategy)
    b = game.coord(closing.player, closing.from_strategy)

    def gap(y: np.ndarray) -> float:
        return y[a] - y[b]

    rep = _Replicator(game, w, abs_tol, rel_tol)
    leaders = list(walk.profiles[0])
    idx = 0
    while True:
        if rep.t > t_max:
            raise Deviated(idx, f"lap not closed by t={t_max:.3g}")
        step = rep.advance()
        lo = 0.0
        for tau, j, new in _leader_changes(rep, step, leaders, hysteresis):
            if idx == k - 1 and gap(rep.at(step, tau)) >= 0.0:
                break
            leaders[j] = new
            if tuple(leaders) != walk.profiles[(idx + 1) % k] or idx == k - 1:
                raise Deviated(idx, f"played {tuple(leaders)}")
            idx += 1
            lo = tau
        if idx == k - 1 and gap(rep.y) >= 0.0:
            tau = rep.root(step, gap, lo, step.h)
            point = rep.at(step, tau) + step.offset0
            return SectionReturn(point, step.t0 + tau, rep.stats)


@dataclass(frozen=True)
class ProbeResult:
    """One probe scale.

    ``error`` is measured against the scale of the starting point;
    ``image_error`` is the same distance relative to ``||M_c g w||``.
    """

    scale: float
    error: float | None
    image_error: float | None = None
    deviated_step: int | None = None


def asymptotic_linearity_probe(
    game: Game,
    walk: Walk,
    w_unit: np.ndarray,
    scales: Sequence[float],
    poincare: np.ndarray | None = None,
    **kwargs,
) -> list[ProbeResult]:
    """Distance between the replicator and BRD return maps at growing scales.

    ``w_unit`` is normalized to unit Euclidean length; for each scale ``g``
    the error is ``||RD_H(g w) - M_c g w|| / g``. A deviation from the walk is
    recorded instead of an error.
    """
    from gdx.stability import poincare_matrix

    w_unit = np.asarray(w_unit, dtype=float)
    w_unit = w_unit / np.linalg.norm(w_unit)
    m = poincare_matrix(game, walk).matrix if poincare is None else poincare
    results = []
    for g in scales:
        if not g > 0:
            raise ValueError("scales must be positive")
        w0 = g * w_unit
        try:
            ret = rd_section_return(game, w0, walk, **kwargs)
        except Deviated as exc:
            results.append(ProbeResult(float(g), None, None, exc.step))
            continue
        image = m @ w0
        dist = float(np.linalg.norm(ret.point - image))
        results.append(ProbeResult(float(g), dist / g, dist / float(np.linalg.norm(image))))
    return results
