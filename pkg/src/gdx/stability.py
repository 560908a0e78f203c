"""Arc matrices, Poincare matrices and the spectral stability test.

For an arc ``a = p -> q`` in which player ``i`` moves from ``s1`` to ``s2``
with gain ``W``, the arc matrix ``M_a = I + u(p) c_a^T`` with
``c_a = (e_{i,s1} - e_{i,s2}) / W`` maps a payoff point whose argmax is ``p``
to the point where best-response dynamics makes that switch; ``c_a^T w`` is
the time spent getting there. The Poincare matrix of a walk is the product
of its arc matrices (last arc leftmost) and is the exact linear return map of
BRD on the section where ``p_K`` and ``p_1`` are both best responses.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from gdx.errors import EigenError, NotSimpleCycle, TheoremViolation, ZeroWeightArc
from gdx.game import Game, Profile, counterfactual_rates, expected_utility, strategy_payoffs
from gdx.graph import Arc, PreferenceGraph, Walk, build_graph, is_sink_cycle


class DegenerateWeights(ZeroWeightArc):
    pass


@dataclass(frozen=True)
class ArcMatrix:
    matrix: np.ndarray = field(repr=False)
    arc: Arc
    covector: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)
    coords: tuple[int, int] = (0, 0)


def arc_covector(game: Game, arc: Arc) -> np.ndarray:
    if not arc.weight > 0.0:
        raise ZeroWeightArc()
    c = np.zeros(game.dim)
    c[game.coord(arc.player, arc.from_strategy)] = 1.0 / arc.weight
    c[game.coord(arc.player, arc.to_strategy)] = -1.0 / arc.weight
    return c


def arc_matrix(game: Game, arc: Arc) -> ArcMatrix:
    c = arc_covector(game, arc)
    u = counterfactual_rates(game, arc.source)
    m = np.eye(game.dim) + np.outer(u, c)
    coords = (game.coord(arc.player, arc.from_strategy), game.coord(arc.player, arc.to_strategy))
    return ArcMatrix(m, arc, c, u, coords)


@dataclass(frozen=True)
class PoincareMatrix:
    matrix: np.ndarray = field(repr=False)
    walk: Walk
    arc_matrices: tuple[ArcMatrix, ...] = field(repr=False)
    partial_products: tuple[np.ndarray, ...] = field(repr=False)

    def trace(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Switch points and dwell times of one BRD lap from section point ``w``.

        Returns ``points`` of shape ``(K + 1, D)``, where ``points[i]`` is the
        state when ``p_{i+1}`` starts being played (``points[0] = w``,
        ``points[K] = M_c w``), and ``dwell`` of shape ``(K,)`` with the time
        spent on each profile.
        """
        w = np.asarray(w, dtype=float)
        k = len(self.arc_matrices)
        points = np.empty((k + 1, w.size))
        dwell = np.empty(k)
        points[0] = w
        for i, am in enumerate(self.arc_matrices):
            dwell[i] = am.covector @ points[i]
            points[i + 1] = am.matrix @ points[i]
        return points, dwell

    def exact(self, ctx: mpmath.MPContext) -> mpmath.matrix:
        """The same product in ``ctx``'s precision.

        Rates are taken exactly from their binary values and each arc's gain
        is recomputed as their exact difference, so ``c_a^T u(p) = -1`` holds
        to working precision and the spectral structure is not blurred by
        rounding in the double-precision product.
        """
        d = self.matrix.shape[0]
        prod = ctx.eye(d)
        for am in self.arc_matrices:
            a, b = am.coords
            u = [ctx.mpf(float(x)) for x in am.rates]
            gain = u[b] - u[a]
            m = ctx.eye(d)
            for r in range(d):
                m[r, a] += u[r] / gain
                m[r, b] -= u[r] / gain
            prod = m * prod
        return prod


def poincare_matrix(game: Game, walk: Walk) -> PoincareMatrix:
    mats = []
    for idx, arc in enumerate(walk.arcs):
        try:
            mats.append(arc_matrix(game, arc))
        except ZeroWeightArc:
            raise ZeroWeightArc(idx) from None
    prod = np.eye(game.dim)
    prefixes = []
    for am in mats:
        prod = am.matrix @ prod
        prefixes.append(prod)
    return PoincareMatrix(prod, walk, tuple(mats), tuple(prefixes))


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray = field(repr=False)
    simple: bool
    dominant: bool
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def gap(self) -> float:
        """``|lambda_1| - |lambda_2|``."""
        mods = np.abs(self.eigenvalues)
        return float(mods[0] - mods[1]) if mods.size > 1 else float(mods[0])


CLUSTER_RTOL = 1e-3
EXACT_DIGITS = (50, 80, 30)


def _needs_refinement(vals: np.ndarray) -> bool:
    # defective eigenvalues split by roughly eps**(1/m) in double precision
    if abs(abs(vals[0]) - 1.0) < CLUSTER_RTOL:
        return True
    for j in range(vals.size):
        for k in range(j + 1, vals.size):
            if abs(vals[j] - vals[k]) <= CLUSTER_RTOL * max(1.0, abs(vals[j]), abs(vals[k])):
                return True
    return False


def _eig_refined(a: np.ndarray, exact) -> tuple[np.ndarray, np.ndarray]:
    # mpmath's QR occasionally stalls at one precision and converges at another
    for digits in EXACT_DIGITS:
        ctx = mpmath.MPContext()
        ctx.dps = digits
        m = exact(ctx) if exact is not None else ctx.matrix(a.tolist())
        try:
            vals, vecs = ctx.eig(m)
            break
        except (RuntimeError, ZeroDivisionError) as exc:
            failure = exc
    else:
        raise EigenError(f"high-precision eigensolver failed: {failure}")
    n = a.shape[0]
    vals = np.array([complex(v) for v in vals])
    vecs = np.array([[complex(vecs[r, c]) for c in range(n)] for r in range(n)])
    return vals, vecs


def dominant_eigenpair(matrix: np.ndarray, tol: float = 1e-8, exact=None) -> EigenPair:
    """Maximum-modulus eigenpair of a general square matrix.

    ``dominant``: the top modulus exceeds every other by a relative gap
    greater than ``tol``. ``simple``: no other eigenvalue lies within ``tol``
    (relative) of the top one. The eigenvector is scaled so its
    largest-magnitude entry equals +1; it is returned real when the
    eigenvalue is real.

    When the double-precision spectrum has clustered eigenvalues or a top
    modulus near 1, the decomposition is redone in multiprecision.
    ``exact`` may supply the matrix for that pass as a callable taking an
    mpmath context; otherwise ``matrix`` itself is converted.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise EigenError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise EigenError("matrix has non-finite entries")
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise EigenError(str(exc)) from exc
    order = np.argsort(-np.abs(vals), kind="stable")
    if _needs_refinement(vals[order]):
        vals, vecs = _eig_refined(a, exact)
        order = np.argsort(-np.abs(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    top = vals[0]
    scale = abs(top)
    if vals.size == 1:
        simple = dominant = True
    else:
        dominant = scale > 0 and (scale - abs(vals[1])) > tol * scale
        simple = int(np.sum(np.abs(vals - top) <= tol * max(scale, 1.0))) == 1
    v = vecs[:, 0]
    v = v / v[np.argmax(np.abs(v))]
    if abs(top.imag) <= 1e-10 * max(scale, 1e-300):
        top = complex(top.real, 0.0)
        v = v.real.copy()
    return EigenPair(complex(top), v, bool(simple), bool(dominant), vals)


def left_eigenvector(matrix: np.ndarray, value: float) -> np.ndarray:
    """Real left eigenvector ``z`` with ``z^T M = value z^T`` (the dual eigenvector)."""
    vals, vecs = np.linalg.eig(np.asarray(matrix, dtype=float).T)
    k = int(np.argmin(np.abs(vals - value)))
    z = vecs[:, k].real
    return z / np.max(np.abs(z))


@dataclass(frozen=True)
class Tolerances:
    dominance: float = 1e-8
    realness: float = 1e-10
    unit_margin: float = 1e-10
    dwell: float = 1e-10
    section: float = 1e-10


class Status(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class Reason(enum.Enum):
    COMPLEX_EIGENVALUE = "complex_eigenvalue"
    NOT_DOMINANT = "not_dominant"
    NOT_SIMPLE = "not_simple"
    EIGENVALUE_NOT_ABOVE_ONE = "eigenvalue_not_above_one"
    UNIT_SPECTRAL_RADIUS = "unit_spectral_radius"
    ARGMAX_VIOLATION = "argmax_violation"
    DWELL_VIOLATION = "dwell_violation"
    BOUNDARY_DWELL = "boundary_dwell"


@dataclass(frozen=True)
class StabilityVerdict:
    status: Status
    reason: Reason | None
    index: int | None
    lam: complex
    eigvec: np.ndarray | None = field(repr=False)
    dwell_times: np.ndarray | None = field(repr=False)
    dominance_gap: float
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def stable(self) -> bool:
        return self.status is Status.STABLE

    def to_dict(self) -> dict:
        lam = self.lam
        return {
            "status": self.status.value,
            "reason": None if self.reason is None else self.reason.value,
            "index": self.index,
            "lambda": lam.real if lam.imag == 0 else [lam.real, lam.imag],
            "eigvec": None if self.eigvec is None else [float(v) for v in self.eigvec],
            "dwell_times": None if self.dwell_times is None else [float(t) for t in self.dwell_times],
            "dominance_gap": self.dominance_gap,
        }


def _section_failure(
    game: Game, walk: Walk, points: np.ndarray, dwell: np.ndarray, tols: Tolerances
) -> tuple[Reason, int] | None:
    """First violated condition along one lap, or None.

    At ``points[i]`` the switch ``p_i -> p_{i+1}`` (``p_0 = p_K``) has just
    happened: for every player the block maximum must be attained within
    those two profiles' strategies and everything else must be strictly
    lower. The dwell time on each profile must be strictly positive.
    """
    scale = float(np.max(np.abs(points[0])))
    margin = tols.section * scale
    k = len(walk)
    for i in range(k):
        prev, cur = walk.profiles[i - 1], walk.profiles[i]
        for j, block in enumerate(game.split(points[i])):
            allowed = {prev[j], cur[j]}
            top = max(block[s] for s in allowed)
            if block[cur[j]] < top - margin:
                return Reason.ARGMAX_VIOLATION, i
            others = [block[s] for s in range(len(block)) if s not in allowed]
            if others and max(others) >= top - margin:
                return Reason.ARGMAX_VIOLATION, i
        if dwell[i] <= tols.dwell * scale:
            if dwell[i] >= -tols.dwell * scale:
                return Reason.BOUNDARY_DWELL, i
            return Reason.DWELL_VIOLATION, i
    return None


def stability_test(
    game: Game, walk: Walk, tols: Tolerances | None = None, pm: PoincareMatrix | None = None
) -> StabilityVerdict:
    """Spectral stability test for a periodic walk under BRD (and hence RD).

    Stable iff the Poincare matrix has a real, simple, dominant eigenvalue
    ``lambda > 1`` whose eigenvector, followed around one lap, keeps each
    profile of the walk as the strict best response and spends positive time
    on each.
    """
    tols = tols or Tolerances()
    pm = pm or poincare_matrix(game, walk)
    ep = dominant_eigenpair(pm.matrix, tols.dominance, exact=pm.exact)
    lam = ep.value
    gap = ep.gap

    def verdict(status, reason=None, index=None, vec=None, dwell=None):
        return StabilityVerdict(status, reason, index, lam, vec, dwell, gap, ep.eigenvalues)

    mod = abs(lam)
    if abs(mod - 1.0) <= tols.unit_margin:
        return verdict(Status.MARGINAL, Reason.UNIT_SPECTRAL_RADIUS)
    if abs(lam.imag) > tols.realness * mod:
        return verdict(Status.UNSTABLE, Reason.COMPLEX_EIGENVALUE)
    if not ep.dominant:
        return verdict(Status.UNSTABLE, Reason.NOT_DOMINANT)
    if not ep.simple:
        return verdict(Status.UNSTABLE, Reason.NOT_SIMPLE)
    if lam.real <= 1.0 + tols.unit_margin:
        return verdict(Status.UNSTABLE, Reason.EIGENVALUE_NOT_ABOVE_ONE)

    base = np.real(ep.vector)
    # sign ambiguity: try the orientation with nonnegative first dwell time first
    first_dwell = pm.arc_matrices[0].covector @ base
    signs = (1.0, -1.0) if first_dwell >= 0 else (-1.0, 1.0)
    outcomes = []
    for sign in signs:
        vec = sign * base
        points, dwell = pm.trace(vec)
        fail = _section_failure(game, walk, points, dwell, tols)
        if fail is None:
            return verdict(Status.STABLE, vec=vec, dwell=dwell)
        outcomes.append((fail, vec, dwell))
    for (reason, index), vec, dwell in outcomes:
        if reason is Reason.BOUNDARY_DWELL:
            return verdict(Status.MARGINAL, reason, index, vec, dwell)
    (reason, index), vec, dwell = outcomes[0]
    return verdict(Status.UNSTABLE, reason, index, vec, dwell)


def rotate_walk(walk: Walk, i: int) -> Walk:
    """The same walk started at profile ``i``."""
    k = len(walk)
    if not 0 <= i < k:
        raise IndexError(f"rotation {i} out of range for walk of length {k}")
    return Walk(walk.profiles[i:] + walk.profiles[:i], walk.arcs[i:] + walk.arcs[:i])


@dataclass(frozen=True)
class FourCycleAnalysis:
    players: tuple[int, int]
    strategies: tuple[tuple[int, int], tuple[int, int]]
    fixed_point: tuple[np.ndarray, np.ndarray]
    full_profile: tuple[np.ndarray, ...] = field(repr=False)
    persistent: bool
    witness: tuple[int, int] | None
    excess: float

    def to_dict(self) -> dict:
        return {
            "players": list(self.players),
            "strategies": [list(s) for s in self.strategies],
            "fixed_point": [[float(v) for v in x] for x in self.fixed_point],
            "persistent": self.persistent,
            "witness": None if self.witness is None else list(self.witness),
            "excess": self.excess,
        }


def four_cycle_analysis(game: Game, walk: Walk, rtol: float = 1e-10) -> FourCycleAnalysis:
    """Interior fixed point of a 4-cycle's 2x2 subgame and its Nash test.

    Each of the two cycle players has one arc at each of the opponent's two
    strategies. Indifference of player A requires the opponent to put weight
    on strategy ``b`` proportional to the weight of A's arc at the other
    strategy ``b'``. The cycle is persistent iff no strategy of any player
    beats its owner's fixed-point payoff (the fixed point is a Nash
    equilibrium of the whole game).
    """
    if len(walk) != 4:
        raise ValueError("four_cycle_analysis needs a walk of length 4")
    for idx, arc in enumerate(walk.arcs):
        if not arc.weight > 0.0:
            raise DegenerateWeights(idx)
    players = tuple(sorted({a.player for a in walk.arcs}))
    if len(players) != 2:
        raise ValueError("a 4-cycle must involve exactly two deviating players")
    strategies = tuple(tuple(sorted({p[j] for p in walk.profiles})) for j in players)
    if any(len(s) != 2 for s in strategies):
        raise ValueError("4-cycle does not span a 2x2 subgame")
    others = [j for j in range(game.num_players) if j not in players]
    if any(len({p[j] for p in walk.profiles}) != 1 for j in others):
        raise ValueError("a non-deviating player changes strategy along the cycle")

    mix = []
    for me, opp in ((0, 1), (1, 0)):
        # weight of my arc, keyed by the opponent's strategy it sits at
        at = {a.source[players[opp]]: a.weight for a in walk.arcs if a.player == players[me]}
        b0, b1 = strategies[opp]
        total = at[b0] + at[b1]
        mix.append((opp, np.array([at[b1] / total, at[b0] / total])))
    fixed = [None, None]
    for opp, x in mix:
        fixed[opp] = x

    full = []
    base = walk.profiles[0]
    for j in range(game.num_players):
        xj = np.zeros(game.dims[j])
        if j in players:
            k = players.index(j)
            xj[list(strategies[k])] = fixed[k]
        else:
            xj[base[j]] = 1.0
        full.append(xj)
    full = tuple(full)

    value = expected_utility(game, full)
    payoffs = strategy_payoffs(game, full)
    scale = max(1.0, float(np.max(np.abs(game.payoffs))))
    witness, excess = None, 0.0
    for j in range(game.num_players):
        gains = payoffs[game.block(j)] - value[j]
        s = int(np.argmax(gains))
        if gains[s] > rtol * scale and gains[s] > excess:
            witness, excess = (j, s), float(gains[s])
    return FourCycleAnalysis(
        players, strategies, (fixed[0], fixed[1]), full, witness is None, witness, excess
    )


@dataclass(frozen=True)
class Certificate:
    is_sink: bool
    verdict: StabilityVerdict
    attractor_claim: bool
    four_cycle: FourCycleAnalysis | None = None

    def to_dict(self) -> dict:
        return {
            "is_sink": self.is_sink,
            "attractor_claim": self.attractor_claim,
            "verdict": self.verdict.to_dict(),
            "four_cycle": None if self.four_cycle is None else self.four_cycle.to_dict(),
        }


def certify_sink_cycle(
    game: Game, walk: Walk, graph: PreferenceGraph | None = None, tols: Tolerances | None = None
) -> Certificate:
    """Check a simple cycle for the sink property and certify its stability.

    A sink cycle longer than four must pass the spectral test; failing it
    raises ``TheoremViolation``. A sink 4-cycle spans a 2x2 sink subgame,
    which attracts the replicator but is only persistent, so the verdict is
    not Stable and the 4-cycle analysis is attached instead.
    """
    if not walk.is_simple:
        raise NotSimpleCycle("certify_sink_cycle needs a simple cycle")
    for idx, arc in enumerate(walk.arcs):
        if not arc.weight > 0.0:
            raise ZeroWeightArc(idx)
    graph = graph or build_graph(game)
    sink = is_sink_cycle(graph, walk)
    verdict = stability_test(game, walk, tols)
    if not sink:
        return Certificate(False, verdict, False)
    if len(walk) == 4:
        return Certificate(True, verdict, True, four_cycle_analysis(game, walk))
    if not verdict.stable:
        raise TheoremViolation(
            f"sink cycle of length {len(walk)} failed the spectral test: "
            f"{verdict.status.value} ({verdict.reason})"
        )
    return Certificate(True, verdict, True)


def interior_section_point(game: Game, walk: Walk, rng: np.random.Generator, depth: Sequence[float] = (0.1, 1.0)) -> np.ndarray:
    """Random point in the interior of a walk's return section.

    ``p_1`` and ``p_K`` strategies sit at 0 for every player and every other
    strategy is placed uniformly in ``-depth``.
    """
    first, last = walk.profiles[0], walk.profiles[-1]
    w = np.empty(game.dim)
    for j in range(game.num_players):
        for s in range(game.dims[j]):
            if s in (first[j], last[j]):
                w[game.coord(j, s)] = 0.0
            else:
                w[game.coord(j, s)] = -rng.uniform(*depth)
    return w
