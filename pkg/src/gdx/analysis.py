"""End-to-end analysis of a game: graph, sinks, cycles, verdicts, simulations.

Failures in one stage are recorded on the report and the rest of the
pipeline keeps going. Walks are processed on a thread pool whose size is
capped by the ``GDX_THREADS`` environment variable; results are assembled
in enumeration order, so the report does not depend on scheduling.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from gdx.brd import Status as BrdStatus
from gdx.brd import section_return, simulate
from gdx.errors import GdxError
from gdx.game import Game
from gdx.graph import (
    PreferenceGraph,
    Walk,
    build_graph,
    enumerate_simple_cycles,
    is_sink_cycle,
    sink_equilibria,
)
from gdx.rd import asymptotic_linearity_probe
from gdx.stability import (
    Certificate,
    FourCycleAnalysis,
    StabilityVerdict,
    certify_sink_cycle,
    four_cycle_analysis,
    poincare_matrix,
    stability_test,
)

DEFAULT_SCALES = (10.0, 100.0, 1000.0)
BRD_LAPS = 3
BRD_SCALE = 100.0


def thread_count() -> int:
    cap = os.environ.get("GDX_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


@dataclass
class WalkReport:
    walk: Walk
    is_sink: bool = False
    verdict: StabilityVerdict | None = None
    certificate: Certificate | None = None
    four_cycle: FourCycleAnalysis | None = None
    brd: dict[str, Any] | None = None
    rd_probe: list[dict[str, Any]] | None = None
    errors: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self, game: Game) -> dict[str, Any]:
        return {
            "profiles": [game.profile_label(p) for p in self.walk.profiles],
            "indices": [list(p) for p in self.walk.profiles],
            "weights": list(self.walk.weights()),
            "is_sink": self.is_sink,
            "verdict": None if self.verdict is None else self.verdict.to_dict(),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "four_cycle": None if self.four_cycle is None else self.four_cycle.to_dict(),
            "brd_confirmation": self.brd,
            "rd_probe": self.rd_probe,
            "errors": self.errors,
        }


@dataclass
class AnalysisReport:
    game: Game
    graph: PreferenceGraph = field(repr=False)
    sinks: list[frozenset] = field(default_factory=list)
    walks: list[WalkReport] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, timings: bool = True) -> dict[str, Any]:
        g = self.game
        doc = {
            "game": {
                "name": g.name,
                "players": g.num_players,
                "strategies": [list(r) for r in g.labels],
                "profiles": g.num_profiles,
                "arcs": len(self.graph.arcs),
            },
            "sinks": [[g.profile_label(p) for p in sorted(s)] for s in self.sinks],
            "walks": [w.to_dict(g) for w in self.walks],
            "errors": self.errors,
        }
        if timings:
            doc["timings"] = self.timings
        return doc

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=1) + "\n"


def _err(stage: str, exc: Exception) -> str:
    return f"{stage}: {type(exc).__name__}: {exc}"


def brd_confirmation(game: Game, walk: Walk, verdict: StabilityVerdict, laps: int = BRD_LAPS) -> dict[str, Any]:
    """Run BRD from the scaled eigenvector and compare with the walk and with ``lambda``."""
    vec = verdict.eigvec
    lam = float(verdict.lam.real)
    w0 = BRD_SCALE * vec / np.linalg.norm(vec)
    ret = section_return(game, w0, walk)
    rel = float(np.linalg.norm(ret - lam * w0) / np.linalg.norm(lam * w0))
    k = len(walk)
    traj = simulate(game, w0, max_switches=laps * k, profile=walk.profiles[0])
    expected = [walk.profiles[j % k] for j in range(laps * k + 1)]
    follows = traj.status is BrdStatus.COMPLETED and traj.sequence_of_play == expected
    return {"follows_walk": follows, "laps": laps, "section_return_rel_error": rel}


def _analyze_walk(
    game: Game, graph: PreferenceGraph, walk: Walk, simulate_on: bool, scales: Sequence[float]
) -> WalkReport:
    t0 = time.perf_counter()
    rep = WalkReport(walk)
    try:
        rep.is_sink = is_sink_cycle(graph, walk)
        rep.verdict = stability_test(game, walk)
    except (GdxError, ValueError) as exc:
        rep.errors.append(_err("stability", exc))
    if len(walk) == 4:
        try:
            rep.four_cycle = four_cycle_analysis(game, walk)
        except (GdxError, ValueError) as exc:
            rep.errors.append(_err("four_cycle", exc))
    if rep.is_sink:
        try:
            rep.certificate = certify_sink_cycle(game, walk, graph)
        except (GdxError, ValueError) as exc:
            rep.errors.append(_err("certify", exc))
    if simulate_on and rep.verdict is not None and rep.verdict.stable:
        try:
            rep.brd = brd_confirmation(game, walk, rep.verdict)
        except (GdxError, ValueError) as exc:
            rep.errors.append(_err("brd", exc))
        try:
            pm = poincare_matrix(game, walk).matrix
            probe = asymptotic_linearity_probe(game, walk, rep.verdict.eigvec, scales, poincare=pm)
            rep.rd_probe = [
                {"scale": r.scale, "error": r.error, "image_error": r.image_error, "deviated_step": r.deviated_step}
                for r in probe
            ]
        except (GdxError, ValueError, ArithmeticError) as exc:
            rep.errors.append(_err("rd_probe", exc))
    rep.seconds = time.perf_counter() - t0
    return rep


def run_analysis(
    game: Game,
    max_cycle_len: int = 6,
    simulate: bool = False,
    scales: Sequence[float] = DEFAULT_SCALES,
    threads: int | None = None,
) -> AnalysisReport:
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    graph = build_graph(game)
    timings["graph"] = time.perf_counter() - t0
    report = AnalysisReport(game, graph, timings=timings)

    t0 = time.perf_counter()
    report.sinks = [s.profiles for s in sink_equilibria(graph)]
    timings["sinks"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        walks = list(enumerate_simple_cycles(graph, max_cycle_len))
    except (GdxError, ValueError) as exc:
        report.errors.append(_err("cycles", exc))
        walks = []
    timings["cycles"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    n = threads or thread_count()
    if n > 1 and len(walks) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            report.walks = list(
                pool.map(lambda w: _analyze_walk(game, graph, w, simulate, scales), walks)
            )
    else:
        report.walks = [_analyze_walk(game, graph, w, simulate, scales) for w in walks]
    timings["walks"] = time.perf_counter() - t0
    return report


def format_text(report: AnalysisReport) -> str:
    g = report.game
    lines = [
        f"game: {g.name or 'unnamed'} ({' x '.join(map(str, g.dims))}, {g.num_profiles} profiles, "
        f"{len(report.graph.arcs)} arcs)",
        f"sink equilibria: {len(report.sinks)}",
    ]
    for s in report.sinks:
        lines.append("  {" + ", ".join(g.profile_label(p) for p in sorted(s)) + "}")
    lines.append(f"simple cycles: {len(report.walks)}")
    for wr in report.walks:
        head = " -> ".join(g.profile_label(p) for p in wr.walk.profiles)
        lines.append(f"  [{len(wr.walk)}] {head}{'  (sink)' if wr.is_sink else ''}")
        v = wr.verdict
        if v is not None:
            lam = v.lam
            lam_s = f"{lam.real:.10g}" if lam.imag == 0 else f"{lam.real:.6g}{lam.imag:+.6g}j"
            why = f" ({v.reason.value})" if v.reason is not None else ""
            lines.append(f"      verdict: {v.status.value}{why}, lambda = {lam_s}")
        if wr.certificate is not None:
            lines.append(f"      attractor claim: {wr.certificate.attractor_claim}")
        if wr.four_cycle is not None:
            fc = wr.four_cycle
            fp = ", ".join("(" + ", ".join(f"{v:.6g}" for v in x) + ")" for x in fc.fixed_point)
            extra = "" if fc.persistent else f", witness player {fc.witness[0] + 1} strategy {g.labels[fc.witness[0]][fc.witness[1]]}"
            lines.append(f"      fixed point: {fp}; persistent: {fc.persistent}{extra}")
        if wr.brd is not None:
            lines.append(
                f"      BRD: follows walk for {wr.brd['laps']} laps: {wr.brd['follows_walk']}, "
                f"return vs lambda*w rel. error {wr.brd['section_return_rel_error']:.3g}"
            )
        if wr.rd_probe is not None:
            parts = []
            for r in wr.rd_probe:
                if r["error"] is None:
                    parts.append(f"{r['scale']:g}: deviated at arc {r['deviated_step']}")
                else:
                    parts.append(f"{r['scale']:g}: {r['error']:.4g}")
            lines.append("      RD probe: " + "; ".join(parts))
        for e in wr.errors:
            lines.append(f"      error: {e}")
    for e in report.errors:
        lines.append(f"error: {e}")
    return "\n".join(lines) + "\n"
