"""Command-line interface.

Exit status: 0 on success, 2 for invalid games, game files or arguments,
3 for numerical failures (integrator underflow, eigensolver failure, a sink
cycle failing its certificate), 1 for anything else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from gdx import analysis, export, io
from gdx.brd import detect_period, simulate
from gdx.builtins import BUILTINS, builtin
from gdx.errors import GameError, GdxError, NumericalError
from gdx.game import Game
from gdx.graph import build_graph
from gdx.rd import rd_simulate

EXIT_OK, EXIT_OTHER, EXIT_SCHEMA, EXIT_NUMERICAL = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def resolve_game(source: str) -> Game:
    """A game file path, or a builtin name with optional ``:a,b,c`` parameters."""
    if os.path.exists(source):
        return io.load_game(source)
    name, _, params = source.partition(":")
    if name in BUILTINS:
        try:
            values = [float(v) for v in params.split(",")] if params else []
        except ValueError:
            raise GameError(f"bad builtin parameters {params!r}") from None
        return builtin(name, *values)
    raise GameError(f"{source!r} is neither a game file nor a builtin ({', '.join(sorted(BUILTINS))})")


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    game = resolve_game(args.game)
    report = analysis.run_analysis(
        game, max_cycle_len=args.max_cycle_len, simulate=args.simulate, scales=args.scales
    )
    if args.format == "machine":
        _emit(report.to_json(timings=not args.no_timings), args.output)
    else:
        _emit(analysis.format_text(report), args.output)
    return EXIT_OK


def _start_point(game: Game, args) -> np.ndarray:
    if args.w0 is not None:
        w0 = np.asarray(args.w0, dtype=float)
        if w0.shape != (game.dim,):
            raise GameError(f"--w0 needs {game.dim} coordinates, got {w0.size}")
        return w0
    rng = np.random.default_rng(args.seed)
    return args.scale * rng.standard_normal(game.dim)


def cmd_simulate(args) -> int:
    game = resolve_game(args.game)
    w0 = _start_point(game, args)
    if args.dynamic == "brd":
        traj = simulate(game, w0, max_switches=args.switches)
        seq = traj.sequence_of_play
        summary = {
            "dynamic": "brd",
            "status": traj.status.value,
            "switches": len(traj.events),
            "time": traj.terminal_time,
            "terminal": [float(v) for v in traj.terminal],
        }
        csv_text = export.brd_csv(game, traj)
    else:
        traj = rd_simulate(game, w0, args.t_end)
        seq = traj.profiles
        summary = {
            "dynamic": "rd",
            "steps": traj.stats.accepted,
            "rejected": traj.stats.rejected,
            "time": float(traj.times[-1]),
            "terminal": [float(v) for v in traj.states[-1]],
        }
        csv_text = export.rd_samples_csv(game, traj)
        if args.intervals:
            Path(args.intervals).write_text(export.play_intervals_csv(game, traj))
    period = detect_period(seq) if len(seq) >= 2 else None
    summary["start"] = [float(v) for v in w0]
    summary["sequence_of_play"] = [list(p) for p in seq]
    summary["period"] = None if period is None else [list(p) for p in period]
    if args.csv:
        Path(args.csv).write_text(csv_text)
    if args.format == "machine":
        _emit(json.dumps(summary, sort_keys=True, indent=1) + "\n", args.output)
    else:
        lines = [f"{k}: {summary[k]}" for k in ("dynamic", "time") if k in summary]
        if "status" in summary:
            lines.append(f"status: {summary['status']} after {summary['switches']} switches")
        lines.append(f"profiles played: {len(seq)}")
        if period is None:
            lines.append("no repeating period detected")
        else:
            lines.append(f"period {len(period)}: " + " -> ".join(game.profile_label(p) for p in period))
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_graph(args) -> int:
    game = resolve_game(args.game)
    graph = build_graph(game)
    if args.format == "machine":
        arcs = [
            {"from": list(a.source), "to": list(a.target), "player": a.player, "weight": a.weight}
            for a in graph.arcs
        ]
        _emit(json.dumps({"arcs": arcs}, sort_keys=True, indent=1) + "\n", args.output)
    else:
        _emit(export.export_dot(graph), args.output)
    return EXIT_OK


def cmd_builtin(args) -> int:
    _emit(io.dumps_game(resolve_game(args.name)), args.output)
    return EXIT_OK


def cmd_random(args) -> int:
    game = io.random_game(args.dims, args.seed, args.distribution)
    _emit(io.dumps_game(game), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdx", description="Stability of periodic play under best-response and replicator dynamics."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, game=True):
        if game:
            p.add_argument("game", help="game file, or builtin name such as shapley or jordan_weighted:1,2,3")
        p.add_argument("--format", choices=("text", "machine"), default="text")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")

    p = sub.add_parser("analyze", help="sinks, cycles and stability verdicts")
    common(p)
    p.add_argument("--max-cycle-len", type=int, default=6)
    p.add_argument("--simulate", action="store_true", help="confirm stable verdicts by BRD and RD runs")
    p.add_argument("--scales", type=_floats, default=list(analysis.DEFAULT_SCALES))
    p.add_argument("--no-timings", action="store_true", help="omit timing fields from machine output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run BRD or RD from a start point")
    common(p)
    p.add_argument("--dynamic", choices=("brd", "rd"), default="brd")
    p.add_argument("--switches", type=int, default=None, help="BRD switch budget")
    p.add_argument("--t-end", type=float, default=100.0, help="RD end time")
    p.add_argument("--seed", type=int, default=0, help="seed for the random start point")
    p.add_argument("--scale", type=float, default=10.0, help="scale of the random start point")
    p.add_argument("--w0", type=_floats, default=None, help="explicit start point, comma-separated")
    p.add_argument("--csv", help="write the trajectory CSV here")
    p.add_argument("--intervals", help="RD only: write the play-interval CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("graph", help="preference graph as DOT")
    common(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("builtin", help="write a builtin game as a game file")
    p.add_argument("name")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_builtin)

    p = sub.add_parser("random", help="write a random generic game as a game file")
    p.add_argument("--dims", type=_ints, required=True, help="strategy counts, e.g. 3,3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distribution", choices=io.DISTRIBUTIONS, default="uniform01")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_random)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GameError as exc:
        print(f"gdx: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except NumericalError as exc:
        print(f"gdx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GdxError, OSError) as exc:
        print(f"gdx: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
