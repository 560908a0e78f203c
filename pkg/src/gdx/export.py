"""Text exports: preference graphs as DOT, trajectories as CSV.

Output order depends only on profile and coordinate indices, so the same
inputs always give byte-identical text.
"""

from __future__ import annotations

import csv
import io

from gdx.brd import BrdTrajectory
from gdx.game import Game
from gdx.graph import PreferenceGraph, sink_equilibria
from gdx.rd import RdTrajectory, payoff_to_strategy


def _coord_names(game: Game, prefix: str) -> list[str]:
    return [
        f"{prefix}{i + 1}_{game.labels[i][s]}"
        for i in range(game.num_players)
        for s in range(game.dims[i])
    ]


def _num(x: float) -> str:
    return repr(float(x))


def export_dot(graph: PreferenceGraph, name: str | None = None) -> str:
    """Graphviz digraph of the preference graph.

    Nodes are labeled with strategy tuples and arcs with their weight. Nodes
    in a sink equilibrium are filled; zero-weight arcs are dashed.
    """
    game = graph.game
    title = (name or game.name or "game").replace('"', "'")
    sink_nodes = {p for comp in sink_equilibria(graph) for p in comp.profiles}
    ids = {p: f"n{game.profile_index(p)}" for p in graph.nodes}
    lines = [f'digraph "{title}" {{', "  node [shape=box];"]
    for p in graph.nodes:
        style = ', style=filled, fillcolor="lightblue", penwidth=2' if p in sink_nodes else ""
        lines.append(f'  {ids[p]} [label="{game.profile_label(p)}"{style}];')
    for arc in sorted(graph.arcs, key=lambda a: (game.profile_index(a.source), game.profile_index(a.target))):
        style = ", style=dashed" if arc.is_tie else ""
        lines.append(f'  {ids[arc.source]} -> {ids[arc.target]} [label="{arc.weight:g}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def brd_csv(game: Game, traj: BrdTrajectory) -> str:
    """One row per switch event: time, player, from, to, then the state at the switch."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["time", "player", "from", "to", *_coord_names(game, "w")])
    for ev in traj.events:
        labels = game.labels[ev.player]
        out.writerow(
            [_num(ev.time), ev.player + 1, labels[ev.from_strategy], labels[ev.to_strategy]]
            + [_num(v) for v in ev.state]
        )
    return buf.getvalue()


def rd_samples_csv(game: Game, traj: RdTrajectory) -> str:
    """One row per integrator sample: time, payoff coordinates, softmax coordinates."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["time", *_coord_names(game, "w"), *_coord_names(game, "x")])
    for t, w in zip(traj.times, traj.states):
        x = [v for block in payoff_to_strategy(game, w) for v in block]
        out.writerow([_num(t)] + [_num(v) for v in w] + [_num(v) for v in x])
    return buf.getvalue()


def play_intervals_csv(game: Game, traj: RdTrajectory) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["profile", "entry", "exit"])
    for iv in traj.sequence_of_play:
        out.writerow([game.profile_label(iv.profile), _num(iv.entry), _num(iv.exit)])
    return buf.getvalue()
