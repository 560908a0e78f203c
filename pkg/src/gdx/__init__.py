"""Stability of periodic play in normal-form games.

Builds preference graphs, simulates best-response and replicator dynamics in
payoff space, and decides whether a periodic walk is a stable limit cycle by
a spectral test on its Poincare matrix.
"""

from gdx.brd import next_switch, section_return, simulate
from gdx.builtins import builtin
from gdx.game import Game, best_response_sets, counterfactual_rates, expected_utility, product_distribution
from gdx.graph import build_graph, enumerate_simple_cycles, is_sink_cycle, sink_equilibria, validate_walk
from gdx.io import load_game, random_game, save_game
from gdx.rd import asymptotic_linearity_probe, rd_section_return, rd_simulate
from gdx.stability import (
    arc_matrix,
    certify_sink_cycle,
    four_cycle_analysis,
    poincare_matrix,
    rotate_walk,
    stability_test,
)

__version__ = "0.1.0"

__all__ = [
    "Game",
    "arc_matrix",
    "asymptotic_linearity_probe",
    "best_response_sets",
    "build_graph",
    "builtin",
    "certify_sink_cycle",
    "counterfactual_rates",
    "enumerate_simple_cycles",
    "expected_utility",
    "four_cycle_analysis",
    "is_sink_cycle",
    "load_game",
    "next_switch",
    "poincare_matrix",
    "product_distribution",
    "random_game",
    "rd_section_return",
    "rd_simulate",
    "rotate_walk",
    "save_game",
    "section_return",
    "simulate",
    "sink_equilibria",
    "stability_test",
    "validate_walk",
]
