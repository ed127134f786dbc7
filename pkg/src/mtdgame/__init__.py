"""Zero-sum attacker/defender Markov games built from attack graphs."""

from .attack_graph import (
    AgEdge,
    AgNode,
    AttackGraph,
    EdgeKind,
    NodeKind,
    enumerate_attack_paths,
    load_attack_graph,
    validate_graph,
)
from .catalog import AccessComplexity, VulnRecord, ac_to_probability, load_catalog
from .countermeasure import (
    Placement,
    SweepReport,
    evaluate_placement,
    naive_placement,
    run_sweep,
    strategic_placement,
)
from .game import GameConfig, MarkovGame, build_game, restrict_game
from .matrix_game import MatrixSolution, pure_minimax, solve_matrix_game
from .scenarios import ScenarioSpec, generate_scenario, paper_fixture
from .solver import (
    EquilibriumSolution,
    bellman_residual,
    q_matrix,
    shapley_backup,
    solve_exact,
    solve_monotone,
    solve_pure,
)

__all__ = [
    "AccessComplexity",
    "AgEdge",
    "AgNode",
    "AttackGraph",
    "EdgeKind",
    "EquilibriumSolution",
    "GameConfig",
    "MarkovGame",
    "MatrixSolution",
    "NodeKind",
    "Placement",
    "ScenarioSpec",
    "SweepReport",
    "VulnRecord",
    "ac_to_probability",
    "bellman_residual",
    "build_game",
    "enumerate_attack_paths",
    "evaluate_placement",
    "generate_scenario",
    "load_attack_graph",
    "load_catalog",
    "naive_placement",
    "paper_fixture",
    "pure_minimax",
    "q_matrix",
    "restrict_game",
    "run_sweep",
    "shapley_backup",
    "solve_exact",
    "solve_matrix_game",
    "solve_monotone",
    "solve_pure",
    "strategic_placement",
    "validate_graph",
]
