"""Decision support for cyber-security budget allocation.

Compares three ways of spending a security budget against commodity attacks:
a full zero-sum game over all control-level schedules, a pure multiple-choice
knapsack over whole levels, and a hybrid that feeds per-control game
equilibria into the knapsack.  See README.md for the model and the CLI.
"""

from .errors import SizingError, SolverError, ValidationError
from .fullgame import FullGameResult, Schedule, enumerate_schedules, prune_dominated, solve_full_game
from .games import (
    AffineTransform,
    Analytic2x2Result,
    Equilibrium,
    LossMatrix,
    OutcomeKind,
    analytic_2x2,
    apply_affine_attacker,
    apply_affine_indirect,
    solve_zero_sum,
    verify_epsilon_equilibrium,
)
from .knapsack import Item, Method, Solution, SweepPoint, budget_sweep, solve_mcmo, tiebreak
from .model import (
    Category,
    Control,
    ControlLevel,
    Depth,
    Scenario,
    Target,
    Vulnerability,
    combined_mitigation,
    defender_loss,
    expected_damage,
    residual_damage,
    validate_scenario,
)
from .scenario import (
    canonical_json,
    generate_case_study,
    load_scenario,
    scenario_to_document,
)
from .subgames import Plan, build_control_matrix, enumerate_plans, render_plan_advice, solve_subgame

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ValidationError", "SolverError", "SizingError",
    "Category", "Depth", "Vulnerability", "Target", "ControlLevel", "Control", "Scenario",
    "validate_scenario", "expected_damage", "defender_loss", "combined_mitigation", "residual_damage",
    "LossMatrix", "Equilibrium", "AffineTransform", "OutcomeKind", "Analytic2x2Result",
    "solve_zero_sum", "verify_epsilon_equilibrium", "analytic_2x2",
    "apply_affine_attacker", "apply_affine_indirect",
    "Plan", "build_control_matrix", "solve_subgame", "enumerate_plans", "render_plan_advice",
    "Item", "Method", "Solution", "SweepPoint", "solve_mcmo", "tiebreak", "budget_sweep",
    "Schedule", "FullGameResult", "enumerate_schedules", "prune_dominated", "solve_full_game",
    "load_scenario", "canonical_json", "scenario_to_document", "generate_case_study",
]
