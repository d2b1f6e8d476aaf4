"""Per-control games and their solutions as deployable plans.

A control game pits one control's levels 0..cap against every target.  Its
mixed-strategy solution is a *plan*: a distribution over levels priced at its
expected direct cost and carrying the expected per-target mitigation.  Plans
are the items the hybrid knapsack chooses between, and a mixed plan reads as
partial deployment across devices ranked by importance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .games import LossMatrix, solve_zero_sum
from .model import Scenario

__all__ = [
    "Plan",
    "build_control_matrix",
    "solve_subgame",
    "enumerate_plans",
    "render_plan_advice",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Plan:
    """One control's (possibly mixed) implementation at a level cap."""

    control_id: int
    level_cap: int
    strategy: np.ndarray  # over levels 0..level_cap
    expected_direct_cost: float
    mitigation: np.ndarray  # per target, sum of strategy-weighted efficacies
    guaranteed_loss: float

    def __post_init__(self):
        strategy = np.asarray(self.strategy, dtype=float)
        mitigation = np.asarray(self.mitigation, dtype=float)
        strategy.setflags(write=False)
        mitigation.setflags(write=False)
        object.__setattr__(self, "strategy", strategy)
        object.__setattr__(self, "mitigation", mitigation)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.strategy > 1e-9))

    @property
    def is_pure(self) -> bool:
        return len(self.support) == 1


def build_control_matrix(scenario: Scenario, control_id: int, level_cap: int) -> LossMatrix:
    """Loss matrix of one control's game: rows levels 0..cap, columns all targets."""
    control = scenario.control(control_id)
    if not 0 <= level_cap <= control.top_level:
        raise ValidationError(
            f"level cap {level_cap}: out of range for control {control_id} "
            f"with levels 0..{control.top_level}"
        )
    eff = control.efficacy_matrix[: level_cap + 1]
    losses = scenario.base_damage * (1.0 - eff) + control.indirect_costs[: level_cap + 1, None]
    return LossMatrix(
        entries=losses,
        row_labels=tuple(f"level {l}" for l in range(level_cap + 1)),
        col_labels=scenario.target_labels,
    )


def _undominated_rows(entries: np.ndarray) -> list[int]:
    """Rows no other row weakly dominates (ties keep the lowest level)."""
    m = entries.shape[0]
    keep = []
    for i in range(m):
        dominated = False
        for k in range(m):
            if k == i:
                continue
            diff = entries[k] - entries[i]
            if np.all(diff <= 0) and (np.any(diff < 0) or k < i):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return keep


def solve_subgame(scenario: Scenario, control_id: int, level_cap: int) -> Plan:
    """Solve one control's level-capped game and package it as a Plan.

    Weakly dominated levels are dropped before the solve so that the returned
    strategy is supported on levels that actually earn their place (with zero
    indirect cost and monotone efficacy this collapses to the top level).
    """
    matrix = build_control_matrix(scenario, control_id, level_cap)
    control = scenario.control(control_id)
    rows = _undominated_rows(matrix.entries)
    eq = solve_zero_sum(matrix.entries[rows])

    strategy = np.zeros(level_cap + 1)
    strategy[rows] = eq.defender
    mitigation = strategy @ control.efficacy_matrix[: level_cap + 1]
    return Plan(
        control_id=control_id,
        level_cap=level_cap,
        strategy=strategy,
        expected_direct_cost=float(strategy @ control.direct_costs[: level_cap + 1]),
        mitigation=mitigation,
        guaranteed_loss=eq.value,
    )


def enumerate_plans(scenario: Scenario, control_id: int) -> list[Plan]:
    """One Plan per level cap 0..L; cap 0 is the null plan."""
    control = scenario.control(control_id)
    plans = [solve_subgame(scenario, control_id, cap) for cap in range(control.top_level + 1)]
    for prev, nxt in zip(plans, plans[1:]):
        if nxt.expected_direct_cost < prev.expected_direct_cost - 1e-9:
            logger.warning(
                "control %s: expected plan cost drops from %.6g (cap %d) to %.6g (cap %d)",
                control_id,
                prev.expected_direct_cost,
                prev.level_cap,
                nxt.expected_direct_cost,
                nxt.level_cap,
            )
    return plans


def render_plan_advice(plan: Plan, device_count: int) -> list[tuple[int, int]]:
    """Turn a plan's level mix into (level, device count) lines, strictest first.

    Strategy mass maps onto device fractions from most to least important;
    fractions round down and the remainder goes to the highest level in the
    mix, so rounding always errs toward more protection.
    """
    if device_count < 1:
        raise ValidationError(f"device count: must be >= 1, got {device_count}")
    support = [l for l in range(len(plan.strategy)) if plan.strategy[l] > 1e-9]
    counts = {l: int(plan.strategy[l] * device_count + 1e-9) for l in support}
    leftover = device_count - sum(counts.values())
    if leftover:
        counts[max(support)] += leftover
    return [(l, counts[l]) for l in sorted(support, reverse=True) if counts[l] > 0]
