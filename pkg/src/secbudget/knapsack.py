"""Exact 0-1 multiple-choice knapsack over per-control items, minimizing worst-target damage.

Each control contributes a list of items (pure levels for the pure method,
sub-game plans for the hybrid method) of which exactly one must be chosen,
including a free null item.  A selection's damage on a target combines the
chosen items' mitigation vectors additively with the scenario clamp; the
objective is the worst target's residual damage, plus the summed indirect
costs in pure mode (the hybrid's items absorbed those inside the sub-games).

The search is branch-and-bound over the choice groups with an optimistic
mitigation bound; it is exhaustive up to the bound, hence exact, and ties are
broken by lowest direct cost, then lexicographically smallest choice indices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .model import Scenario
from .subgames import Plan, enumerate_plans

__all__ = [
    "OBJECTIVE_TIE_TOL",
    "Method",
    "Item",
    "Solution",
    "SweepPoint",
    "pure_items",
    "hybrid_items",
    "solve_mcmo",
    "tiebreak",
    "budget_sweep",
]

OBJECTIVE_TIE_TOL = 1e-9  # objectives closer than this count as tied


class Method(str, enum.Enum):
    FULL_GAME = "fullgame"
    PURE_KNAPSACK = "knapsack"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class Item:
    """One selectable implementation of a control."""

    control_id: int
    choice_index: int
    direct_cost: float
    mitigation: np.ndarray
    indirect_cost: float = 0.0
    strategy: np.ndarray | None = None  # level mix behind a plan item, if any

    def __post_init__(self):
        mit = np.asarray(self.mitigation, dtype=float)
        mit.setflags(write=False)
        object.__setattr__(self, "mitigation", mit)


@dataclass(frozen=True)
class Solution:
    """One chosen item per control."""

    chosen: tuple[Item, ...]
    worst_target_damage: float
    total_direct_cost: float
    total_indirect_cost: float
    objective: float

    @property
    def choices(self) -> tuple[int, ...]:
        return tuple(item.choice_index for item in self.chosen)


@dataclass(frozen=True)
class SweepPoint:
    budget: float
    method: Method
    worst_target_damage: float
    total_direct_cost: float
    total_indirect_cost: float
    summary: str


def pure_items(scenario: Scenario) -> list[list[Item]]:
    """One item per (control, level): whole-level implementations with their indirect costs."""
    groups = []
    for control in scenario.controls:
        groups.append(
            [
                Item(
                    control_id=control.id,
                    choice_index=level.index,
                    direct_cost=level.direct_cost,
                    mitigation=control.efficacy_matrix[level.index],
                    indirect_cost=level.indirect_cost,
                )
                for level in control.levels
            ]
        )
    return groups


def hybrid_items(scenario: Scenario, plans: Sequence[Sequence[Plan]] | None = None) -> list[list[Item]]:
    """One item per (control, level cap): sub-game plans priced at expected cost, indirect absorbed."""
    groups = []
    for control in scenario.controls:
        control_plans = plans[len(groups)] if plans is not None else enumerate_plans(scenario, control.id)
        groups.append(
            [
                Item(
                    control_id=control.id,
                    choice_index=plan.level_cap,
                    direct_cost=plan.expected_direct_cost,
                    mitigation=plan.mitigation,
                    indirect_cost=0.0,
                    strategy=plan.strategy,
                )
                for plan in control_plans
            ]
        )
    return groups


def _validate_groups(groups: Sequence[Sequence[Item]], n_targets: int) -> None:
    if not groups:
        raise ValidationError("items: at least one control's item list is required")
    for g, items in enumerate(groups):
        if not items:
            raise ValidationError(f"items[{g}]: item list must not be empty")
        if not any(item.direct_cost == 0.0 for item in items):
            raise ValidationError(f"items[{g}]: missing a null item with zero direct cost")
        for item in items:
            if item.mitigation.shape != (n_targets,):
                raise ValidationError(
                    f"items[{g}] choice {item.choice_index}: mitigation has "
                    f"{item.mitigation.shape} entries for {n_targets} targets"
                )


def _evaluate(
    base: np.ndarray,
    clamp: float,
    chosen: Sequence[Item],
    include_indirect: bool,
) -> tuple[float, float, float, float]:
    mitigation = np.zeros_like(base)
    direct = 0.0
    indirect = 0.0
    for item in chosen:
        mitigation += item.mitigation
        direct += item.direct_cost
        indirect += item.indirect_cost
    worst = float((base * (1.0 - np.minimum(mitigation, clamp))).max())
    objective = worst + (indirect if include_indirect else 0.0)
    return worst, direct, indirect, objective


def _better(
    obj: float, cost: float, choices: tuple[int, ...],
    inc_obj: float, inc_cost: float, inc_choices: tuple[int, ...],
) -> bool:
    if obj < inc_obj - OBJECTIVE_TIE_TOL:
        return True
    if obj > inc_obj + OBJECTIVE_TIE_TOL:
        return False
    if cost != inc_cost:
        return cost < inc_cost
    return choices < inc_choices


def _dedupe_group(items: Sequence[Item]) -> list[Item]:
    """Collapse items identical in cost, indirect cost and mitigation.

    The lowest choice index survives; any solution through a dropped twin is
    matched by an equal-objective, equal-cost, lexicographically smaller one,
    so the search result is unchanged.
    """
    seen: dict[tuple, Item] = {}
    for item in sorted(items, key=lambda it: it.choice_index):
        key = (item.direct_cost, item.indirect_cost, item.mitigation.tobytes())
        seen.setdefault(key, item)
    return list(seen.values())


def solve_mcmo(
    groups: Sequence[Sequence[Item]],
    scenario: Scenario,
    budget: float,
    mode: Method,
) -> Solution:
    """Exact optimum of the multiple-choice knapsack at a budget.

    ``mode`` PURE_KNAPSACK adds the chosen items' indirect costs to the
    worst-target damage; HYBRID optimizes damage alone.  Branch and bound
    explores every selection an optimistic mitigation bound cannot rule out,
    so the optimum is certified by search completeness.
    """
    if budget < 0:
        raise ValidationError(f"budget: must be >= 0, got {budget}")
    if mode not in (Method.PURE_KNAPSACK, Method.HYBRID):
        raise ValidationError(f"mode: expected knapsack or hybrid, got {mode}")
    base = scenario.base_damage
    clamp = 1.0 - scenario.residual_floor
    _validate_groups(groups, len(base))
    include_indirect = mode is Method.PURE_KNAPSACK

    search_groups = [_dedupe_group(g) for g in groups]
    n_groups = len(search_groups)

    # per group: items cost-sorted with running elementwise-max mitigation, so
    # the bound can look up "best mitigation affordable at the remaining budget"
    afford_costs: list[np.ndarray] = []
    afford_prefix: list[np.ndarray] = []
    for items in search_groups:
        by_cost = sorted(items, key=lambda it: it.direct_cost)
        costs = np.array([it.direct_cost for it in by_cost])
        prefix = np.zeros((len(by_cost) + 1, len(base)))
        for i, it in enumerate(by_cost):
            prefix[i + 1] = np.maximum(prefix[i], it.mitigation)
        afford_costs.append(costs)
        afford_prefix.append(prefix)

    # unconditional best-case mitigation of groups g.. (cheap first-stage bound)
    suffix_total = np.zeros((n_groups + 1, len(base)))
    for g in range(n_groups - 1, -1, -1):
        suffix_total[g] = suffix_total[g + 1] + afford_prefix[g][-1]

    best: dict = {"obj": np.inf, "cost": np.inf, "choices": (), "chosen": None}
    chosen_stack: list[Item] = []

    def bound_damage(opt_mitigation: np.ndarray) -> float:
        return float((base * (1.0 - np.minimum(opt_mitigation, clamp))).max())

    def descend(g: int, partial: np.ndarray, cost: float, indirect: float) -> None:
        if g == n_groups:
            obj = bound_damage(partial) + (indirect if include_indirect else 0.0)
            choices = tuple(item.choice_index for item in chosen_stack)
            if best["chosen"] is None or _better(
                obj, cost, choices, best["obj"], best["cost"], best["choices"]
            ):
                best.update(obj=obj, cost=cost, choices=choices, chosen=tuple(chosen_stack))
            return
        if best["chosen"] is not None:
            floor = indirect if include_indirect else 0.0
            if bound_damage(partial + suffix_total[g]) + floor > best["obj"] + OBJECTIVE_TIE_TOL:
                return
            remaining = budget - cost
            opt = partial.copy()
            for h in range(g, n_groups):
                k = int(np.searchsorted(afford_costs[h], remaining, side="right"))
                opt += afford_prefix[h][k]
            if bound_damage(opt) + floor > best["obj"] + OBJECTIVE_TIE_TOL:
                return
        # strongest choices first to lock in tight incumbents early
        for item in sorted(search_groups[g], key=lambda it: -it.choice_index):
            new_cost = cost + item.direct_cost
            if new_cost > budget:
                continue
            chosen_stack.append(item)
            descend(g + 1, partial + item.mitigation, new_cost, indirect + item.indirect_cost)
            chosen_stack.pop()

    descend(0, np.zeros_like(base), 0.0, 0.0)
    if best["chosen"] is None:
        raise ValidationError("budget: even the all-null selection is infeasible (null items missing)")

    worst, direct, indirect, objective = _evaluate(base, clamp, best["chosen"], include_indirect)
    return Solution(
        chosen=best["chosen"],
        worst_target_damage=worst,
        total_direct_cost=direct,
        total_indirect_cost=indirect,
        objective=objective,
    )


def tiebreak(solutions: Sequence[Solution]) -> Solution:
    """Among equal-objective solutions pick the cheapest, then the lexicographically lowest choices."""
    if not solutions:
        raise ValidationError("tiebreak: candidate set must not be empty")
    best_obj = min(s.objective for s in solutions)
    if any(s.objective > best_obj + OBJECTIVE_TIE_TOL for s in solutions):
        raise ValidationError("tiebreak: candidates do not share the optimal objective")
    return min(solutions, key=lambda s: (s.total_direct_cost, s.choices))


def budget_sweep(
    scenario: Scenario,
    budgets: Sequence[float],
    methods: Sequence[Method],
) -> list[SweepPoint]:
    """One SweepPoint per (budget, method), budgets ascending."""
    from . import fullgame  # local import: fullgame builds on the game solver only

    budgets = list(budgets)
    if not budgets:
        raise ValidationError("budgets: at least one budget is required")
    if any(b < 0 for b in budgets):
        raise ValidationError("budgets: must be >= 0")
    if any(b2 < b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValidationError("budgets: must be sorted ascending")
    if not methods:
        raise ValidationError("methods: at least one method is required")

    group_cache: dict[Method, list[list[Item]]] = {}
    fg_sweep = None
    if Method.FULL_GAME in methods:
        fg_sweep = fullgame.FullGameSweep(scenario, max(budgets))

    points = []
    for budget in budgets:
        for method in methods:
            if method is Method.FULL_GAME:
                result = fg_sweep.solve(budget)
                points.append(
                    SweepPoint(
                        budget=float(budget),
                        method=method,
                        worst_target_damage=result.weakest_target_damage,
                        total_direct_cost=result.expected_direct_cost,
                        total_indirect_cost=result.expected_indirect_cost,
                        summary=f"support={result.support_size}",
                    )
                )
            else:
                if method not in group_cache:
                    group_cache[method] = (
                        pure_items(scenario) if method is Method.PURE_KNAPSACK else hybrid_items(scenario)
                    )
                solution = solve_mcmo(group_cache[method], scenario, budget, method)
                summary = "[" + ",".join(str(c) for c in solution.choices) + "]"
                points.append(
                    SweepPoint(
                        budget=float(budget),
                        method=method,
                        worst_target_damage=solution.worst_target_damage,
                        total_direct_cost=solution.total_direct_cost,
                        total_indirect_cost=solution.total_indirect_cost,
                        summary=summary,
                    )
                )
    return points
