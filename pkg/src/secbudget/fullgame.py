"""The full game: every within-budget control-level tuple against every target.

A *schedule* assigns one level to each control; all schedules affordable at
the budget form the defender's pure-strategy set of one large zero-sum game
whose losses are residual damage plus the schedule's summed indirect cost.
Weakly dominated schedules (no better on any target, no cheaper) are pruned
before the solve; the equilibrium value is provably unchanged and the
reported strategy is certified as an epsilon-equilibrium of the unpruned
game on every run.

The reported weakest-target damage excludes indirect cost so the three
methods share a damage axis; indirect cost still shapes the equilibrium
through the loss matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SizingError, SolverError, ValidationError
from .games import MAX_ROWS, solve_zero_sum
from .model import Scenario

__all__ = [
    "ENUMERATION_CAP",
    "ENUMERATION_WARNING",
    "Schedule",
    "FullGameResult",
    "enumerate_schedules",
    "prune_dominated",
    "solve_full_game",
    "FullGameSweep",
]

ENUMERATION_WARNING = 200_000  # schedules; warn that the full game is getting large
ENUMERATION_CAP = 300_000  # level tuples; beyond this the hybrid method is the answer


@dataclass(frozen=True)
class Schedule:
    """One level per control; a pure strategy of the full game."""

    levels: tuple[int, ...]
    direct_cost: float
    indirect_cost: float


@dataclass(frozen=True)
class FullGameResult:
    """Equilibrium of the schedules-versus-targets game."""

    schedules: tuple[Schedule, ...]  # game rows after pruning, cheapest first
    probabilities: np.ndarray
    attacker: np.ndarray
    weakest_target_damage: float
    value: float  # saddle value including indirect costs
    expected_direct_cost: float
    expected_indirect_cost: float

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.probabilities > 1e-9))

    def support(self) -> list[tuple[Schedule, float]]:
        """Table of (schedule, probability) rows actually played, by weight."""
        idx = np.flatnonzero(self.probabilities > 1e-9)
        order = idx[np.argsort(-self.probabilities[idx], kind="stable")]
        return [(self.schedules[i], float(self.probabilities[i])) for i in order]


def _level_grid(scenario: Scenario) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All level tuples in lexicographic order with their direct/indirect costs."""
    dims = [c.top_level + 1 for c in scenario.controls]
    total = int(np.prod(dims))
    if total > ENUMERATION_CAP:
        raise SizingError(
            f"{total} level tuples exceed the {ENUMERATION_CAP} enumeration cap; "
            "use the hybrid method for this scenario"
        )
    levels = np.indices(dims).reshape(len(dims), -1).T  # lexicographic, last control fastest
    direct = np.zeros(total)
    indirect = np.zeros(total)
    for j, control in enumerate(scenario.controls):
        direct += control.direct_costs[levels[:, j]]
        indirect += control.indirect_costs[levels[:, j]]
    return levels, direct, indirect


def _loss_arrays(scenario: Scenario, levels: np.ndarray, indirect: np.ndarray):
    """Residual damage and defender loss rows for a block of schedules."""
    mitigation = np.zeros((levels.shape[0], len(scenario.targets)))
    for j, control in enumerate(scenario.controls):
        mitigation += control.efficacy_matrix[levels[:, j]]
    np.minimum(mitigation, 1.0 - scenario.residual_floor, out=mitigation)
    residual = scenario.base_damage * (1.0 - mitigation)
    return residual, residual + indirect[:, None]


def enumerate_schedules(scenario: Scenario, budget: float) -> list[Schedule]:
    """Exactly the schedules with direct cost <= budget, in lexicographic order."""
    if budget < 0:
        raise ValidationError(f"budget: must be >= 0, got {budget}")
    levels, direct, indirect = _level_grid(scenario)
    mask = direct <= budget
    count = int(mask.sum())
    if count > ENUMERATION_WARNING:
        warnings.warn(
            f"full game with {count} schedules; consider the hybrid method",
            stacklevel=2,
        )
    return [
        Schedule(tuple(int(l) for l in levels[i]), float(direct[i]), float(indirect[i]))
        for i in np.flatnonzero(mask)
    ]


def _prune_core(loss: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Indices (into the given arrays) surviving weak-dominance pruning.

    Row i is removed if some row j has loss <= everywhere and cost <=, with
    either a strict loss improvement, a strictly lower cost, or (for exact
    duplicates) an earlier position.  Survivors come back sorted by
    (cost, original position).

    Dominators are never dearer than what they remove, so candidates are
    processed in cost order against the cheaper survivors, with an exact
    pairwise pass inside each equal-cost block.
    """
    n = loss.shape[0]
    order = np.lexsort((np.arange(n), cost))
    kept: list[int] = []
    kept_matrix = np.empty_like(loss)
    n_kept = 0

    start = 0
    while start < n:
        stop = start
        while stop < n and cost[order[stop]] == cost[order[start]]:
            stop += 1
        block = order[start:stop]
        block_loss = loss[block]

        for b, pos in enumerate(block):
            row = block_loss[b]
            # cheaper survivors: weak dominance suffices
            dominated = n_kept > 0 and bool(
                np.any(np.all(kept_matrix[:n_kept] <= row, axis=1))
            )
            if not dominated:
                # equal cost: needs a strict improvement or an earlier position
                leq = np.all(block_loss <= row, axis=1)
                leq[b] = False
                for j in np.flatnonzero(leq):
                    if np.any(block_loss[j] < row) or block[j] < pos:
                        dominated = True
                        break
            if not dominated:
                kept.append(pos)
        n_new = len(kept) - n_kept
        if n_new:
            kept_matrix[n_kept : n_kept + n_new] = loss[kept[n_kept:]]
            n_kept += n_new
        start = stop
    return np.array(kept, dtype=int)


def prune_dominated(schedules: list[Schedule], scenario: Scenario) -> list[Schedule]:
    """Drop schedules some cheaper-or-equal schedule beats on every target."""
    if not schedules:
        return []
    levels = np.array([s.levels for s in schedules], dtype=int)
    indirect = np.array([s.indirect_cost for s in schedules])
    cost = np.array([s.direct_cost for s in schedules])
    _, loss = _loss_arrays(scenario, levels, indirect)
    kept = _prune_core(loss, cost)
    return [schedules[i] for i in kept]


class FullGameSweep:
    """Shared enumeration for solving the full game at many budgets.

    Schedules are enumerated once at the largest budget, collapsed to unique
    loss rows (keeping the cheapest, then lexicographically first,
    representative) and pruned globally; at each budget the game rows are the
    surviving schedules the budget affords, which is exactly the per-budget
    pruned set because a dominating schedule is never dearer than the one it
    removes.
    """

    def __init__(self, scenario: Scenario, max_budget: float):
        self.scenario = scenario
        self.max_budget = float(max_budget)

        levels, direct, indirect = _level_grid(scenario)
        mask = direct <= self.max_budget
        levels, direct, indirect = levels[mask], direct[mask], indirect[mask]
        if levels.shape[0] > ENUMERATION_WARNING:
            warnings.warn(
                f"full game with {levels.shape[0]} schedules; consider the hybrid method",
                stacklevel=2,
            )
        residual, loss = _loss_arrays(scenario, levels, indirect)

        # collapse duplicate loss rows onto their cheapest representative
        _, inverse = np.unique(loss, axis=0, return_inverse=True)
        by_cost = np.lexsort((np.arange(levels.shape[0]), direct))
        _, first = np.unique(inverse[by_cost], return_index=True)
        reps = by_cost[np.sort(first)]
        reps = reps[np.lexsort((reps, direct[reps]))]

        kept = reps[_prune_core(loss[reps], direct[reps])]
        self._levels = levels[kept]
        self._direct = direct[kept]
        self._indirect = indirect[kept]
        self._residual = residual[kept]
        self._loss = loss[kept]
        # all enumerated rows, for certifying against the unpruned game
        self._all_loss = loss
        self._all_direct = direct

    def solve(self, budget: float, epsilon: float = 1e-7) -> FullGameResult:
        if budget < 0:
            raise ValidationError(f"budget: must be >= 0, got {budget}")
        if budget > self.max_budget:
            raise SizingError(
                f"budget {budget} above the enumerated maximum {self.max_budget}"
            )
        k = int(np.searchsorted(self._direct, budget, side="right"))
        if k == 0:
            raise SolverError("no schedule is affordable (missing zero-cost schedule?)")
        if k > MAX_ROWS:
            raise SizingError(
                f"{k} schedules remain after dominance pruning, above the {MAX_ROWS}-row "
                "solver cap; use the hybrid method for this scenario"
            )
        loss = self._loss[:k]
        eq = solve_zero_sum(loss)

        # certify against every affordable schedule, not only the pruned rows
        all_mask = self._all_direct <= budget
        floor = float((self._all_loss[all_mask] @ eq.attacker).min())
        ceiling = float((eq.defender @ loss).max())
        if ceiling - floor > epsilon:
            raise SolverError(
                "full-game equilibrium failed certification against the unpruned game",
                incumbent=eq,
                gap=ceiling - floor,
            )

        weakest = float((eq.defender @ self._residual[:k]).max())
        schedules = tuple(
            Schedule(tuple(int(l) for l in self._levels[i]), float(self._direct[i]), float(self._indirect[i]))
            for i in range(k)
        )
        return FullGameResult(
            schedules=schedules,
            probabilities=eq.defender,
            attacker=eq.attacker,
            weakest_target_damage=weakest,
            value=eq.value,
            expected_direct_cost=float(eq.defender @ self._direct[:k]),
            expected_indirect_cost=float(eq.defender @ self._indirect[:k]),
        )


def solve_full_game(scenario: Scenario, budget: float) -> FullGameResult:
    """Enumerate, prune, solve and certify the full game at one budget."""
    return FullGameSweep(scenario, budget).solve(budget)
