"""Independent brute-force oracles for cross-checking the solvers.

These are written against the problem statements alone and share no solver
code with the main modules: the game oracle brackets the minimax value by
grid search over the defender simplex, the knapsack oracle enumerates every
selection, and the scenario generator produces seeded random instances for
property suites.  None of it is performance-tuned; independence is the point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import SizingError, ValidationError
from .knapsack import Method, Solution
from .model import (
    Category,
    Control,
    ControlLevel,
    Depth,
    Scenario,
    Target,
    Vulnerability,
    validate_scenario,
)

__all__ = [
    "OracleReport",
    "oracle_game_value",
    "oracle_knapsack",
    "random_scenario",
]

ORACLE_COMBO_CAP = 1_000_000


@dataclass(frozen=True)
class OracleReport:
    """One oracle-versus-system comparison at an explicit tolerance."""

    case: str
    oracle_value: float
    system_value: float
    tolerance: float

    @property
    def abs_diff(self) -> float:
        return abs(self.oracle_value - self.system_value)

    @property
    def passed(self) -> bool:
        return self.abs_diff <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.case}: oracle {self.oracle_value:.12g} vs system "
            f"{self.system_value:.12g} (|diff| {self.abs_diff:.3e}, tol {self.tolerance:g})"
        )


def _simplex_grid(m: int, k: int) -> np.ndarray:
    """All probability vectors with denominators k over m actions."""
    combos = itertools.combinations(range(k + m - 1), m - 1)
    rows = []
    for dividers in combos:
        prev = -1
        counts = []
        for d in dividers:
            counts.append(d - prev - 1)
            prev = d
        counts.append(k + m - 2 - prev)
        rows.append(counts)
    grid = np.array(rows, dtype=float) / k
    return grid


def oracle_game_value(matrix, resolution: float = 1e-2) -> tuple[float, float]:
    """Bracket the minimax value by grid search over the defender simplex.

    Supports up to 3 defender rows.  The upper end is the best grid ceiling
    (achievable, so the true value is below it); the lower end subtracts the
    worst-case interpolation error of the grid.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ValidationError(f"oracle: expected a 2-d matrix, got shape {a.shape}")
    m, n = a.shape
    if m > 3:
        raise SizingError(f"oracle grid search supports at most 3 rows, got {m}")
    if not 0 < resolution <= 1:
        raise ValidationError(f"resolution: must be in (0, 1], got {resolution}")
    if m == 1:
        v = float(a.max())
        return (v, v)
    k = max(1, round(1.0 / resolution))
    grid = _simplex_grid(m, k)
    ceilings = (grid @ a).max(axis=1)
    upper = float(ceilings.min())
    column_range = float((a.max(axis=0) - a.min(axis=0)).max())
    lower = upper - column_range * (m - 1) / k
    return (lower, upper)


def oracle_knapsack(groups, scenario: Scenario, budget: float, mode: Method) -> Solution:
    """Exhaustive-enumeration optimum with the solver's exact tie-break rules."""
    if budget < 0:
        raise ValidationError(f"budget: must be >= 0, got {budget}")
    total = 1
    for items in groups:
        if not items:
            raise ValidationError("oracle: empty item group")
        total *= len(items)
    if total > ORACLE_COMBO_CAP:
        raise SizingError(f"oracle enumeration of {total} selections exceeds {ORACLE_COMBO_CAP}")

    base = scenario.base_damage
    clamp = 1.0 - scenario.residual_floor
    include_indirect = mode is Method.PURE_KNAPSACK

    best = None  # (objective, cost, choices, combo)
    for combo in itertools.product(*groups):
        cost = sum(item.direct_cost for item in combo)
        if cost > budget:
            continue
        mitigation = np.zeros_like(base)
        indirect = 0.0
        for item in combo:
            mitigation = mitigation + item.mitigation
            indirect += item.indirect_cost
        worst = float((base * (1.0 - np.minimum(mitigation, clamp))).max())
        objective = worst + (indirect if include_indirect else 0.0)
        choices = tuple(item.choice_index for item in combo)
        if best is None:
            best = (objective, cost, choices, combo, worst, indirect)
            continue
        b_obj, b_cost, b_choices = best[0], best[1], best[2]
        if objective < b_obj - 1e-9:
            take = True
        elif objective > b_obj + 1e-9:
            take = False
        elif cost != b_cost:
            take = cost < b_cost
        else:
            take = choices < b_choices
        if take:
            best = (objective, cost, choices, combo, worst, indirect)
    if best is None:
        raise ValidationError("oracle: no feasible selection (null items missing)")
    objective, cost, _, combo, worst, indirect = best
    return Solution(
        chosen=tuple(combo),
        worst_target_damage=worst,
        total_direct_cost=cost,
        total_indirect_cost=indirect,
        objective=objective,
    )


def random_scenario(
    seed: int,
    n_controls: int = 3,
    max_levels: int = 3,
    n_targets: int = 4,
    zero_indirect: bool = False,
    monotone_efficacy: bool = False,
) -> Scenario:
    """Seeded random scenario satisfying every model invariant.

    Sizes are bounded (<= 5 controls, <= 6 levels, <= 8 targets) to stay
    within oracle reach; flags force zero indirect costs or level-monotone
    efficacy for the property suites that need them.
    """
    if not 1 <= n_controls <= 5:
        raise ValidationError(f"n_controls: must be in 1..5, got {n_controls}")
    if not 1 <= max_levels <= 6:
        raise ValidationError(f"max_levels: must be in 1..6, got {max_levels}")
    if not 1 <= n_targets <= 8:
        raise ValidationError(f"n_targets: must be in 1..8, got {n_targets}")

    rng = np.random.default_rng(seed)
    n_depths = int(rng.integers(1, 3))
    n_vulns = -(-n_targets // n_depths)
    depths = tuple(
        Depth(id=d + 1, impact=float(np.round(rng.uniform(1.0, 10.0), 6))) for d in range(n_depths)
    )
    categories = list(Category)
    vulns = tuple(
        Vulnerability(
            id=v + 1,
            cwe_code=int(rng.integers(1, 1000)),
            threat=float(np.round(rng.uniform(0.2, 1.0), 6)),
            factors=tuple(int(f) for f in rng.integers(1, 4, size=4)),
            repair_cost=float(np.round(rng.uniform(0.5, 5.0), 6)),
            category=categories[int(rng.integers(0, 3))],
        )
        for v in range(n_vulns)
    )
    targets = tuple(
        Target(v.id, d.id) for v in vulns for d in depths
    )[:n_targets]

    controls = []
    for j in range(n_controls):
        n_levels = int(rng.integers(1, max_levels + 1))
        top = rng.uniform(0.0, 0.9, size=n_targets)
        levels = [ControlLevel(0, tuple(0.0 for _ in range(n_targets)), 0.0, 0.0)]
        direct = 0.0
        indirect = 0.0
        for l in range(1, n_levels + 1):
            if monotone_efficacy:
                eff = top * (l / n_levels)
            else:
                eff = rng.uniform(0.0, 0.9, size=n_targets)
            direct += float(np.round(rng.uniform(0.0, 3.0), 6))
            if not zero_indirect:
                indirect += float(np.round(rng.uniform(0.0, 1.0), 6))
            levels.append(
                ControlLevel(l, tuple(float(e) for e in eff), direct, indirect)
            )
        controls.append(
            Control(
                id=j + 1,
                name=f"control-{j + 1}",
                levels=tuple(levels),
                covered_categories=frozenset({categories[int(rng.integers(0, 3))]}),
            )
        )

    return validate_scenario(
        Scenario(
            name=f"random-{seed}",
            depths=depths,
            vulnerabilities=vulns,
            targets=targets,
            controls=tuple(controls),
        )
    )
