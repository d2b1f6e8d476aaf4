"""Core environment model: targets, depths, controls, levels, and the damage algebra.

A scenario couples data assets (depth x vulnerability targets) with defensive
controls implementable at discrete levels.  The central quantity is the
expected damage of an attack on target ``t`` when a control sits at level
``l``::

    S(l, t) = I(t) * T(t) * (1 - E(l, t))

where ``I`` is the depth impact, ``T`` the normalized threat of the
vulnerability and ``E`` the level's efficacy.  The defender's loss adds the
level's indirect cost: ``S(l, t) + C(l)``.  Attackers compare targets by
``S`` alone, since ``C`` is constant along a row.

Scenarios are immutable after validation; every operation here is a pure
function and safe to call concurrently.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "Category",
    "Depth",
    "Vulnerability",
    "Target",
    "ControlLevel",
    "Control",
    "Scenario",
    "validate_scenario",
    "expected_damage",
    "defender_loss",
    "combined_mitigation",
    "residual_damage",
    "combined_mitigation_vector",
    "residual_damage_vector",
]


class Category(str, enum.Enum):
    """The three CWE weakness categories a control may cover."""

    INSECURE_INTERACTIONS = "InsecureInteractions"
    RISKY_RESOURCE_MANAGEMENT = "RiskyResourceManagement"
    POROUS_DEFENCES = "PorousDefences"


@dataclass(frozen=True)
class Depth:
    """Location tier of a data asset; deeper assets hold more valuable data."""

    id: int
    impact: float


@dataclass(frozen=True)
class Vulnerability:
    id: int
    cwe_code: int
    threat: float  # normalized to (0, 1]
    factors: tuple[int, int, int, int]  # (prevalence, attack_frequency, ease_of_detection, attacker_awareness)
    repair_cost: float
    category: Category


@dataclass(frozen=True)
class Target:
    """A (vulnerability, depth) pair abstracting an attackable data asset."""

    vulnerability_id: int
    depth_id: int


@dataclass(frozen=True)
class ControlLevel:
    index: int
    efficacy: tuple[float, ...]  # one entry per scenario target, each in [0, 1)
    direct_cost: float
    indirect_cost: float


@dataclass(frozen=True)
class Control:
    id: int
    name: str
    levels: tuple[ControlLevel, ...]  # contiguous indices starting at 0
    covered_categories: frozenset[Category] = field(default_factory=frozenset)

    @property
    def top_level(self) -> int:
        return len(self.levels) - 1

    @cached_property
    def efficacy_matrix(self) -> np.ndarray:
        """(levels, targets) efficacy array, read-only."""
        m = np.array([lv.efficacy for lv in self.levels], dtype=float)
        m.setflags(write=False)
        return m

    @cached_property
    def direct_costs(self) -> np.ndarray:
        c = np.array([lv.direct_cost for lv in self.levels], dtype=float)
        c.setflags(write=False)
        return c

    @cached_property
    def indirect_costs(self) -> np.ndarray:
        c = np.array([lv.indirect_cost for lv in self.levels], dtype=float)
        c.setflags(write=False)
        return c


@dataclass(frozen=True)
class Scenario:
    """Immutable problem data; the budget is an operation parameter, not scenario data."""

    name: str
    depths: tuple[Depth, ...]
    vulnerabilities: tuple[Vulnerability, ...]
    targets: tuple[Target, ...]
    controls: tuple[Control, ...]
    residual_floor: float = 0.0  # minimum uncovered fraction when controls combine

    @cached_property
    def _depth_by_id(self) -> dict[int, Depth]:
        return {d.id: d for d in self.depths}

    @cached_property
    def _vuln_by_id(self) -> dict[int, Vulnerability]:
        return {v.id: v for v in self.vulnerabilities}

    @cached_property
    def _control_pos(self) -> dict[int, int]:
        return {c.id: i for i, c in enumerate(self.controls)}

    def control(self, control_id: int) -> Control:
        pos = self._control_pos.get(control_id)
        if pos is None:
            raise ValidationError(f"control {control_id}: no such control in scenario")
        return self.controls[pos]

    def impact(self, target_index: int) -> float:
        t = self.targets[self._check_target(target_index)]
        return self._depth_by_id[t.depth_id].impact

    def threat(self, target_index: int) -> float:
        t = self.targets[self._check_target(target_index)]
        return self._vuln_by_id[t.vulnerability_id].threat

    @cached_property
    def base_damage(self) -> np.ndarray:
        """I(t) * T(t) for every target: the damage with no controls in place."""
        base = np.array(
            [
                self._depth_by_id[t.depth_id].impact * self._vuln_by_id[t.vulnerability_id].threat
                for t in self.targets
            ],
            dtype=float,
        )
        base.setflags(write=False)
        return base

    @cached_property
    def target_labels(self) -> tuple[str, ...]:
        return tuple(f"v{t.vulnerability_id}@d{t.depth_id}" for t in self.targets)

    def _check_target(self, target_index: int) -> int:
        if not 0 <= target_index < len(self.targets):
            raise ValidationError(
                f"target index {target_index}: out of range for {len(self.targets)} targets"
            )
        return target_index

    def _check_level(self, control: Control, level_index: int) -> int:
        if not 0 <= level_index <= control.top_level:
            raise ValidationError(
                f"level {level_index}: out of range for control {control.id} "
                f"with levels 0..{control.top_level}"
            )
        return level_index


def _check_level_choice(scenario: Scenario, level_choice: Sequence[int]) -> None:
    if len(level_choice) != len(scenario.controls):
        raise ValidationError(
            f"level choice has {len(level_choice)} entries for {len(scenario.controls)} controls"
        )
    for control, level in zip(scenario.controls, level_choice):
        scenario._check_level(control, level)


def expected_damage(scenario: Scenario, control_id: int, level_index: int, target_index: int) -> float:
    """S(l, t) = I(t) * T(t) * (1 - E(l, t)); level 0 leaves the full I*T."""
    control = scenario.control(control_id)
    level = control.levels[scenario._check_level(control, level_index)]
    t = scenario._check_target(target_index)
    return scenario.base_damage[t] * (1.0 - level.efficacy[t])


def defender_loss(scenario: Scenario, control_id: int, level_index: int, target_index: int) -> float:
    """The quantity the defender minimizes: S(l, t) + C(l)."""
    control = scenario.control(control_id)
    level = control.levels[scenario._check_level(control, level_index)]
    return expected_damage(scenario, control_id, level_index, target_index) + level.indirect_cost


def combined_mitigation(scenario: Scenario, level_choice: Sequence[int], target_index: int) -> float:
    """Additive efficacy of one chosen level per control, clamped at 1 - residual_floor."""
    t = scenario._check_target(target_index)
    _check_level_choice(scenario, level_choice)
    total = sum(
        c.levels[l].efficacy[t] for c, l in zip(scenario.controls, level_choice)
    )
    return min(1.0 - scenario.residual_floor, total)


def residual_damage(scenario: Scenario, level_choice: Sequence[int], target_index: int) -> float:
    """Damage left on a target after all chosen control levels combine."""
    t = scenario._check_target(target_index)
    return scenario.base_damage[t] * (1.0 - combined_mitigation(scenario, level_choice, t))


def combined_mitigation_vector(scenario: Scenario, level_choice: Sequence[int]) -> np.ndarray:
    """combined_mitigation for every target at once."""
    _check_level_choice(scenario, level_choice)
    total = np.zeros(len(scenario.targets))
    for control, level in zip(scenario.controls, level_choice):
        total += control.efficacy_matrix[level]
    return np.minimum(total, 1.0 - scenario.residual_floor)


def residual_damage_vector(scenario: Scenario, level_choice: Sequence[int]) -> np.ndarray:
    return scenario.base_damage * (1.0 - combined_mitigation_vector(scenario, level_choice))


def validate_scenario(scenario: Scenario) -> Scenario:
    """Check every type invariant; raise ValidationError naming the violated field."""
    if not scenario.targets:
        raise ValidationError("targets: scenario must define at least one target")
    if not scenario.controls:
        raise ValidationError("controls: scenario must define at least one control")
    if not 0.0 <= scenario.residual_floor < 1.0:
        raise ValidationError(
            f"residual_floor: must be in [0, 1), got {scenario.residual_floor}"
        )

    seen_depths: set[int] = set()
    for d in scenario.depths:
        if d.id in seen_depths:
            raise ValidationError(f"depth {d.id}: duplicate id")
        seen_depths.add(d.id)
        if not np.isfinite(d.impact) or d.impact < 0:
            raise ValidationError(f"depth {d.id}: impact must be >= 0, got {d.impact}")

    seen_vulns: set[int] = set()
    for v in scenario.vulnerabilities:
        if v.id in seen_vulns:
            raise ValidationError(f"vulnerability {v.id}: duplicate id")
        seen_vulns.add(v.id)
        if not np.isfinite(v.threat) or not 0.0 < v.threat <= 1.0:
            raise ValidationError(
                f"vulnerability {v.id}: threat must be in (0, 1], got {v.threat}"
            )
        if len(v.factors) != 4 or any(f not in (1, 2, 3) for f in v.factors):
            raise ValidationError(
                f"vulnerability {v.id}: factors must be four values in {{1,2,3}}, got {v.factors}"
            )
        if not np.isfinite(v.repair_cost) or v.repair_cost < 0:
            raise ValidationError(
                f"vulnerability {v.id}: repair_cost must be >= 0, got {v.repair_cost}"
            )
        if not isinstance(v.category, Category):
            raise ValidationError(f"vulnerability {v.id}: category {v.category!r} not recognized")

    seen_targets: set[tuple[int, int]] = set()
    for t in scenario.targets:
        key = (t.vulnerability_id, t.depth_id)
        if key in seen_targets:
            raise ValidationError(
                f"target {key}: duplicate (vulnerability, depth) pair"
            )
        seen_targets.add(key)
        if t.vulnerability_id not in seen_vulns:
            raise ValidationError(
                f"target {key}: vulnerability {t.vulnerability_id} not defined"
            )
        if t.depth_id not in seen_depths:
            raise ValidationError(f"target {key}: depth {t.depth_id} not defined")

    n_targets = len(scenario.targets)
    seen_controls: set[int] = set()
    for c in scenario.controls:
        if c.id in seen_controls:
            raise ValidationError(f"control {c.id}: duplicate id")
        seen_controls.add(c.id)
        if len(c.levels) < 2:
            raise ValidationError(
                f"control {c.id}: needs level 0 plus at least one real level"
            )
        for pos, lv in enumerate(c.levels):
            if lv.index != pos:
                raise ValidationError(
                    f"control {c.id}: level indices must be contiguous from 0, "
                    f"found {lv.index} at position {pos}"
                )
            if len(lv.efficacy) != n_targets:
                raise ValidationError(
                    f"control {c.id} level {pos}: efficacy has {len(lv.efficacy)} entries "
                    f"for {n_targets} targets"
                )
            if any(not np.isfinite(e) or not 0.0 <= e < 1.0 for e in lv.efficacy):
                raise ValidationError(
                    f"control {c.id} level {pos}: efficacy entries must be in [0, 1)"
                )
            if not np.isfinite(lv.direct_cost) or lv.direct_cost < 0:
                raise ValidationError(
                    f"control {c.id} level {pos}: direct_cost must be >= 0"
                )
            if not np.isfinite(lv.indirect_cost) or lv.indirect_cost < 0:
                raise ValidationError(
                    f"control {c.id} level {pos}: indirect_cost must be >= 0"
                )
        zero = c.levels[0]
        if any(e != 0.0 for e in zero.efficacy) or zero.direct_cost != 0.0 or zero.indirect_cost != 0.0:
            raise ValidationError(
                f"control {c.id} level 0: must have zero efficacy and zero costs"
            )
        for prev, nxt in zip(c.levels, c.levels[1:]):
            if nxt.direct_cost < prev.direct_cost:
                raise ValidationError(
                    f"control {c.id} level {nxt.index}: direct_cost decreases "
                    f"({nxt.direct_cost} < {prev.direct_cost})"
                )
            if nxt.indirect_cost < prev.indirect_cost:
                raise ValidationError(
                    f"control {c.id} level {nxt.index}: indirect_cost decreases "
                    f"({nxt.indirect_cost} < {prev.indirect_cost})"
                )
    return scenario
