"""Shared fixtures and scenario builders for the test suite."""

from __future__ import annotations

import pytest

from secbudget.model import (
    Category,
    Control,
    ControlLevel,
    Depth,
    Scenario,
    Target,
    Vulnerability,
    validate_scenario,
)
from secbudget.scenario import generate_case_study, load_scenario


def build_scenario(
    *,
    impacts,
    threats,
    controls,
    residual_floor: float = 0.0,
    name: str = "test",
) -> Scenario:
    """Hand-rolled scenario: one depth per impact, one vulnerability per threat,
    targets as the full cross product, controls as dicts with per-level
    efficacy rows (levels 1..L), direct and indirect cost lists."""
    depths = tuple(Depth(id=i + 1, impact=float(v)) for i, v in enumerate(impacts))
    vulns = tuple(
        Vulnerability(
            id=i + 1,
            cwe_code=100 + i,
            threat=float(t),
            factors=(2, 2, 2, 2),
            repair_cost=1.0,
            category=Category.INSECURE_INTERACTIONS,
        )
        for i, t in enumerate(threats)
    )
    targets = tuple(Target(v.id, d.id) for v in vulns for d in depths)
    n = len(targets)

    built = []
    for spec in controls:
        eff_rows = spec["efficacy"]
        direct = spec.get("direct", [float(i + 1) for i in range(len(eff_rows))])
        indirect = spec.get("indirect", [0.0] * len(eff_rows))
        levels = [ControlLevel(0, tuple(0.0 for _ in range(n)), 0.0, 0.0)]
        for l, row in enumerate(eff_rows, start=1):
            levels.append(
                ControlLevel(l, tuple(float(e) for e in row), float(direct[l - 1]), float(indirect[l - 1]))
            )
        built.append(
            Control(
                id=spec.get("id", len(built) + 1),
                name=spec.get("name", f"control-{len(built) + 1}"),
                levels=tuple(levels),
                covered_categories=frozenset({Category.INSECURE_INTERACTIONS}),
            )
        )
    return validate_scenario(
        Scenario(
            name=name,
            depths=depths,
            vulnerabilities=vulns,
            targets=targets,
            controls=tuple(built),
            residual_floor=residual_floor,
        )
    )


@pytest.fixture(scope="session")
def case_study_none():
    return load_scenario(generate_case_study(indirect_profile="none"))


@pytest.fixture(scope="session")
def case_study_normal():
    return load_scenario(generate_case_study(indirect_profile="normal"))
