"""Core damage algebra and scenario validation."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secbudget.errors import ValidationError
from secbudget.model import (
    Category,
    Control,
    ControlLevel,
    Depth,
    Scenario,
    Target,
    Vulnerability,
    combined_mitigation,
    combined_mitigation_vector,
    defender_loss,
    expected_damage,
    residual_damage,
    residual_damage_vector,
    validate_scenario,
)
from secbudget.oracles import random_scenario
from secbudget.scenario import derive_severity, generate_case_study, load_scenario

from conftest import build_scenario


def one_control(e_rows, indirect=None, impacts=(10.0,), threats=(0.5,)):
    return build_scenario(
        impacts=impacts,
        threats=threats,
        controls=[{"efficacy": e_rows, "indirect": indirect or [0.0] * len(e_rows)}],
    )


class TestExpectedDamage:
    def test_zero_efficacy_leaves_full_damage(self):
        s = one_control([[0.0]])
        assert expected_damage(s, 1, 1, 0) == pytest.approx(5.0)
        assert expected_damage(s, 1, 0, 0) == pytest.approx(5.0)

    def test_high_efficacy(self):
        s = one_control([[0.95]])
        assert expected_damage(s, 1, 1, 0) == pytest.approx(0.25)

    def test_sqli_derivation_matches_direct_formula(self):
        # independent oracle: evaluate the defining formulas by hand for the
        # SQLi x deepest-depth target of the generated case study
        scenario = load_scenario(generate_case_study(indirect_profile="none"))
        sqli = scenario.vulnerabilities[0]
        assert sqli.factors == (2, 3, 3, 3)
        severity = (1 * 0.5 + 1 * 1.0 + 1 * 1.0 + 1 * 1.0) / 4.0
        assert severity == 0.875
        assert derive_severity(sqli.factors, [1, 1, 1, 1]) == pytest.approx(severity)

        target_index = scenario.targets.index(
            next(t for t in scenario.targets if t.vulnerability_id == sqli.id and t.depth_id == 3)
        )
        control = scenario.control(5)  # covers InsecureInteractions
        level = 3
        e_hand = (level / control.top_level) * 0.95 * (1.0 - 0.5 * severity)
        i_hand = 12.0
        t_hand = sqli.threat
        s_hand = i_hand * t_hand * (1.0 - e_hand)
        assert expected_damage(scenario, 5, level, target_index) == pytest.approx(s_hand, abs=1e-12)

    def test_index_errors_name_the_offender(self):
        s = one_control([[0.5]])
        with pytest.raises(ValidationError, match="control 9"):
            expected_damage(s, 9, 0, 0)
        with pytest.raises(ValidationError, match="level 7"):
            expected_damage(s, 1, 7, 0)
        with pytest.raises(ValidationError, match="target index 4"):
            expected_damage(s, 1, 1, 4)


class TestDefenderLoss:
    def test_zero_indirect(self):
        s = one_control([[0.0]])
        assert defender_loss(s, 1, 1, 0) == pytest.approx(5.0)

    def test_additivity(self):
        s = one_control([[0.0]], indirect=[2.0])
        assert defender_loss(s, 1, 1, 0) == pytest.approx(7.0)

    def test_two_by_two_matrix_cell_by_cell(self):
        # 2 levels x 2 targets, verified against S(l,t) + C(l) per cell
        s = build_scenario(
            impacts=(10.0,),
            threats=(1.0, 0.8),
            controls=[{"efficacy": [[0.2, 0.3], [0.5, 0.6]], "indirect": [1.0, 2.5]}],
        )
        for level in (0, 1, 2):
            for t in (0, 1):
                c = s.controls[0].levels[level].indirect_cost
                assert defender_loss(s, 1, level, t) == pytest.approx(
                    expected_damage(s, 1, level, t) + c
                )


class TestCombination:
    def three_controls(self, e1, e2, e3=0.0, floor=0.0):
        return build_scenario(
            impacts=(10.0,),
            threats=(1.0,),
            controls=[{"efficacy": [[e]]} for e in (e1, e2, e3)],
            residual_floor=floor,
        )

    def test_all_level_zero(self):
        s = self.three_controls(0.5, 0.5)
        assert combined_mitigation(s, [0, 0, 0], 0) == 0.0
        assert residual_damage(s, [0, 0, 0], 0) == pytest.approx(10.0)

    def test_clamp_at_one(self):
        s = self.three_controls(0.6, 0.7)
        assert combined_mitigation(s, [1, 1, 0], 0) == pytest.approx(1.0)

    def test_additive_below_clamp(self):
        s = self.three_controls(0.3, 0.4)
        assert combined_mitigation(s, [1, 1, 0], 0) == pytest.approx(0.7)

    def test_residual_floor_kicks_in(self):
        s = self.three_controls(0.6, 0.7, floor=0.1)
        assert combined_mitigation(s, [1, 1, 0], 0) == pytest.approx(0.9)
        assert residual_damage(s, [1, 1, 0], 0) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(25))
    def test_random_instance_matches_direct_formula(self, seed):
        # independent re-evaluation oracle for the composition
        s = random_scenario(seed, n_controls=3, max_levels=4, n_targets=5)
        rng = np.random.default_rng(seed + 1)
        choice = [int(rng.integers(0, c.top_level + 1)) for c in s.controls]
        for t in range(len(s.targets)):
            total = sum(c.levels[l].efficacy[t] for c, l in zip(s.controls, choice))
            expected = s.base_damage[t] * (1.0 - min(1.0 - s.residual_floor, total))
            assert residual_damage(s, choice, t) == pytest.approx(expected, abs=1e-12)
        assert residual_damage_vector(s, choice) == pytest.approx(
            [residual_damage(s, choice, t) for t in range(len(s.targets))]
        )


class TestInvariants:
    @given(
        e1=st.floats(0.0, 0.99),
        e2=st.floats(0.0, 0.99),
        impact=st.floats(0.0, 50.0),
        threat=st.floats(0.01, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_damage_nonincreasing_in_efficacy(self, e1, e2, impact, threat):
        lo, hi = sorted((e1, e2))
        s = build_scenario(
            impacts=(impact,),
            threats=(threat,),
            controls=[{"efficacy": [[lo], [hi]], "direct": [1.0, 2.0]}],
        )
        s_lo = expected_damage(s, 1, 1, 0)
        s_hi = expected_damage(s, 1, 2, 0)
        assert s_hi <= s_lo + 1e-12
        if impact * threat == 0:
            assert s_lo == 0.0 == s_hi

    def test_loss_difference_decomposes_exactly(self):
        s = build_scenario(
            impacts=(10.0,),
            threats=(1.0, 0.7),
            controls=[{"efficacy": [[0.2, 0.1], [0.6, 0.3]], "indirect": [0.5, 1.75]}],
        )
        for t in (0, 1):
            lhs = defender_loss(s, 1, 1, t) - defender_loss(s, 1, 2, t)
            ds = expected_damage(s, 1, 1, t) - expected_damage(s, 1, 2, t)
            dc = s.controls[0].levels[1].indirect_cost - s.controls[0].levels[2].indirect_cost
            assert lhs == ds + dc  # exact float identity

    @pytest.mark.parametrize("seed", range(20))
    def test_adding_a_control_never_increases_residual(self, seed):
        s = random_scenario(seed, n_controls=3, max_levels=3, n_targets=4)
        rng = np.random.default_rng(seed)
        choice = [int(rng.integers(0, c.top_level + 1)) for c in s.controls]
        base_choice = list(choice)
        j = int(rng.integers(0, len(choice)))
        base_choice[j] = 0
        with_control = residual_damage_vector(s, choice)
        without = residual_damage_vector(s, base_choice)
        assert np.all(with_control <= without + 1e-12)
        mits = combined_mitigation_vector(s, choice)
        assert np.all(mits >= 0) and np.all(mits <= 1.0 - s.residual_floor + 1e-15)


class TestValidation:
    def base_parts(self):
        depth = Depth(1, 5.0)
        vuln = Vulnerability(1, 89, 0.9, (2, 3, 3, 3), 1.0, Category.INSECURE_INTERACTIONS)
        target = Target(1, 1)
        levels = (
            ControlLevel(0, (0.0,), 0.0, 0.0),
            ControlLevel(1, (0.5,), 1.0, 0.0),
        )
        control = Control(1, "c", levels, frozenset({Category.INSECURE_INTERACTIONS}))
        return depth, vuln, target, control

    def scenario_with(self, **overrides):
        depth, vuln, target, control = self.base_parts()
        parts = {
            "name": "t",
            "depths": (depth,),
            "vulnerabilities": (vuln,),
            "targets": (target,),
            "controls": (control,),
        }
        parts.update(overrides)
        return Scenario(**parts)

    def test_valid_passes(self):
        validate_scenario(self.scenario_with())

    @pytest.mark.parametrize(
        "overrides, message",
        [
            ({"targets": ()}, "targets"),
            ({"controls": ()}, "controls"),
            ({"depths": (Depth(1, -1.0),)}, "impact"),
            (
                {"vulnerabilities": (Vulnerability(1, 89, 1.5, (2, 3, 3, 3), 1.0, Category.POROUS_DEFENCES),)},
                "threat",
            ),
            (
                {"vulnerabilities": (Vulnerability(1, 89, 0.9, (2, 3, 3, 4), 1.0, Category.POROUS_DEFENCES),)},
                "factors",
            ),
            (
                {"vulnerabilities": (Vulnerability(1, 89, 0.9, (2, 3, 3, 3), -1.0, Category.POROUS_DEFENCES),)},
                "repair_cost",
            ),
            ({"targets": (Target(1, 1), Target(1, 1))}, "duplicate"),
            ({"targets": (Target(2, 1),)}, "vulnerability 2"),
            ({"residual_floor": 1.0}, "residual_floor"),
        ],
    )
    def test_rejects_naming_the_field(self, overrides, message):
        with pytest.raises(ValidationError, match=message):
            validate_scenario(self.scenario_with(**overrides))

    def test_rejects_bad_levels(self):
        depth, vuln, target, _ = self.base_parts()
        bad0 = Control(
            1, "c",
            (ControlLevel(0, (0.1,), 0.0, 0.0), ControlLevel(1, (0.5,), 1.0, 0.0)),
            frozenset(),
        )
        with pytest.raises(ValidationError, match="level 0"):
            validate_scenario(self.scenario_with(controls=(bad0,)))

        decreasing = Control(
            1, "c",
            (
                ControlLevel(0, (0.0,), 0.0, 0.0),
                ControlLevel(1, (0.5,), 2.0, 0.0),
                ControlLevel(2, (0.6,), 1.0, 0.0),
            ),
            frozenset(),
        )
        with pytest.raises(ValidationError, match="direct_cost decreases"):
            validate_scenario(self.scenario_with(controls=(decreasing,)))

        one_level = Control(1, "c", (ControlLevel(0, (0.0,), 0.0, 0.0),), frozenset())
        with pytest.raises(ValidationError, match="level 0 plus"):
            validate_scenario(self.scenario_with(controls=(one_level,)))

        eff_one = Control(
            1, "c",
            (ControlLevel(0, (0.0,), 0.0, 0.0), ControlLevel(1, (1.0,), 1.0, 0.0)),
            frozenset(),
        )
        with pytest.raises(ValidationError, match="efficacy"):
            validate_scenario(self.scenario_with(controls=(eff_one,)))
