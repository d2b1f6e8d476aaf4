"""Control games, plans, and deployment advice."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from secbudget.errors import ValidationError
from secbudget.model import expected_damage
from secbudget.oracles import random_scenario
from secbudget.subgames import (
    build_control_matrix,
    enumerate_plans,
    render_plan_advice,
    solve_subgame,
)

from conftest import build_scenario


def mixed_top_scenario():
    """5-level control over two equal-value targets whose game mixes levels 4 and 5.

    Loss rows (base damage 10 each target): levels 1..3 are dominated by
    level 4; levels 4 and 5 trade places across the targets, so the
    equilibrium mixes them 0.4 / 0.6.
    """
    return build_scenario(
        impacts=(10.0,),
        threats=(1.0, 1.0),
        controls=[
            {
                "efficacy": [
                    [0.10, 0.05],
                    [0.20, 0.10],
                    [0.30, 0.15],
                    [0.60, 0.30],
                    [0.55, 0.75],
                ],
                "direct": [1.0, 2.0, 3.0, 4.0, 5.0],
                "indirect": [0.2, 0.4, 0.6, 1.0, 2.0],
            }
        ],
    )


class TestBuildMatrix:
    def test_cap_zero_single_row_of_base_damage(self, case_study_none):
        m = build_control_matrix(case_study_none, 1, 0)
        assert m.shape == (1, 36)
        assert m.entries[0] == pytest.approx(case_study_none.base_damage)

    def test_two_level_two_target_shape(self):
        s = build_scenario(
            impacts=(10.0,),
            threats=(1.0, 0.8),
            controls=[{"efficacy": [[0.2, 0.3]], "indirect": [1.0]}],
        )
        m = build_control_matrix(s, 1, 1)
        assert m.shape == (2, 2)
        for level in (0, 1):
            for t in (0, 1):
                c = s.controls[0].levels[level].indirect_cost
                assert m.entries[level, t] == pytest.approx(
                    expected_damage(s, 1, level, t) + c
                )

    def test_five_level_control_includes_row_zero(self, case_study_none):
        m = build_control_matrix(case_study_none, 3, 5)
        assert m.shape == (6, 36)
        assert m.row_labels[0] == "level 0"

    def test_invalid_cap(self, case_study_none):
        with pytest.raises(ValidationError, match="level cap"):
            build_control_matrix(case_study_none, 3, 6)
        with pytest.raises(ValidationError, match="control 99"):
            build_control_matrix(case_study_none, 99, 1)


class TestSolveSubgame:
    def test_zero_indirect_monotone_is_pure_top(self):
        s = build_scenario(
            impacts=(8.0,),
            threats=(1.0, 0.5),
            controls=[{"efficacy": [[0.2, 0.1], [0.4, 0.2], [0.6, 0.3]], "direct": [1, 2, 3]}],
        )
        # dominance oracle: the top row weakly dominates every other row
        m = build_control_matrix(s, 1, 3).entries
        assert all(np.all(m[3] <= m[r]) and np.any(m[3] < m[r]) for r in range(3))
        plan = solve_subgame(s, 1, 3)
        assert plan.is_pure and plan.support == (3,)
        assert plan.expected_direct_cost == pytest.approx(3.0)

    def test_cap_zero_null_plan(self, case_study_none):
        plan = solve_subgame(case_study_none, 1, 0)
        assert plan.strategy == pytest.approx([1.0])
        assert plan.mitigation == pytest.approx(np.zeros(36))
        assert plan.expected_direct_cost == 0.0
        assert plan.guaranteed_loss == pytest.approx(float(case_study_none.base_damage.max()))

    def test_case_study_like_control_mixes_top_two_levels(self):
        plan = solve_subgame(mixed_top_scenario(), 1, 5)
        assert plan.support == (4, 5)
        assert plan.strategy[4] == pytest.approx(0.4, abs=1e-9)
        assert plan.strategy[5] == pytest.approx(0.6, abs=1e-9)

    def test_plan_fields_are_consistent(self):
        s = mixed_top_scenario()
        plan = solve_subgame(s, 1, 5)
        control = s.controls[0]
        assert plan.strategy.sum() == pytest.approx(1.0, abs=1e-9)
        assert plan.expected_direct_cost == pytest.approx(
            float(plan.strategy @ control.direct_costs)
        )
        assert plan.mitigation == pytest.approx(plan.strategy @ control.efficacy_matrix)
        assert plan.expected_direct_cost <= control.direct_costs[5] + 1e-12


class TestEnumeratePlans:
    def test_counts(self):
        s = build_scenario(
            impacts=(5.0,),
            threats=(1.0,),
            controls=[{"efficacy": [[0.1], [0.2], [0.3]], "direct": [1, 2, 3]}],
        )
        plans = enumerate_plans(s, 1)
        assert len(plans) == 4
        assert plans[0].level_cap == 0 and plans[0].expected_direct_cost == 0.0

    @pytest.mark.parametrize("seed", range(100))
    def test_plan_invariants_on_random_scenarios(self, seed):
        s = random_scenario(seed, n_controls=2, max_levels=4, n_targets=4)
        for control in s.controls:
            plans = enumerate_plans(s, control.id)
            assert len(plans) == control.top_level + 1
            for plan in plans:
                assert plan.strategy.sum() == pytest.approx(1.0, abs=1e-9)
                assert np.all(plan.mitigation >= 0) and np.all(plan.mitigation < 1.0)
                assert plan.expected_direct_cost <= control.direct_costs[plan.level_cap] + 1e-9
            losses = [p.guaranteed_loss for p in plans]
            for lo, hi in zip(losses[1:], losses):
                assert lo <= hi + 1e-9  # more levels can only help

    def test_monotone_zero_indirect_pure_at_every_cap(self):
        s = random_scenario(7, n_controls=3, max_levels=5, n_targets=5,
                            zero_indirect=True, monotone_efficacy=True)
        for control in s.controls:
            for plan in enumerate_plans(s, control.id):
                assert plan.support == (plan.level_cap,)

    def test_expected_cost_drop_is_logged_not_errored(self, caplog):
        # raising the cap can shift the mix down-level and cheapen the plan;
        # that is legal and only worth a warning
        s = random_scenario(7039, n_controls=2, max_levels=4, n_targets=4)
        with caplog.at_level("WARNING", logger="secbudget.subgames"):
            for control in s.controls:
                enumerate_plans(s, control.id)
        assert any("expected plan cost drops" in r.message for r in caplog.records)


class TestAdvice:
    def plan_with(self, strategy):
        from secbudget.subgames import Plan

        strategy = np.asarray(strategy, dtype=float)
        return Plan(
            control_id=1,
            level_cap=len(strategy) - 1,
            strategy=strategy,
            expected_direct_cost=0.0,
            mitigation=np.zeros(2),
            guaranteed_loss=0.0,
        )

    def test_example_split(self):
        plan = self.plan_with([0.0, 0.0, 0.7, 0.0, 0.3])
        assert render_plan_advice(plan, 10) == [(4, 3), (2, 7)]

    def test_pure_single_line(self):
        plan = self.plan_with([0.0, 0.0, 0.0, 0.0, 1.0])
        assert render_plan_advice(plan, 12) == [(4, 12)]

    def test_remainder_goes_to_the_higher_level(self):
        plan = self.plan_with([0.5, 0.5])
        assert render_plan_advice(plan, 3) == [(1, 2), (0, 1)]

    def test_device_count_must_be_positive(self):
        plan = self.plan_with([1.0])
        with pytest.raises(ValidationError, match="device count"):
            render_plan_advice(plan, 0)

    @given(
        weights=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=6),
        devices=st.integers(1, 200),
    )
    @settings(max_examples=100, deadline=None)
    def test_devices_are_conserved_and_ordered(self, weights, devices):
        total = sum(weights)
        assume(total > 1e-6)
        strategy = [w / total for w in weights]
        lines = render_plan_advice(self.plan_with(strategy), devices)
        assert sum(count for _, count in lines) == devices
        levels = [level for level, _ in lines]
        assert levels == sorted(levels, reverse=True)
        assert all(count > 0 for _, count in lines)
