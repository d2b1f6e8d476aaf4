"""Schedule enumeration, dominance pruning, and the full-game solve."""

from __future__ import annotations

import numpy as np
import pytest

from secbudget.errors import SizingError
from secbudget.fullgame import (
    FullGameSweep,
    Schedule,
    enumerate_schedules,
    prune_dominated,
    solve_full_game,
)
from secbudget.games import solve_zero_sum
from secbudget.knapsack import Method, hybrid_items, pure_items, solve_mcmo
from secbudget.model import Category, Control, ControlLevel, Scenario, validate_scenario
from secbudget.oracles import random_scenario

from conftest import build_scenario


def two_unit_controls():
    return build_scenario(
        impacts=(10.0,),
        threats=(1.0, 0.5),
        controls=[
            {"efficacy": [[0.3, 0.1]], "direct": [1.0]},
            {"efficacy": [[0.1, 0.4]], "direct": [1.0]},
        ],
    )


class TestEnumerate:
    def test_budget_zero_only_all_zeros(self):
        s = two_unit_controls()
        schedules = enumerate_schedules(s, 0.0)
        assert [sc.levels for sc in schedules] == [(0, 0)]

    def test_budget_one_three_tuples(self):
        s = two_unit_controls()
        schedules = enumerate_schedules(s, 1.0)
        assert [sc.levels for sc in schedules] == [(0, 0), (0, 1), (1, 0)]
        assert all(sc.direct_cost <= 1.0 for sc in schedules)

    def test_case_study_at_max_budget_includes_all_top(self, case_study_none):
        schedules = enumerate_schedules(case_study_none, 82.0)
        tops = tuple(c.top_level for c in case_study_none.controls)
        assert any(sc.levels == tops for sc in schedules)
        assert len(schedules) == int(np.prod([t + 1 for t in tops]))

    def test_enumeration_cap(self):
        # 7 controls x 6 real levels = 7^7 tuples, beyond the 300k cap
        small = build_scenario(impacts=(1.0,), threats=(1.0,), controls=[{"efficacy": [[0.1]]}])
        levels = tuple(
            ControlLevel(i, (0.0,) if i == 0 else (0.5,), float(i), 0.0) for i in range(7)
        )
        big = validate_scenario(
            Scenario(
                name="big",
                depths=small.depths,
                vulnerabilities=small.vulnerabilities,
                targets=small.targets,
                controls=tuple(
                    Control(j + 1, f"c{j}", levels, frozenset({Category.INSECURE_INTERACTIONS}))
                    for j in range(7)
                ),
            )
        )
        with pytest.raises(SizingError, match="hybrid"):
            enumerate_schedules(big, 100.0)


class TestPrune:
    def test_duplicates_collapse_to_one(self):
        s = two_unit_controls()
        sched = enumerate_schedules(s, 2.0)
        doubled = sched + sched
        kept = prune_dominated(doubled, s)
        assert len(kept) == len(prune_dominated(sched, s))

    def test_dominated_row_removed_value_unchanged(self):
        s = build_scenario(
            impacts=(10.0,),
            threats=(1.0, 0.5),
            controls=[
                # level 2 costs the same as level 1 but is better everywhere
                {"efficacy": [[0.2, 0.1], [0.4, 0.3]], "direct": [1.0, 1.0]},
            ],
        )
        schedules = enumerate_schedules(s, 1.0)
        kept = prune_dominated(schedules, s)
        assert [sc.levels for sc in kept] == [(0,), (2,)]
        full = solve_full_game(s, 1.0)
        # solving the unpruned matrix directly gives the same value
        rows = []
        for sc in schedules:
            mit = np.array([s.controls[0].levels[sc.levels[0]].efficacy[t] for t in range(2)])
            rows.append(s.base_damage * (1 - mit) + sc.indirect_cost)
        eq = solve_zero_sum(np.array(rows))
        assert full.value == pytest.approx(eq.value, abs=1e-9)

    def test_no_dominance_unchanged(self):
        s = two_unit_controls()
        schedules = enumerate_schedules(s, 2.0)
        kept = prune_dominated(schedules, s)
        assert [k.levels for k in kept] == [sc.levels for sc in schedules]

    def test_prune_core_matches_pairwise_definition(self):
        # coarse integer grids force duplicates and exact-tie dominances
        from secbudget.fullgame import _prune_core

        def brute(loss, cost):
            kept = []
            for i in range(loss.shape[0]):
                dominated = False
                for j in range(loss.shape[0]):
                    if j == i or not (np.all(loss[j] <= loss[i]) and cost[j] <= cost[i]):
                        continue
                    if (np.any(loss[j] < loss[i]) or cost[j] < cost[i]
                            or (np.array_equal(loss[j], loss[i]) and cost[j] == cost[i] and j < i)):
                        dominated = True
                        break
                if not dominated:
                    kept.append(i)
            return kept

        rng = np.random.default_rng(4)
        for _ in range(500):
            n = int(rng.integers(1, 12))
            t = int(rng.integers(1, 5))
            loss = rng.integers(0, 4, size=(n, t)).astype(float)
            cost = rng.integers(0, 4, size=n).astype(float)
            assert sorted(_prune_core(loss, cost).tolist()) == sorted(brute(loss, cost))

    @pytest.mark.parametrize("seed", range(15))
    def test_value_preserved_on_random_scenarios(self, seed):
        s = random_scenario(seed, n_controls=3, max_levels=3, n_targets=4)
        budget = float(sum(c.direct_costs[-1] for c in s.controls)) / 2
        schedules = enumerate_schedules(s, budget)
        kept = prune_dominated(schedules, s)
        assert set(k.levels for k in kept) <= set(sc.levels for sc in schedules)

        def loss_rows(group):
            rows = []
            for sc in group:
                mit = np.zeros(len(s.targets))
                for j, c in enumerate(s.controls):
                    mit += c.efficacy_matrix[sc.levels[j]]
                mit = np.minimum(mit, 1.0 - s.residual_floor)
                rows.append(s.base_damage * (1 - mit) + sc.indirect_cost)
            return np.array(rows)

        v_full = solve_zero_sum(loss_rows(schedules)).value
        v_kept = solve_zero_sum(loss_rows(kept)).value
        assert v_kept == pytest.approx(v_full, abs=1e-9)


class TestSolve:
    def test_single_affordable_schedule_is_pure(self):
        s = two_unit_controls()
        result = solve_full_game(s, 0.0)
        assert result.support_size == 1
        assert result.schedules[0].levels == (0, 0)
        assert result.probabilities == pytest.approx([1.0])
        assert result.weakest_target_damage == pytest.approx(10.0)

    @pytest.mark.parametrize("seed", range(10))
    def test_never_worse_than_knapsack_methods_at_zero_indirect(self, seed):
        s = random_scenario(seed, n_controls=3, max_levels=3, n_targets=4,
                            zero_indirect=True, monotone_efficacy=True)
        budget = float(sum(c.direct_costs[-1] for c in s.controls)) * 0.6
        fg = solve_full_game(s, budget)
        pure = solve_mcmo(pure_items(s), s, budget, Method.PURE_KNAPSACK)
        hyb = solve_mcmo(hybrid_items(s), s, budget, Method.HYBRID)
        assert fg.weakest_target_damage <= pure.worst_target_damage + 1e-9
        assert fg.weakest_target_damage <= hyb.worst_target_damage + 1e-9

    def test_mixed_support_shape(self, case_study_normal):
        result = solve_full_game(case_study_normal, 18.0)
        assert result.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
        assert result.support_size >= 2
        table = result.support()
        assert sum(p for _, p in table) == pytest.approx(1.0, abs=1e-6)
        assert all(isinstance(sc, Schedule) for sc, _ in table)

    def test_expected_costs_follow_the_mixture(self, case_study_normal):
        result = solve_full_game(case_study_normal, 12.0)
        direct = sum(p * sc.direct_cost for sc, p in zip(result.schedules, result.probabilities))
        assert result.expected_direct_cost == pytest.approx(direct, abs=1e-9)
        assert result.expected_direct_cost <= 12.0 + 1e-9

    def test_sweep_context_matches_single_solves(self, case_study_none):
        sweep = FullGameSweep(case_study_none, 30.0)
        for budget in (0.0, 10.0, 30.0):
            a = sweep.solve(budget)
            b = solve_full_game(case_study_none, budget)
            assert a.weakest_target_damage == pytest.approx(b.weakest_target_damage, abs=1e-9)
            assert a.value == pytest.approx(b.value, abs=1e-9)

    def test_budget_above_context_maximum_rejected(self, case_study_none):
        sweep = FullGameSweep(case_study_none, 10.0)
        with pytest.raises(SizingError, match="maximum"):
            sweep.solve(20.0)
