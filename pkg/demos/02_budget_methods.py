"""Three ways to spend one budget: full game, pure knapsack, hybrid.

Builds a small two-control scenario by hand, prices every method at a few
budgets and prints what each one actually buys.  Ends with the hybrid plan's
deployment advice: a mixed strategy read as "strictest level on the most
important devices first".

Run: python3 demos/02_budget_methods.py
"""

from secbudget import Method, budget_sweep, render_plan_advice, solve_full_game, solve_mcmo
from secbudget.knapsack import hybrid_items, pure_items
from secbudget.scenario import load_scenario
from secbudget.subgames import enumerate_plans

DOC = {
    "version": 1,
    "name": "two-control-demo",
    "depths": [{"id": 1, "impact": 6.0}, {"id": 2, "impact": 12.0}],
    "vulnerabilities": [
        {"id": 1, "cwe": 89, "category": "InsecureInteractions", "score": 90.0,
         "repair_cost": 4.0, "factors": {"pr": 2, "af": 3, "ed": 3, "aa": 3}},
        {"id": 2, "cwe": 311, "category": "PorousDefences", "score": 70.0,
         "repair_cost": 6.0, "factors": {"pr": 2, "af": 2, "ed": 3, "aa": 2}},
    ],
    "controls": [
        {"id": 1, "name": "web hardening", "levels": 3,
         "covers": ["InsecureInteractions"], "indirect_costs": [0.3, 0.8, 1.5]},
        {"id": 2, "name": "patching and secure configuration", "levels": 2,
         "covers": ["PorousDefences", "InsecureInteractions"], "indirect_costs": [0.5, 1.4]},
    ],
    "derivation": {"weights": [1, 1, 1, 1], "lambda": 0.5, "e_max": 0.9, "residual_floor": 0.0},
}

scenario = load_scenario(DOC)
total = sum(c.direct_costs[-1] for c in scenario.controls)
print(f"scenario: {len(scenario.targets)} targets, all-top direct cost {total:g}")

print()
print("=== Weakest-target damage by method and budget ===")
budgets = [0.0, 2.5, 5.0, 7.5, 10.0]
points = budget_sweep(scenario, budgets, [Method.FULL_GAME, Method.PURE_KNAPSACK, Method.HYBRID])
print("budget   fullgame   knapsack     hybrid")
for b in budgets:
    row = {p.method: p.worst_target_damage for p in points if p.budget == b}
    print(f"{b:6.1f}  {row[Method.FULL_GAME]:9.4f}  {row[Method.PURE_KNAPSACK]:9.4f}  {row[Method.HYBRID]:9.4f}")
print("the full game mixes whole schedules, so it is never worse at a given budget;")
print("the hybrid's mixed plans cost less than whole levels, so it can move at")
print("budgets where the pure knapsack still cannot afford the next level.")

print()
print("=== What the methods actually buy at budget 5 ===")
pure = solve_mcmo(pure_items(scenario), scenario, 5.0, Method.PURE_KNAPSACK)
hyb = solve_mcmo(hybrid_items(scenario), scenario, 5.0, Method.HYBRID)
full = solve_full_game(scenario, 5.0)
print(f"pure knapsack picks levels {list(pure.choices)} "
      f"(damage {pure.worst_target_damage:.4f}, direct {pure.total_direct_cost:g}, "
      f"indirect {pure.total_indirect_cost:g})")
print(f"hybrid picks plan caps {list(hyb.choices)} "
      f"(damage {hyb.worst_target_damage:.4f}, expected direct {hyb.total_direct_cost:.4f})")
print("full-game schedule mixture:")
for schedule, prob in full.support():
    print(f"  {list(schedule.levels)} with probability {prob:.3f}")

print()
print("=== Reading a mixed plan as deployment advice ===")
plans = enumerate_plans(scenario, 1)
plan = plans[scenario.controls[0].top_level]
print(f"control 1 plan at full cap: strategy {plan.strategy.round(3)}")
for level, devices in render_plan_advice(plan, 20):
    print(f"  level {level}: {devices} of 20 devices")
