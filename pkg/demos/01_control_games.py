"""A single control against two targets: the 2x2 control game end to end.

Walks through the smallest interesting game in the model: a defender picking
between two implementation levels of one control, an attacker picking between
two targets.  Shows the closed-form equilibrium, the LP cross-check, how the
extra indirect cost dC moves the equilibrium through the pure and mixed
regions, and why the affine-transformation lemmas let us keep solving the
zero-sum game even when the attacker's stake differs from the defender's loss.

Run: python3 demos/01_control_games.py
"""

import numpy as np

from secbudget import (
    AffineTransform,
    analytic_2x2,
    apply_affine_attacker,
    apply_affine_indirect,
    solve_zero_sum,
)

# Damages S(level, target): the lower level l leaks 4 on target t and 1 on
# t'; the higher level l' flips that to 1 and 3.  No indirect costs yet.
S = dict(s_lt=4.0, s_lt2=1.0, s_l2t=1.0, s_l2t2=3.0)

print("=== Closed form vs linear program ===")
res = analytic_2x2(**S, c_l=0.0, c_l2=0.0)
print(f"closed form: kind={res.kind.value}, defender={res.equilibrium.defender}, "
      f"attacker={res.equilibrium.attacker}, value={res.equilibrium.value:.6f}")

loss = np.array([[S["s_lt"], S["s_lt2"]], [S["s_l2t"], S["s_l2t2"]]])
eq = solve_zero_sum(loss)
print(f"LP saddle:   defender={np.round(eq.defender, 6)}, "
      f"attacker={np.round(eq.attacker, 6)}, value={eq.value:.6f}, "
      f"gap={eq.duality_gap:.2e}")

print()
print("=== How the extra indirect cost dC moves the equilibrium ===")
print("dC     kind        P(level l)  P(target t)  value")
for dc in (0.0, 0.5, 1.0, 2.0, 3.5, 5.0):
    r = analytic_2x2(**S, c_l=0.0, c_l2=dc)
    phi, theta = r.equilibrium.defender[0], r.equilibrium.attacker[0]
    print(f"{dc:4.1f}   {r.kind.value:<10}  {phi:10.4f}  {theta:11.4f}  {r.equilibrium.value:7.4f}")
print("small dC: the stronger level earns its keep; large dC: the defender stays put.")

print()
print("=== Attacker who only gets a tenth of the damage (negative affine) ===")
check = apply_affine_attacker(loss, AffineTransform(scale=-0.1))
print(f"equilibrium carries over: certified={check.certified} "
      f"(defender slack {check.defender_check.slack:.2e}, "
      f"attacker slack {check.attacker_check.slack:.2e})")

print()
print("=== Indirect cost as a positive affine image of the damage ===")
check2 = apply_affine_indirect(loss, kappa=0.5, mu=1.0)
print(f"same defender maxmin: certified={check2.certified}, "
      f"supports equal={check2.supports_equal}, "
      f"values {check2.base.value:.4f} -> {check2.transformed.value:.4f} "
      f"(expected {1.5 * check2.base.value - 1.0:.4f})")
