"""Finite two-player zero-sum matrix games.

Rows are defender actions, columns attacker targets, entries defender losses;
the defender minimizes and the attacker maximizes the same matrix.  The
minimax solution is computed by linear programming and certified by its
duality gap: the gap, not the algorithm, is the contract.

Also provides the closed-form 2x2 control-game equilibrium, epsilon-equilibrium
certification, and the two affine-transformation reductions that map a family
of non-zero-sum security games back onto the zero-sum solution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import SizingError, SolverError, ValidationError

__all__ = [
    "MAX_ROWS",
    "MAX_COLS",
    "CLAMP",
    "LossMatrix",
    "Equilibrium",
    "AffineTransform",
    "DeviationCheck",
    "OutcomeKind",
    "Analytic2x2Result",
    "AffineAttackerCheck",
    "AffineIndirectCheck",
    "solve_zero_sum",
    "expected_loss",
    "verify_epsilon_equilibrium",
    "analytic_2x2",
    "apply_affine_attacker",
    "apply_affine_indirect",
]

MAX_ROWS = 10_000
MAX_COLS = 64
CLAMP = 1e-12  # strategy entries below this are zeroed and the vector renormalized

# HiGHS at its default 1e-7 feasibility can leave duality gaps near 1e-9 on
# badly scaled games; pinning the tolerances keeps certified gaps ~1e-12
_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class LossMatrix:
    """Defender-loss matrix with row/column labels."""

    entries: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise ValidationError(f"loss matrix: expected a 2-d m x n array, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("loss matrix: entries must be finite")
        if self.row_labels and len(self.row_labels) != entries.shape[0]:
            raise ValidationError("loss matrix: row_labels length does not match rows")
        if self.col_labels and len(self.col_labels) != entries.shape[1]:
            raise ValidationError("loss matrix: col_labels length does not match columns")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class Equilibrium:
    """Mixed strategies with the saddle value and the certified duality gap."""

    defender: np.ndarray
    attacker: np.ndarray
    value: float
    duality_gap: float

    @property
    def defender_support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.defender > 1e-9))

    @property
    def attacker_support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.attacker > 1e-9))


@dataclass(frozen=True)
class AffineTransform:
    """scale * M + offset; scale must be nonzero (negative for attacker-payoff transforms)."""

    scale: float
    offset: float | np.ndarray = 0.0

    def __post_init__(self):
        if self.scale == 0:
            raise ValidationError("affine transform: scale must be nonzero")


@dataclass(frozen=True)
class DeviationCheck:
    """Outcome of an epsilon-equilibrium certification; witness names the profitable deviation."""

    ok: bool
    witness: tuple[str, int] | None = None  # ("defender", row) or ("attacker", col)
    slack: float = 0.0


def _as_entries(matrix) -> np.ndarray:
    if isinstance(matrix, LossMatrix):
        return matrix.entries
    entries = np.asarray(matrix, dtype=float)
    if entries.ndim != 2:
        raise ValidationError(f"loss matrix: expected a 2-d array, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise ValidationError("loss matrix: entries must be finite")
    return entries


def _clean_distribution(x: np.ndarray) -> np.ndarray:
    x = np.where(x > CLAMP, x, 0.0)
    total = x.sum()
    if total <= 0:
        raise SolverError("solver returned a degenerate (all-zero) strategy vector")
    x = x / total
    x.setflags(write=False)
    return x


def expected_loss(matrix, defender: Sequence[float], attacker: Sequence[float]) -> float:
    """Defender's expected loss under a mixed strategy pair."""
    a = _as_entries(matrix)
    return float(np.asarray(defender) @ a @ np.asarray(attacker))


def _defender_lp(a: np.ndarray):
    """min v  s.t.  A^T phi <= v, sum phi = 1, phi >= 0; duals give the attacker mix."""
    m, n = a.shape
    c = np.zeros(m + 1)
    c[-1] = 1.0
    a_ub = np.hstack([a.T, -np.ones((n, 1))])
    a_eq = np.zeros((1, m + 1))
    a_eq[0, :m] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(n),
        A_eq=a_eq,
        b_eq=np.ones(1),
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
        options=_LP_OPTIONS,
    )
    if not res.success:
        raise SolverError(f"zero-sum LP failed: {res.message}")
    return res.x[:m], -res.ineqlin.marginals


def _attacker_lp(a: np.ndarray):
    """max w  s.t.  A theta >= w, sum theta = 1, theta >= 0 (solved as a min)."""
    m, n = a.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-a, np.ones((m, 1))])
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(m),
        A_eq=a_eq,
        b_eq=np.ones(1),
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
        options=_LP_OPTIONS,
    )
    if not res.success:
        raise SolverError(f"zero-sum dual LP failed: {res.message}")
    return res.x[:n]


def solve_zero_sum(matrix, tolerance: float = 1e-9) -> Equilibrium:
    """Solve a zero-sum game exactly, certifying |ceiling - floor| <= tolerance.

    Raises SizingError beyond 10,000 x 64, and SolverError (carrying the best
    incumbent and its gap) if certification fails even after re-solving the
    attacker side directly.
    """
    a = _as_entries(matrix)
    if tolerance <= 0:
        raise ValidationError(f"tolerance: must be > 0, got {tolerance}")
    m, n = a.shape
    if m > MAX_ROWS or n > MAX_COLS:
        raise SizingError(
            f"game matrix {m} x {n} exceeds the {MAX_ROWS} x {MAX_COLS} solver cap"
        )

    phi, theta = _defender_lp(a)
    phi = _clean_distribution(phi)
    theta = _clean_distribution(theta)
    ceiling = float((phi @ a).max())
    floor = float((a @ theta).min())
    gap = ceiling - floor

    if gap > tolerance:
        # dual marginals were not tight enough; solve the attacker LP explicitly
        theta2 = _clean_distribution(_attacker_lp(a))
        floor2 = float((a @ theta2).min())
        if floor2 > floor:
            theta, floor = theta2, floor2
            gap = ceiling - floor

    eq = Equilibrium(
        defender=phi,
        attacker=theta,
        value=(ceiling + floor) / 2.0,
        duality_gap=max(gap, 0.0),
    )
    if eq.duality_gap > tolerance:
        raise SolverError(
            f"zero-sum solver could not certify gap <= {tolerance:g} "
            f"(best incumbent gap {eq.duality_gap:.3e})",
            incumbent=eq,
            gap=eq.duality_gap,
        )
    return eq


def _check_distribution(x, size: int, who: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (size,):
        raise ValidationError(f"{who} strategy: expected length {size}, got shape {x.shape}")
    if np.any(x < -1e-9) or abs(x.sum() - 1.0) > 1e-6:
        raise ValidationError(f"{who} strategy: not a probability distribution")
    return x


def verify_epsilon_equilibrium(matrix, defender, attacker, epsilon: float) -> DeviationCheck:
    """True iff no pure deviation improves either player by more than epsilon."""
    a = _as_entries(matrix)
    m, n = a.shape
    phi = _check_distribution(defender, m, "defender")
    theta = _check_distribution(attacker, n, "attacker")

    value = float(phi @ a @ theta)
    row_payoffs = a @ theta  # defender deviates to a pure row
    col_payoffs = phi @ a  # attacker deviates to a pure column
    best_row = int(np.argmin(row_payoffs))
    best_col = int(np.argmax(col_payoffs))
    defender_slack = value - float(row_payoffs[best_row])
    attacker_slack = float(col_payoffs[best_col]) - value

    if defender_slack > epsilon:
        return DeviationCheck(False, ("defender", best_row), defender_slack)
    if attacker_slack > epsilon:
        return DeviationCheck(False, ("attacker", best_col), attacker_slack)
    return DeviationCheck(True, None, max(defender_slack, attacker_slack))


class OutcomeKind(enum.Enum):
    PURE = "pure"
    INTERIOR = "interior"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Analytic2x2Result:
    """Closed-form 2x2 control-game outcome.

    Strategies are over rows (l, l') and columns (t, t'); for pure outcomes
    ``cell`` names the (row, col) played.
    """

    kind: OutcomeKind
    equilibrium: Equilibrium
    cell: tuple[int, int] | None = None


def _pure_outcome(a: np.ndarray, row: int, col: int, kind: OutcomeKind) -> Analytic2x2Result:
    phi = np.zeros(2)
    phi[row] = 1.0
    theta = np.zeros(2)
    theta[col] = 1.0
    gap = float((phi @ a).max() - (a @ theta).min())
    eq = Equilibrium(defender=phi, attacker=theta, value=float(a[row, col]), duality_gap=max(gap, 0.0))
    return Analytic2x2Result(kind=kind, equilibrium=eq, cell=(row, col))


def analytic_2x2(
    s_lt: float,
    s_lt2: float,
    s_l2t: float,
    s_l2t2: float,
    c_l: float,
    c_l2: float,
) -> Analytic2x2Result:
    """Closed-form equilibrium of the 2-level, 2-target control game.

    Arguments are S(l,t), S(l,t'), S(l',t), S(l',t') and the indirect costs
    C(l), C(l').  Writing dS(t) = S(l',t) - S(l,t) (likewise dS(t')),
    dS(l) = S(l,t') - S(l,t), dS(l') = S(l',t') - S(l',t) and
    dC = C(l') - C(l):

    * when the damage reduction of l' beats dC on both targets, the defender
      plays l' and the attacker its worst target (and symmetrically for l);
    * when dS(l) = dS(l'), the mix is undefined and the documented fallback
      picks the row with the smaller worst-case loss (ties to the lower
      level), with the attacker best-responding;
    * otherwise the interior mix is phi* = dS(l') / (dS(l') - dS(l)) on l and
      theta* = (dS(t) + dC + dS(l') - dS(l)) / (dS(l') - dS(l)) on t, both
      clamped to [0, 1].

    The +dC sign in theta* follows from the defender minimizing S + C; it
    is the convention under which the closed form agrees with the LP saddle
    point of the loss matrix.
    """
    vals = (s_lt, s_lt2, s_l2t, s_l2t2, c_l, c_l2)
    if not all(np.isfinite(v) for v in vals):
        raise ValidationError("analytic_2x2: all damages and costs must be finite")

    a = np.array(
        [
            [s_lt + c_l, s_lt2 + c_l],
            [s_l2t + c_l2, s_l2t2 + c_l2],
        ]
    )
    ds_t = s_l2t - s_lt
    ds_t2 = s_l2t2 - s_lt2
    ds_l = s_lt2 - s_lt
    ds_l2 = s_l2t2 - s_l2t
    dc = c_l2 - c_l
    red_t, red_t2 = -ds_t, -ds_t2  # damage reductions achieved by l'

    if red_t > dc and red_t2 > dc:
        # l' strictly dominant; attacker hits the target where l' still leaks most
        col = 0 if ds_l2 <= 0 else 1
        return _pure_outcome(a, 1, col, OutcomeKind.PURE)
    if red_t < dc and red_t2 < dc:
        col = 0 if ds_l <= 0 else 1
        return _pure_outcome(a, 0, col, OutcomeKind.PURE)

    if ds_l == ds_l2:
        # undefined mix: rows differ by a constant, so the smaller-max row is safe
        row_max = a.max(axis=1)
        row = 0 if row_max[0] <= row_max[1] else 1
        col = 0 if a[row, 0] >= a[row, 1] else 1
        return _pure_outcome(a, row, col, OutcomeKind.DEGENERATE)

    if (ds_l < 0) != (ds_l2 < 0):
        denom = ds_l2 - ds_l
        phi = min(1.0, max(0.0, ds_l2 / denom))
        theta = min(1.0, max(0.0, (ds_t + dc + ds_l2 - ds_l) / denom))
        phi_vec = np.array([phi, 1.0 - phi])
        theta_vec = np.array([theta, 1.0 - theta])
        value = float(phi_vec @ a @ theta_vec)
        gap = float((phi_vec @ a).max() - (a @ theta_vec).min())
        eq = Equilibrium(defender=phi_vec, attacker=theta_vec, value=value, duality_gap=max(gap, 0.0))
        return Analytic2x2Result(kind=OutcomeKind.INTERIOR, equilibrium=eq)

    # boundary cases: a pure saddle exists; scan cells deterministically
    for row, col in ((1, 0), (1, 1), (0, 0), (0, 1)):
        if a[row, col] <= a[1 - row, col] and a[row, col] >= a[row, 1 - col]:
            return _pure_outcome(a, row, col, OutcomeKind.PURE)
    raise SolverError("analytic_2x2: no saddle found (unexpected)")  # pragma: no cover


@dataclass(frozen=True)
class AffineAttackerCheck:
    """Equilibrium carry-over check for an attacker-payoff transform."""

    attacker_payoffs: np.ndarray
    equilibrium: Equilibrium
    certified: bool
    defender_check: DeviationCheck
    attacker_check: DeviationCheck


def apply_affine_attacker(matrix, transform: AffineTransform, epsilon: float = 1e-8) -> AffineAttackerCheck:
    """Check that a negative affine transform of the attacker's payoff keeps the equilibrium.

    The attacker's stake becomes scale * (-A) + offset (scale < 0), i.e. a
    rescaled share of the defender's loss, and the zero-sum saddle point must
    survive as an equilibrium of the resulting non-zero-sum pair.
    """
    a = _as_entries(matrix)
    if transform.scale >= 0:
        raise ValidationError(
            f"attacker transform: scale must be negative, got {transform.scale}"
        )
    offset = np.asarray(transform.offset, dtype=float)
    if offset.ndim not in (0, 2) or (offset.ndim == 2 and offset.shape != a.shape):
        raise ValidationError("attacker transform: offset must be scalar or match the matrix shape")

    attacker_payoffs = transform.scale * (-a) + offset
    eq = solve_zero_sum(a)

    value_loss = expected_loss(a, eq.defender, eq.attacker)
    row_payoffs = a @ eq.attacker
    best_row = int(np.argmin(row_payoffs))
    d_slack = value_loss - float(row_payoffs[best_row])
    d_check = DeviationCheck(d_slack <= epsilon, None if d_slack <= epsilon else ("defender", best_row), d_slack)

    value_att = float(eq.defender @ attacker_payoffs @ eq.attacker)
    col_payoffs = eq.defender @ attacker_payoffs
    best_col = int(np.argmax(col_payoffs))
    a_slack = float(col_payoffs[best_col]) - value_att
    a_check = DeviationCheck(a_slack <= epsilon, None if a_slack <= epsilon else ("attacker", best_col), a_slack)

    return AffineAttackerCheck(
        attacker_payoffs=attacker_payoffs,
        equilibrium=eq,
        certified=d_check.ok and a_check.ok,
        defender_check=d_check,
        attacker_check=a_check,
    )


@dataclass(frozen=True)
class AffineIndirectCheck:
    """Maxmin agreement check when the indirect cost is kappa * S - mu."""

    base: Equilibrium
    transformed: Equilibrium
    certified: bool
    supports_equal: bool
    value_consistent: bool


def apply_affine_indirect(s_matrix, kappa: float, mu: float, epsilon: float = 1e-8) -> AffineIndirectCheck:
    """Check that C = kappa * S - mu leaves the defender's maxmin unchanged.

    The transformed loss is S + C = (1 + kappa) * S - mu, a positive affine
    image of S, so each game's defender optimum must be epsilon-optimal in the
    other and the values must map through the same transform.
    """
    a = _as_entries(s_matrix)
    if kappa <= 0:
        raise ValidationError(f"kappa: must be > 0, got {kappa}")
    if kappa == 1:
        raise ValidationError("kappa: 1 is excluded (collapses the textbook payoff S - C)")

    scale = 1.0 + kappa
    a2 = scale * a - mu
    eq1 = solve_zero_sum(a)
    eq2 = solve_zero_sum(a2)

    cross2 = float((eq1.defender @ a2).max())  # eq1's guarantee inside the transformed game
    cross1 = float((eq2.defender @ a).max())
    certified = cross2 <= eq2.value + epsilon * max(1.0, scale) and cross1 <= eq1.value + epsilon
    value_consistent = abs(eq2.value - (scale * eq1.value - mu)) <= epsilon * max(1.0, scale)
    supports_equal = eq1.defender_support == eq2.defender_support

    return AffineIndirectCheck(
        base=eq1,
        transformed=eq2,
        certified=certified and value_consistent,
        supports_equal=supports_equal,
        value_consistent=value_consistent,
    )
