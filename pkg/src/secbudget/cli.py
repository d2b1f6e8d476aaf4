"""Command-line surface: validate scenarios, solve at a budget, sweep budgets, render advice.

Outputs are deterministic: identical configs on identical inputs produce
byte-identical CSVs, with floats rendered at 9 significant digits.  Exit
codes: 0 success, 1 I/O, 2 validation/usage, 3 solver, 4 sizing.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SizingError, SolverError, ValidationError
from .fullgame import FullGameSweep
from .knapsack import Method, budget_sweep, hybrid_items, pure_items, solve_mcmo
from .model import Scenario
from .oracles import OracleReport, oracle_knapsack
from .scenario import (
    DEFAULT_DERIVATION,
    apply_indirect_preset,
    canonical_json,
    generate_case_study,
    load_scenario,
    parse_document,
)
from .subgames import enumerate_plans, render_plan_advice

ALL_METHODS = (Method.FULL_GAME, Method.PURE_KNAPSACK, Method.HYBRID)


@dataclass(frozen=True)
class RunConfig:
    """Everything one command execution depends on."""

    scenario_path: str
    methods: tuple[Method, ...]
    budgets: tuple[float, ...]
    out_dir: str = "."
    chart: bool = False
    seed: int = 0
    indirect: str | None = None
    derivation_overrides: dict = field(default_factory=dict)


def _fmt(x: float) -> str:
    """9-significant-digit rendering shared by every CSV and report."""
    if isinstance(x, float) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".9g")


def _parse_methods(raw: list[str] | None) -> tuple[Method, ...]:
    if not raw:
        return ALL_METHODS
    methods = []
    for token in raw:
        method = Method(token)
        if method not in methods:
            methods.append(method)
    return tuple(methods)


def _parse_budget_range(spec: str) -> tuple[float, ...]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValidationError(f"budget range: expected A:B:STEP, got {spec!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0:
        raise ValidationError(f"budget range: step must be > 0, got {step}")
    if hi < lo:
        raise ValidationError(f"budget range: empty range {spec!r}")
    budgets = []
    b = lo
    while b <= hi + 1e-12:
        budgets.append(round(b, 12))
        b += step
    return tuple(budgets)


def _load(config: RunConfig) -> Scenario:
    path = Path(config.scenario_path)
    text = path.read_text(encoding="utf-8")
    doc = parse_document(text)
    if config.indirect is not None:
        preset = config.indirect
        if preset not in ("none", "normal"):
            ramp_doc = json.loads(Path(preset).read_text(encoding="utf-8"))
            preset = {int(k): v for k, v in ramp_doc.items()}
        doc = apply_indirect_preset(doc, preset)
    if config.derivation_overrides:
        derivation = dict(doc.get("derivation", {}))
        derivation.update(config.derivation_overrides)
        doc["derivation"] = derivation

    # results are only meaningful alongside the derivation parameters used
    effective = dict(DEFAULT_DERIVATION)
    effective.update(doc.get("derivation", {}))
    weights = ",".join(_fmt(float(w)) for w in effective["weights"])
    print(
        f"derivation: weights={weights} lambda={_fmt(float(effective['lambda']))} "
        f"e_max={_fmt(float(effective['e_max']))} "
        f"residual_floor={_fmt(float(effective['residual_floor']))}"
        + (f" indirect={config.indirect}" if config.indirect else "")
    )
    return load_scenario(doc)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


def _strategy_cell(probs) -> str:
    return " ".join(_fmt(float(p)) for p in probs)


def cmd_validate(args) -> int:
    config = _config_from(args, budgets=(0.0,))
    scenario = _load(config)
    print(
        f"ok: {scenario.name}: {len(scenario.controls)} controls, "
        f"{len(scenario.vulnerabilities)} vulnerabilities, {len(scenario.targets)} targets"
    )
    return 0


def _solution_rows(scenario: Scenario, method: Method, budget: float):
    """Per-control rows (control_id, choice, strategy, direct_cost) plus a summary row."""
    if method is Method.FULL_GAME:
        result = FullGameSweep(scenario, budget).solve(budget)
        rows = []
        for j, control in enumerate(scenario.controls):
            marginal = [0.0] * (control.top_level + 1)
            for schedule, prob in zip(result.schedules, result.probabilities):
                marginal[schedule.levels[j]] += float(prob)
            choice = max(range(len(marginal)), key=lambda l: (marginal[l], -l))
            rows.append((str(control.id), str(choice), _strategy_cell(marginal), _fmt(control.direct_costs[choice])))
        summary_choices = "[" + ",".join(r[1] for r in rows) + "]"
        summary = (
            "summary",
            summary_choices,
            f"worst_target_damage={_fmt(result.weakest_target_damage)}",
            _fmt(result.expected_direct_cost),
        )
        return rows, summary, result

    groups = pure_items(scenario) if method is Method.PURE_KNAPSACK else hybrid_items(scenario)
    solution = solve_mcmo(groups, scenario, budget, method)
    rows = []
    for item in solution.chosen:
        strategy = item.strategy if item.strategy is not None else [1.0]
        rows.append((str(item.control_id), str(item.choice_index), _strategy_cell(strategy), _fmt(item.direct_cost)))
    summary = (
        "summary",
        "[" + ",".join(str(c) for c in solution.choices) + "]",
        f"worst_target_damage={_fmt(solution.worst_target_damage)}",
        _fmt(solution.total_direct_cost),
    )
    return rows, summary, solution


def cmd_solve(args) -> int:
    config = _config_from(args, budgets=(float(args.budget),))
    scenario = _load(config)
    out = Path(config.out_dir)
    budget = config.budgets[0]
    for method in config.methods:
        rows, summary, result = _solution_rows(scenario, method, budget)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["control_id", "choice", "strategy", "direct_cost"])
        writer.writerows(rows)
        writer.writerow(summary)
        _write(out / f"solution_{method.value}_{_fmt(budget)}.csv", buf.getvalue())
        if method is Method.FULL_GAME:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["package", "probability"])
            for schedule, prob in result.support():
                package = "[" + ",".join(str(l) for l in schedule.levels) + "]"
                writer.writerow([package, _fmt(prob)])
            _write(out / f"schedules_fullgame_{_fmt(budget)}.csv", buf.getvalue())
        print(f"solved {method.value} at budget {_fmt(budget)} -> {out}")
    return 0


def _sweep_csv(points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["budget", "method", "weakest_damage", "total_direct_cost", "total_indirect_cost"])
    for p in points:
        writer.writerow(
            [
                _fmt(p.budget),
                p.method.value,
                _fmt(p.worst_target_damage),
                _fmt(p.total_direct_cost),
                _fmt(p.total_indirect_cost),
            ]
        )
    return buf.getvalue()


def _write_chart(points, methods, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method in methods:
        series = [(p.budget, p.worst_target_damage) for p in points if p.method is method]
        ax.plot([b for b, _ in series], [d for _, d in series], label=method.value)
    ax.set_xlabel("budget")
    ax.set_ylabel("expected damage at the weakest target")
    ax.legend()
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _self_check(scenario: Scenario, budgets, out) -> int:
    """Cross-check knapsack optima against the brute-force oracle at sample budgets."""
    picks = sorted({budgets[0], budgets[len(budgets) // 2], budgets[-1]})
    failures = 0
    for method in (Method.PURE_KNAPSACK, Method.HYBRID):
        groups = pure_items(scenario) if method is Method.PURE_KNAPSACK else hybrid_items(scenario)
        for budget in picks:
            system = solve_mcmo(groups, scenario, budget, method)
            oracle = oracle_knapsack(groups, scenario, budget, method)
            report = OracleReport(
                case=f"{method.value} at budget {_fmt(budget)}",
                oracle_value=oracle.objective,
                system_value=system.objective,
                tolerance=1e-9,
            )
            print(report.line())
            if not report.passed or oracle.choices != system.choices:
                failures += 1
    return failures


def cmd_sweep(args) -> int:
    config = _config_from(args, budgets=_parse_budget_range(args.budget_range))
    scenario = _load(config)
    points = budget_sweep(scenario, list(config.budgets), list(config.methods))
    out = Path(config.out_dir)
    _write(out / "sweep.csv", _sweep_csv(points))
    print(f"wrote {out / 'sweep.csv'} ({len(points)} points)")
    if config.chart:
        _write_chart(points, config.methods, out / "sweep_chart.svg")
        print(f"wrote {out / 'sweep_chart.svg'}")
    if args.self_check:
        failures = _self_check(scenario, config.budgets, out)
        if failures:
            raise SolverError(f"self-check: {failures} oracle disagreements")
        print("self-check passed")
    return 0


def cmd_advice(args) -> int:
    if args.devices < 1:
        raise ValidationError(f"devices: must be >= 1, got {args.devices}")
    config = _config_from(args, budgets=(float(args.budget),))
    scenario = _load(config)
    plans = [enumerate_plans(scenario, c.id) for c in scenario.controls]
    groups = hybrid_items(scenario, plans)
    solution = solve_mcmo(groups, scenario, config.budgets[0], Method.HYBRID)

    control = scenario.control(args.control)
    position = next(i for i, c in enumerate(scenario.controls) if c.id == control.id)
    cap = solution.choices[position]
    plan = plans[position][cap]
    if not plan.support or plan.support == (0,):
        raise ValidationError(
            f"control {control.id} ({control.name}) is not part of the hybrid "
            f"solution at budget {_fmt(config.budgets[0])}"
        )
    lines = render_plan_advice(plan, args.devices)
    print(f"{control.name} (control {control.id}), budget {_fmt(config.budgets[0])}, {args.devices} devices:")
    total = args.devices
    covered = 0
    for level, count in lines:
        share = "top" if covered == 0 and count < total else ("remaining" if covered else "all")
        what = f"level {level}" if level > 0 else "no implementation"
        print(f"  {what} on {share} {count} of {total} devices")
        covered += count
    return 0


def cmd_gen_case_study(args) -> int:
    impacts = "default"
    if args.impacts:
        impacts = [float(x) for x in args.impacts.split(",")]
    doc = generate_case_study(impact_profile=impacts, indirect_profile=args.indirect)
    text = canonical_json(doc)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        _write(Path(args.out), text)
        print(f"wrote {args.out}")
    return 0


def _config_from(args, budgets) -> RunConfig:
    overrides = {}
    if getattr(args, "lambda_", None) is not None:
        overrides["lambda"] = args.lambda_
    if getattr(args, "e_max", None) is not None:
        overrides["e_max"] = args.e_max
    if getattr(args, "weights", None):
        weights = [float(w) for w in args.weights.split(",")]
        if len(weights) != 4:
            raise ValidationError(f"weights: expected four comma-separated values, got {args.weights!r}")
        overrides["weights"] = weights
    return RunConfig(
        scenario_path=args.scenario,
        methods=_parse_methods(getattr(args, "method", None)),
        budgets=tuple(budgets),
        out_dir=getattr(args, "out", ".") or ".",
        chart=bool(getattr(args, "chart", False)),
        seed=int(getattr(args, "seed", 0) or 0),
        indirect=getattr(args, "indirect", None),
        derivation_overrides=overrides,
    )


def _add_common(parser: argparse.ArgumentParser, with_methods: bool = True) -> None:
    parser.add_argument("--scenario", required=True, help="scenario document (JSON)")
    if with_methods:
        parser.add_argument(
            "--method",
            action="append",
            choices=[m.value for m in ALL_METHODS],
            help="repeatable; default: all three methods",
        )
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--indirect", help="indirect-cost preset: none, normal, or a JSON ramp file")
    parser.add_argument("--lambda", dest="lambda_", metavar="LAMBDA", type=float,
                        help="severity discount in [0,1]")
    parser.add_argument("--e-max", dest="e_max", type=float, help="top-level efficacy ceiling in (0,1)")
    parser.add_argument("--weights", help="four comma-separated factor weights")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secbudget",
        description="Cyber-security budget allocation: full game, knapsack, and hybrid methods",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a scenario document")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve every requested method at one budget")
    _add_common(p)
    p.add_argument("--budget", type=float, required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="sweep a budget range and write sweep.csv")
    _add_common(p)
    p.add_argument("--budget-range", required=True, metavar="A:B:STEP")
    p.add_argument("--chart", action="store_true", help="also write an SVG line chart")
    p.add_argument("--self-check", action="store_true", help="cross-check knapsack optima against the oracle")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("advice", help="deployment advice for one control in the hybrid solution")
    _add_common(p, with_methods=False)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--control", type=int, required=True)
    p.add_argument("--devices", type=int, required=True)
    p.set_defaults(func=cmd_advice)

    p = sub.add_parser("gen-case-study", help="write the built-in case-study document")
    p.add_argument("--out", default="case_study.json", help="output file, or - for stdout")
    p.add_argument("--indirect", default="normal", choices=["none", "normal"])
    p.add_argument("--impacts", help="three comma-separated per-depth impacts")
    p.set_defaults(func=cmd_gen_case_study)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except SizingError as exc:
        print(f"sizing error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
