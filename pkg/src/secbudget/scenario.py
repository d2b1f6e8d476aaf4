"""Scenario documents: parsing, validation, derivation, and the built-in case study.

A scenario document is a JSON object with the canonical fields::

    version
    depths[].{id, impact}
    vulnerabilities[].{id, cwe, category, score, repair_cost, factors{pr, af, ed, aa}}
    controls[].{id, name, levels, covers[], indirect_costs[], overrides?}
    derivation{weights, lambda, e_max, residual_floor}

plus an optional ``name`` and an optional explicit ``targets[]`` list
restricting the vulnerability x depth cross product.  Threat values are the
CWE-style score divided by 100.  Unless a control carries explicit
``overrides``, per-level efficacy and direct costs are derived from the
vulnerability factor data:

* a severity score in [0, 1] is the weighted mean of (factor - 1) / 2 over
  the four CWE attack factors;
* efficacy of level ``l`` out of ``L`` on a covered target is
  ``(l / L) * e_max * (1 - lambda * severity)`` and 0 on uncovered targets;
* the top-level direct cost is the summed repair cost of covered
  vulnerabilities, scaled uniformly over the levels.

Canonical serialization renders keys sorted and floats with 9 significant
digits, so serialize -> load -> serialize is a byte-level fixed point.
"""

from __future__ import annotations

import json
import math
from typing import Mapping, Sequence

from .errors import ValidationError
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
    "DEFAULT_DERIVATION",
    "parse_document",
    "load_scenario",
    "canonical_json",
    "scenario_to_document",
    "derive_efficacy",
    "derive_severity",
    "derive_direct_costs",
    "generate_case_study",
    "apply_indirect_preset",
    "CASE_STUDY_BUDGET",
]

DEFAULT_DERIVATION = {
    "weights": [1.0, 1.0, 1.0, 1.0],
    "lambda": 0.5,
    "e_max": 0.95,
    "residual_floor": 0.0,
}

FACTOR_KEYS = ("pr", "af", "ed", "aa")

CASE_STUDY_BUDGET = 82.0  # budget at which every control reaches its top level

# ratio of summed top-level indirect cost to summed top-level direct cost
# under the "normal" preset; each control gets a linear ramp C(l) = c0 * l
NORMAL_INDIRECT_RATIO = 0.25

# repair costs are snapped to this grid so the 82-budget calibration is exact
_COST_GRID = 2.0**-20


def derive_severity(factors: Sequence[int], weights: Sequence[float]) -> float:
    """Weighted mean of (factor - 1) / 2: 0 for all-1 factors, 1 for all-3."""
    if len(factors) != 4 or len(weights) != 4:
        raise ValidationError("derivation: factors and weights must have four entries")
    total = float(sum(weights))
    if any(w < 0 for w in weights) or total <= 0:
        raise ValidationError("derivation.weights: must be nonnegative and not all zero")
    return sum(w * (f - 1) / 2.0 for w, f in zip(weights, factors)) / total


def derive_efficacy(
    factors: Sequence[int],
    weights: Sequence[float],
    lam: float,
    level_index: int,
    level_count: int,
    e_max: float,
) -> float:
    """Efficacy of one level on one covered target; 0 at level 0, e_max scale at the top."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"derivation.lambda: must be in [0, 1], got {lam}")
    if not 0.0 < e_max < 1.0:
        raise ValidationError(f"derivation.e_max: must be in (0, 1), got {e_max}")
    if level_count < 1 or not 0 <= level_index <= level_count:
        raise ValidationError(
            f"derivation: level index {level_index} out of range for {level_count} levels"
        )
    severity = derive_severity(factors, weights)
    return (level_index / level_count) * e_max * (1.0 - lam * severity)


def derive_direct_costs(level_count: int, repair_costs: Sequence[float]) -> tuple[float, ...]:
    """Gamma(0..L): top level costs the summed repairs, lower levels scale uniformly."""
    if level_count < 1:
        raise ValidationError(f"derivation: level_count must be >= 1, got {level_count}")
    top = float(sum(repair_costs))
    return tuple((l / level_count) * top for l in range(level_count + 1))


# ---------------------------------------------------------------------------
# document parsing
# ---------------------------------------------------------------------------


def parse_document(document) -> dict:
    """Accept JSON text/bytes or an already-parsed mapping; reject anything else."""
    if isinstance(document, Mapping):
        return dict(document)
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    if not isinstance(document, str):
        raise ValidationError(f"document: expected JSON text or mapping, got {type(document).__name__}")
    try:
        parsed = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"document: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(parsed, dict):
        raise ValidationError("document: top level must be a JSON object")
    return parsed


def _require(mapping: Mapping, key: str, where: str):
    if key not in mapping:
        raise ValidationError(f"{where}.{key}: missing required field")
    return mapping[key]


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{where}: must be finite")
    return value


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where}: expected an integer, got {value!r}")
    return value


def _parse_category(value, where: str) -> Category:
    try:
        return Category(value)
    except ValueError:
        valid = ", ".join(c.value for c in Category)
        raise ValidationError(f"{where}: unknown category {value!r} (expected one of {valid})") from None


def load_scenario(document) -> Scenario:
    """Build and validate a Scenario from a document (text, bytes or mapping)."""
    doc = parse_document(document)

    version = _require(doc, "version", "document")
    if version != 1:
        raise ValidationError(f"document.version: unrecognized version {version!r}")

    derivation = dict(DEFAULT_DERIVATION)
    derivation.update(doc.get("derivation", {}))
    weights = [ _as_float(w, "derivation.weights") for w in derivation["weights"] ]
    lam = _as_float(derivation["lambda"], "derivation.lambda")
    e_max = _as_float(derivation["e_max"], "derivation.e_max")
    residual_floor = _as_float(derivation["residual_floor"], "derivation.residual_floor")
    if not 0.0 <= residual_floor < 1.0:
        raise ValidationError(f"derivation.residual_floor: must be in [0, 1), got {residual_floor}")
    derive_severity((1, 1, 1, 1), weights)  # validates weights
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"derivation.lambda: must be in [0, 1], got {lam}")
    if not 0.0 < e_max < 1.0:
        raise ValidationError(f"derivation.e_max: must be in (0, 1), got {e_max}")

    depths = []
    for i, entry in enumerate(doc.get("depths", [])):
        where = f"depths[{i}]"
        depths.append(
            Depth(id=_as_int(_require(entry, "id", where), f"{where}.id"),
                  impact=_as_float(_require(entry, "impact", where), f"{where}.impact"))
        )

    vulns = []
    for i, entry in enumerate(doc.get("vulnerabilities", [])):
        where = f"vulnerabilities[{i}]"
        factors_raw = _require(entry, "factors", where)
        factors = tuple(
            _as_int(_require(factors_raw, k, f"{where}.factors"), f"{where}.factors.{k}")
            for k in FACTOR_KEYS
        )
        for k, f in zip(FACTOR_KEYS, factors):
            if f not in (1, 2, 3):
                raise ValidationError(f"{where}.factors.{k}: must be 1, 2 or 3, got {f}")
        score = _as_float(_require(entry, "score", where), f"{where}.score")
        if not 0.0 < score <= 100.0:
            raise ValidationError(f"{where}.score: must be in (0, 100], got {score}")
        vulns.append(
            Vulnerability(
                id=_as_int(_require(entry, "id", where), f"{where}.id"),
                cwe_code=_as_int(_require(entry, "cwe", where), f"{where}.cwe"),
                threat=score / 100.0,
                factors=factors,
                repair_cost=_as_float(_require(entry, "repair_cost", where), f"{where}.repair_cost"),
                category=_parse_category(_require(entry, "category", where), f"{where}.category"),
            )
        )

    if "targets" in doc:
        targets = []
        for i, entry in enumerate(doc["targets"]):
            where = f"targets[{i}]"
            targets.append(
                Target(
                    vulnerability_id=_as_int(_require(entry, "vulnerability", where), f"{where}.vulnerability"),
                    depth_id=_as_int(_require(entry, "depth", where), f"{where}.depth"),
                )
            )
    else:
        targets = [Target(v.id, d.id) for v in vulns for d in depths]

    vuln_by_id = {v.id: v for v in vulns}
    controls = []
    for i, entry in enumerate(doc.get("controls", [])):
        where = f"controls[{i}]"
        cid = _as_int(_require(entry, "id", where), f"{where}.id")
        level_count = _as_int(_require(entry, "levels", where), f"{where}.levels")
        if level_count < 1:
            raise ValidationError(f"{where}.levels: must be >= 1, got {level_count}")
        covers = frozenset(
            _parse_category(c, f"{where}.covers") for c in entry.get("covers", [])
        )
        overrides = entry.get("overrides", {}) or {}

        if "efficacy" in overrides:
            eff_rows = overrides["efficacy"]
            if len(eff_rows) != level_count:
                raise ValidationError(
                    f"{where}.overrides.efficacy: expected {level_count} rows, got {len(eff_rows)}"
                )
            efficacy = [
                tuple(_as_float(e, f"{where}.overrides.efficacy[{l}]") for e in row)
                for l, row in enumerate(eff_rows)
            ]
            for l, row in enumerate(efficacy):
                if len(row) != len(targets):
                    raise ValidationError(
                        f"{where}.overrides.efficacy[{l}]: expected {len(targets)} entries, got {len(row)}"
                    )
        else:
            efficacy = []
            for l in range(1, level_count + 1):
                row = []
                for t in targets:
                    v = vuln_by_id.get(t.vulnerability_id)
                    if v is None:
                        raise ValidationError(
                            f"targets: vulnerability {t.vulnerability_id} not defined"
                        )
                    if v.category in covers:
                        row.append(derive_efficacy(v.factors, weights, lam, l, level_count, e_max))
                    else:
                        row.append(0.0)
                efficacy.append(tuple(row))

        if "direct_costs" in overrides:
            raw = overrides["direct_costs"]
            if len(raw) != level_count:
                raise ValidationError(
                    f"{where}.overrides.direct_costs: expected {level_count} entries, got {len(raw)}"
                )
            direct = [0.0] + [_as_float(g, f"{where}.overrides.direct_costs") for g in raw]
        else:
            covered_costs = [v.repair_cost for v in vulns if v.category in covers]
            direct = list(derive_direct_costs(level_count, covered_costs))

        raw_indirect = entry.get("indirect_costs", [])
        if raw_indirect and len(raw_indirect) != level_count:
            raise ValidationError(
                f"{where}.indirect_costs: expected {level_count} entries, got {len(raw_indirect)}"
            )
        indirect = [0.0] + [_as_float(c, f"{where}.indirect_costs") for c in raw_indirect]
        if len(indirect) < level_count + 1:
            indirect = [0.0] * (level_count + 1)

        levels = [ControlLevel(0, tuple(0.0 for _ in targets), 0.0, 0.0)]
        for l in range(1, level_count + 1):
            levels.append(
                ControlLevel(l, efficacy[l - 1], direct[l], indirect[l])
            )
        controls.append(
            Control(
                id=cid,
                name=str(entry.get("name", f"control-{cid}")),
                levels=tuple(levels),
                covered_categories=covers,
            )
        )

    scenario = Scenario(
        name=str(doc.get("name", "scenario")),
        depths=tuple(depths),
        vulnerabilities=tuple(vulns),
        targets=tuple(targets),
        controls=tuple(controls),
        residual_floor=residual_floor,
    )
    return validate_scenario(scenario)


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------


def _render(value, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError("document: cannot serialize non-finite numbers")
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return format(value, ".9g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(k))}: {_render(value[k], indent + 1)}"
            for k in sorted(value)
        ]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        parts = [f"{inner}{_render(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    raise ValidationError(f"document: cannot serialize {type(value).__name__}")


def canonical_json(document: Mapping) -> str:
    """Sorted keys, 9-significant-digit floats; stable under reserialization."""
    return _render(document, 0) + "\n"


def scenario_to_document(scenario: Scenario) -> dict:
    """Emit a document that reloads to the same scenario (efficacy/costs as overrides)."""
    return {
        "version": 1,
        "name": scenario.name,
        "depths": [{"id": d.id, "impact": d.impact} for d in scenario.depths],
        "vulnerabilities": [
            {
                "id": v.id,
                "cwe": v.cwe_code,
                "category": v.category.value,
                "score": v.threat * 100.0,
                "repair_cost": v.repair_cost,
                "factors": dict(zip(FACTOR_KEYS, v.factors)),
            }
            for v in scenario.vulnerabilities
        ],
        "targets": [
            {"vulnerability": t.vulnerability_id, "depth": t.depth_id} for t in scenario.targets
        ],
        "controls": [
            {
                "id": c.id,
                "name": c.name,
                "levels": c.top_level,
                "covers": sorted(cat.value for cat in c.covered_categories),
                "indirect_costs": [lv.indirect_cost for lv in c.levels[1:]],
                "overrides": {
                    "efficacy": [list(lv.efficacy) for lv in c.levels[1:]],
                    "direct_costs": [lv.direct_cost for lv in c.levels[1:]],
                },
            }
            for c in scenario.controls
        ],
        "derivation": {
            "weights": list(DEFAULT_DERIVATION["weights"]),
            "lambda": DEFAULT_DERIVATION["lambda"],
            "e_max": DEFAULT_DERIVATION["e_max"],
            "residual_floor": scenario.residual_floor,
        },
    }


# ---------------------------------------------------------------------------
# built-in case study (SANS critical controls x CWE top software weaknesses)
# ---------------------------------------------------------------------------

_II = Category.INSECURE_INTERACTIONS.value
_RRM = Category.RISKY_RESOURCE_MANAGEMENT.value
_PD = Category.POROUS_DEFENCES.value

# (id, cwe, category, score, (pr, af, ed, aa)); scores follow the published
# CWE/SANS top-25 ranking data
CASE_STUDY_VULNERABILITIES = (
    (1, 89, _II, 93.8, (2, 3, 3, 3)),    # SQL injection
    (2, 78, _II, 83.3, (1, 3, 3, 3)),    # OS command injection
    (3, 120, _RRM, 79.0, (2, 3, 3, 3)),  # classic buffer overflow
    (4, 79, _II, 77.7, (2, 3, 3, 3)),    # cross-site scripting
    (5, 306, _PD, 76.9, (1, 2, 2, 3)),   # missing authentication
    (6, 862, _PD, 75.0, (2, 3, 2, 2)),   # missing authorization
    (7, 311, _PD, 73.8, (2, 2, 3, 2)),   # missing encryption
    (8, 434, _II, 73.1, (1, 2, 2, 3)),   # unrestricted upload
    (9, 250, _PD, 69.0, (1, 2, 2, 2)),   # unnecessary privileges
    (10, 352, _II, 68.5, (2, 3, 2, 3)),  # cross-site request forgery
    (11, 22, _RRM, 68.3, (3, 3, 3, 1)),  # path traversal
    (12, 494, _RRM, 61.8, (1, 1, 2, 3)), # download of code without integrity check
)

# (id, name, level count, covered categories); the category mapping is a
# documented reconstruction from the control descriptions
CASE_STUDY_CONTROLS = (
    (1, "Inventory of Authorised and Unauthorised Devices", 3, (_RRM,)),
    (2, "Inventory of Authorised and Unauthorised Software", 3, (_RRM,)),
    (3, "Secure Configuration for Hardware and Software on Devices", 5, (_PD,)),
    (4, "Continuous Vulnerability Assessment and Remediation", 4, (_II,)),
    (5, "Malware Defences", 6, (_II,)),
    (6, "Application Software Security", 2, (_II,)),
    (7, "Controlled Use of Administrative Privileges", 6, (_PD,)),
)

DEFAULT_IMPACTS = (4.0, 7.0, 12.0)  # shallow to deep


def _calibrated_repair_costs() -> dict[int, float]:
    """Score-proportional repair costs rescaled so the all-top budget is exactly 82."""
    multiplicity = {cat: 0 for _, _, cat, _, _ in CASE_STUDY_VULNERABILITIES}
    for _, _, _, covers in CASE_STUDY_CONTROLS:
        for cat in covers:
            multiplicity[cat] += 1

    base = {vid: score / 100.0 for vid, _, _, score, _ in CASE_STUDY_VULNERABILITIES}
    weighted = sum(
        base[vid] * multiplicity[cat] for vid, _, cat, _, _ in CASE_STUDY_VULNERABILITIES
    )
    scale = CASE_STUDY_BUDGET / weighted

    # snap to a binary grid, then absorb the rounding residue into one
    # vulnerability whose category has even multiplicity, keeping the
    # calibration exact in double precision
    costs = {
        vid: round(base[vid] * scale / _COST_GRID) * _COST_GRID
        for vid, _, _, _, _ in CASE_STUDY_VULNERABILITIES
    }
    slack_vid = next(
        vid
        for vid, _, cat, _, _ in CASE_STUDY_VULNERABILITIES
        if multiplicity[cat] == 2
    )
    slack_cat = next(cat for vid, _, cat, _, _ in CASE_STUDY_VULNERABILITIES if vid == slack_vid)
    others = sum(
        costs[vid] * multiplicity[cat]
        for vid, _, cat, _, _ in CASE_STUDY_VULNERABILITIES
        if vid != slack_vid
    )
    costs[slack_vid] = (CASE_STUDY_BUDGET - others) / multiplicity[slack_cat]
    if costs[slack_vid] < 0:
        raise ValidationError("case study calibration: negative repair cost")  # pragma: no cover
    return costs


def _control_top_costs(repair_costs: Mapping[int, float]) -> dict[int, float]:
    tops = {}
    for cid, _, _, covers in CASE_STUDY_CONTROLS:
        tops[cid] = sum(
            repair_costs[vid]
            for vid, _, cat, _, _ in CASE_STUDY_VULNERABILITIES
            if cat in covers
        )
    return tops


def generate_case_study(impact_profile="default", indirect_profile="normal") -> dict:
    """Build the 7-control, 12-vulnerability, 3-depth case-study document.

    ``impact_profile`` is "default" or a sequence of three per-depth impacts;
    ``indirect_profile`` is "none" (all zero, for the no-indirect-cost runs),
    "normal" (a linear ramp worth 25% of direct cost), or a mapping from
    control id to a per-level cost list.
    """
    if impact_profile == "default":
        impacts = DEFAULT_IMPACTS
    else:
        impacts = tuple(float(i) for i in impact_profile)
    if len(impacts) != 3:
        raise ValidationError(f"impact profile: expected 3 per-depth impacts, got {len(impacts)}")

    repair_costs = _calibrated_repair_costs()
    top_costs = _control_top_costs(repair_costs)

    def indirect_for(cid: int, level_count: int) -> list[float]:
        if indirect_profile == "none":
            return [0.0] * level_count
        if indirect_profile == "normal":
            c0 = NORMAL_INDIRECT_RATIO * top_costs[cid] / level_count
            return [c0 * l for l in range(1, level_count + 1)]
        if isinstance(indirect_profile, Mapping):
            ramp = indirect_profile.get(cid)
            if ramp is None or len(ramp) != level_count:
                raise ValidationError(
                    f"indirect profile: control {cid} needs {level_count} per-level costs"
                )
            return [float(c) for c in ramp]
        raise ValidationError(f"indirect profile: unknown preset {indirect_profile!r}")

    covered = {cat for _, _, _, covers in CASE_STUDY_CONTROLS for cat in covers}
    for vid, _, cat, _, _ in CASE_STUDY_VULNERABILITIES:
        if cat not in covered:
            raise ValidationError(f"case study: vulnerability {vid} covered by no control")  # pragma: no cover

    return {
        "version": 1,
        "name": "sans-cwe-case-study",
        "depths": [{"id": i + 1, "impact": impacts[i]} for i in range(3)],
        "vulnerabilities": [
            {
                "id": vid,
                "cwe": cwe,
                "category": cat,
                "score": score,
                "repair_cost": repair_costs[vid],
                "factors": dict(zip(FACTOR_KEYS, factors)),
            }
            for vid, cwe, cat, score, factors in CASE_STUDY_VULNERABILITIES
        ],
        "controls": [
            {
                "id": cid,
                "name": name,
                "levels": levels,
                "covers": list(covers),
                "indirect_costs": indirect_for(cid, levels),
            }
            for cid, name, levels, covers in CASE_STUDY_CONTROLS
        ],
        "derivation": dict(DEFAULT_DERIVATION),
    }


def apply_indirect_preset(document: Mapping, preset) -> dict:
    """Return a copy of a document with indirect costs replaced by a preset.

    ``preset`` follows generate_case_study's ``indirect_profile`` argument;
    the "normal" ramp is recomputed from each control's derived (or
    overridden) top-level direct cost.
    """
    doc = json.loads(json.dumps(dict(document)))
    vuln_costs = {
        v["id"]: (v["repair_cost"], v["category"]) for v in doc.get("vulnerabilities", [])
    }
    for entry in doc.get("controls", []):
        level_count = entry["levels"]
        if preset == "none":
            entry["indirect_costs"] = [0.0] * level_count
        elif preset == "normal":
            overrides = entry.get("overrides", {}) or {}
            if "direct_costs" in overrides:
                top = float(overrides["direct_costs"][-1])
            else:
                covers = set(entry.get("covers", []))
                top = sum(cost for cost, cat in vuln_costs.values() if cat in covers)
            c0 = NORMAL_INDIRECT_RATIO * top / level_count
            entry["indirect_costs"] = [c0 * l for l in range(1, level_count + 1)]
        elif isinstance(preset, Mapping):
            ramp = preset.get(entry["id"])
            if ramp is None or len(ramp) != level_count:
                raise ValidationError(
                    f"indirect profile: control {entry['id']} needs {level_count} per-level costs"
                )
            entry["indirect_costs"] = [float(c) for c in ramp]
        else:
            raise ValidationError(f"indirect preset: unknown preset {preset!r}")
    return doc
