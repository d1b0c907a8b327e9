"""Report assembly and serialization: breakdown JSON/CSV, compute reports,
delta-tree JSON, and loaders for the JSON input files (part, scenario,
series, rate tables).

Rounding happens only here, at 6 decimal places, round-half-even.  Leaf
amounts are rounded individually; node subtotals and category totals are
then recomputed from the rounded leaves in decimal arithmetic, so every
serialized tree is self-consistent: re-summing the leaves of the JSON or
CSV reproduces the serialized totals exactly.
"""

from __future__ import annotations

import json
from decimal import ROUND_HALF_EVEN, Decimal

from .model import Category, CostModel, PartSpec
from .rollup import (
    CostBreakdown,
    Indicators,
    LineItem,
    SeriesSpec,
    amortize_series,
    budget_overrun_indicator,
    compute_part_cost,
    target_indicator,
)
from .scenario import DeltaTree, Scenario, RateTable

_SIX = Decimal("0.000001")


def round6(value: float) -> float:
    """Round-half-even to 6 decimals (banker's rounding of the binary value)."""
    return float(Decimal(value).quantize(_SIX, rounding=ROUND_HALF_EVEN))


def _dec6(value: float) -> Decimal:
    return Decimal(value).quantize(_SIX, rounding=ROUND_HALF_EVEN)


def breakdown_to_dict(node: CostBreakdown) -> dict:
    """Nested JSON form; totals are decimal sums of the rounded leaves."""
    payload, _, _ = _node_dict(node)
    return payload


def _node_dict(node: CostBreakdown) -> tuple[dict, Decimal, dict[Category, Decimal]]:
    children = []
    total = Decimal(0)
    cats: dict[Category, Decimal] = {}
    for child in node.children:
        if isinstance(child, LineItem):
            amount = _dec6(child.amount)
            children.append({
                "label": child.label,
                "source_id": child.source_id,
                "category": child.category.value,
                "amount": float(amount),
                "quantity": round6(child.quantity),
            })
            total += amount
            cats[child.category] = cats.get(child.category, Decimal(0)) + amount
        else:
            payload, sub_total, sub_cats = _node_dict(child)
            children.append(payload)
            total += sub_total
            for cat, dec in sub_cats.items():
                cats[cat] = cats.get(cat, Decimal(0)) + dec
    payload = {
        "label": node.label,
        "subtotal": float(total),
        "scrap_multiplier": round6(node.scrap_multiplier_applied),
        "category_totals": {c.value: float(cats[c]) for c in Category if c in cats},
        "children": children,
    }
    return payload, total, cats


def breakdown_to_csv(node: CostBreakdown) -> str:
    """One row per leaf: full path, category, amount at 6 decimals."""
    lines = ["path,category,amount"]
    for path, leaf in node.iter_leaves():
        lines.append(f"{'/'.join(path)},{leaf.category.value},{_dec6(leaf.amount)}")
    return "\n".join(lines) + "\n"


def emit_breakdown(node: CostBreakdown, format: str = "json") -> bytes:
    """Serialize a breakdown as canonical JSON or CSV bytes."""
    if format == "json":
        return (json.dumps(breakdown_to_dict(node), indent=2) + "\n").encode("utf-8")
    if format == "csv":
        return breakdown_to_csv(node).encode("utf-8")
    raise ValueError(f"unknown format '{format}' (expected json or csv)")


def delta_tree_to_dict(tree: DeltaTree) -> dict:
    return {
        "label": tree.label,
        "base": round6(tree.base_subtotal),
        "variant": round6(tree.variant_subtotal),
        "delta": round6(tree.delta),
        "relative_delta": tree.relative_delta,
        "children": [delta_tree_to_dict(c) for c in tree.children],
    }


def build_report(
    model: CostModel,
    part: PartSpec,
    scenario: Scenario | None = None,
    series: SeriesSpec | None = None,
    target: float | None = None,
    *,
    validated: bool = False,
) -> dict:
    """Compute a part and assemble the full JSON report used by CLI and API.

    Indicators are computed from the reported (rounded) per-part cost so the
    document is self-consistent; the target stands in for the budget in the
    overrun indicator.
    """
    breakdown = compute_part_cost(model, part, scenario, validated=validated)
    tree = breakdown_to_dict(breakdown)
    report: dict = {
        "model": model.id,
        "currency": model.currency,
        "direct_cost_per_part": tree["subtotal"],
    }
    # per-part cost for indicators comes from the raw engine total so that
    # compute and sweep surfaces serialize identically for identical inputs
    cost_per_part = round6(breakdown.subtotal)
    if series is not None:
        cost_per_part = round6(amortize_series(breakdown.subtotal, series))
        report["series"] = {
            "quantity": series.quantity,
            "tooling_cost": series.tooling_cost,
            "amortized_cost_per_part": cost_per_part,
        }
    report["cost_per_part"] = cost_per_part
    if target is not None:
        indicators = Indicators(
            cost_to_target_ratio=target_indicator(cost_per_part, target),
            budget_overrun_ratio=budget_overrun_indicator(cost_per_part, target),
        )
        report["indicators"] = {
            "cost_to_target_ratio": indicators.cost_to_target_ratio,
            "budget_overrun_ratio": indicators.budget_overrun_ratio,
        }
    report["breakdown"] = tree
    return report


# ---------------------------------------------------------------------------
# JSON input loaders


def part_from_dict(raw: dict) -> PartSpec:
    for key in ("process", "material"):
        if key not in raw or not isinstance(raw[key], str):
            raise ValueError(f"part spec requires a string '{key}' field")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("part spec 'params' must be an object of numbers")
    clean: dict[str, float] = {}
    for name, value in params.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"part parameter '{name}' must be a number")
        clean[name] = float(value)
    return PartSpec(raw["process"], raw["material"], clean)


def scenario_from_dict(raw: dict) -> Scenario:
    overrides = raw.get("overrides", {})
    if not isinstance(overrides, dict):
        raise ValueError("scenario 'overrides' must be an object of numbers")
    clean: dict[str, float] = {}
    for name, value in overrides.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"scenario override '{name}' must be a number")
        clean[name] = float(value)
    return Scenario(str(raw.get("id", "scenario")), str(raw.get("label", "")), clean)


def series_from_dict(raw: dict) -> SeriesSpec:
    if "quantity" not in raw:
        raise ValueError("series spec requires 'quantity'")
    return SeriesSpec(int(raw["quantity"]), float(raw.get("tooling_cost", 0.0)))


def rate_table_from_dict(raw: dict) -> RateTable:
    if "plant_id" not in raw:
        raise ValueError("rate table requires 'plant_id'")
    overrides = raw.get("overrides", {})
    if not isinstance(overrides, dict):
        raise ValueError("rate table 'overrides' must be an object of numbers")
    return RateTable(str(raw["plant_id"]),
                     {k: float(v) for k, v in overrides.items()})


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)
