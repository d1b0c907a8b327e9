#!/usr/bin/env python3
"""Price the bundled reference part and print the breakdown as a table."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from castcost.model import PartSpec  # noqa: E402
from castcost.reference import build_reference_model  # noqa: E402
from castcost.rollup import (  # noqa: E402
    CostBreakdown,
    amortize_series,
    compute_part_cost,
    target_indicator,
)


def show(node: CostBreakdown, indent: int = 0):
    pad = "  " * indent
    print(f"{pad}{node.label:<24} {node.subtotal:10.4f}  "
          f"(scrap x{node.scrap_multiplier_applied:.4f})")
    for child in node.children:
        if isinstance(child, CostBreakdown):
            show(child, indent + 1)
        else:
            print(f"{pad}  - {child.label:<20} {child.amount:10.4f}  [{child.category.value}]")


def main():
    bundle = build_reference_model()
    breakdown = compute_part_cost(bundle.model, bundle.part)
    show(breakdown)
    final = amortize_series(breakdown.subtotal, bundle.series)
    ratio = target_indicator(final, bundle.target)
    print()
    print(f"direct cost per part : {breakdown.subtotal:8.4f} eur")
    print(f"tooling amortization : {bundle.series.tooling_cost:.0f} eur over "
          f"{bundle.series.quantity} parts")
    print(f"cost per part        : {final:8.4f} eur")
    print(f"target               : {bundle.target:8.4f} eur")
    print(f"cost / target        : {ratio:8.4f}  "
          f"({'over' if ratio > 1 else 'within'} objective)")


if __name__ == "__main__":
    main()
