#!/usr/bin/env python3
"""Sweep the parts-per-mold lever on the reference part and watch the
cost-to-target ratio walk toward (and past) the objective."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from castcost.reference import build_reference_model  # noqa: E402
from castcost.scenario import sweep  # noqa: E402


def main():
    bundle = build_reference_model()
    rows = sweep(bundle.model, bundle.part, "parts_per_mold",
                 [1, 2, 3, 4, 5, 6, 8],
                 series=bundle.series, target=bundle.target)
    print(f"target: {bundle.target} eur/part (tooling amortized over "
          f"{bundle.series.quantity})")
    print(f"{'parts_per_mold':>14} {'eur/part':>10} {'cost/target':>12}")
    for row in rows:
        marker = "  <- meets objective" if row.target_ratio < 1.0 else ""
        print(f"{row.value:14.0f} {row.total:10.4f} {row.target_ratio:12.4f}{marker}")


if __name__ == "__main__":
    main()
