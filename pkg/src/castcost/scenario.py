"""What-if scenarios, breakdown diffing, lever sweeps and plant benchmarking.

Scenario overrides are flat name -> number bindings resolved at the highest
precedence, so a what-if delta is always attributable to the overridden
names.  Benchmark rate tables slot in just below the scenario and above the
part spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import CostError, CostModel, PartSpec
from .rollup import CostBreakdown, LineItem, SeriesSpec, amortize_series, compute_part_cost


class UnknownOverride(CostError):
    def __init__(self, name: str):
        super().__init__(f"override '{name}' does not name any model parameter or part input")
        self.name = name


class ShapeMismatch(CostError):
    def __init__(self, where: str):
        super().__init__(f"breakdowns have different shapes at {where}")
        self.where = where


class SweepRowError(CostError):
    def __init__(self, index: int, value: float, cause: Exception):
        super().__init__(f"sweep row {index} (value {value}) failed: {cause}")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class Scenario:
    """A named set of parameter overrides layered above everything else."""

    id: str
    label: str = ""
    overrides: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RateTable:
    """Plant-specific overrides: hourly rates, yields, cadences, scrap rates."""

    plant_id: str
    overrides: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class DeltaTree:
    """Node-wise difference between two breakdowns of identical shape."""

    label: str
    base_subtotal: float
    variant_subtotal: float
    delta: float
    relative_delta: float | None
    children: tuple["DeltaTree", ...] = ()


@dataclass(frozen=True)
class SweepRow:
    value: float
    total: float
    target_ratio: float | None


@dataclass(frozen=True)
class BenchmarkRow:
    plant_id: str
    total: float
    rank: int


@dataclass(frozen=True)
class BenchmarkResult:
    rows: tuple[BenchmarkRow, ...]
    errors: tuple[tuple[str, str], ...]  # (plant_id, message)


def known_parameter_names(model: CostModel) -> set[str]:
    """Every name a scenario or rate table may override."""
    names = set(model.part_inputs) | set(model.globals)
    for proc in model.processes.values():
        names |= set(proc.params)
    for mat in model.materials.values():
        names |= set(mat.params)
    for op in model.operations.values():
        names |= set(op.params)
    return names


def _check_overrides(model: CostModel, part: PartSpec, overrides) -> None:
    known = known_parameter_names(model) | set(part.params)
    for name, value in overrides.items():
        if name not in known:
            raise UnknownOverride(name)
        if not math.isfinite(value):
            raise ValueError(f"override '{name}' must be finite, got {value}")


def apply_scenario(model: CostModel, part: PartSpec, scenario: Scenario) -> PartSpec:
    """Layer a scenario's overrides over a part spec; the original is unchanged.

    The scenario scope sits directly above the part scope, so merging the
    overrides into the part params resolves identically.
    """
    _check_overrides(model, part, scenario.overrides)
    return PartSpec(part.process, part.material, {**part.params, **scenario.overrides})


def diff_breakdowns(base: CostBreakdown, variant: CostBreakdown) -> DeltaTree:
    """Node-wise deltas between two breakdowns computed from the same model."""
    return _diff(base, variant, base.label)


def _relative(delta: float, base: float) -> float | None:
    if base != 0.0:
        return delta / base
    return 0.0 if delta == 0.0 else None


def _diff(base, variant, where: str) -> DeltaTree:
    if type(base) is not type(variant) or base.label != variant.label:
        raise ShapeMismatch(where)
    if isinstance(base, LineItem):
        delta = variant.amount - base.amount
        return DeltaTree(base.label, base.amount, variant.amount, delta,
                         _relative(delta, base.amount))
    if len(base.children) != len(variant.children):
        raise ShapeMismatch(where)
    children = tuple(
        _diff(b, v, f"{where}/{getattr(b, 'label', '?')}")
        for b, v in zip(base.children, variant.children)
    )
    delta = variant.subtotal - base.subtotal
    return DeltaTree(base.label, base.subtotal, variant.subtotal, delta,
                     _relative(delta, base.subtotal), children)


def sweep(
    model: CostModel,
    part: PartSpec,
    lever: str,
    values,
    *,
    scenario: Scenario | None = None,
    series: SeriesSpec | None = None,
    target: float | None = None,
) -> list[SweepRow]:
    """Recompute the part once per lever value; rows keep the given order.

    Totals include the series amortization when a series is given; the
    target ratio column is filled only when a target is given.
    """
    _check_overrides(model, part, {lever: 0.0})
    base_overrides = dict(scenario.overrides) if scenario is not None else {}
    rows: list[SweepRow] = []
    for index, value in enumerate(values):
        overrides = {**base_overrides, lever: value}
        try:
            breakdown = compute_part_cost(model, part, overrides)
            total = breakdown.subtotal
            if series is not None:
                total = amortize_series(total, series)
        except Exception as exc:
            raise SweepRowError(index, value, exc) from exc
        ratio = (total / target) if target is not None and target > 0 else None
        rows.append(SweepRow(value, total, ratio))
    return rows


def benchmark_compare(
    model: CostModel,
    part: PartSpec,
    tables,
    *,
    scenario: Scenario | None = None,
    series: SeriesSpec | None = None,
) -> BenchmarkResult:
    """Total per plant with its rate table as an overlay below the scenario.

    A failing plant is reported in `errors` and never aborts the others.
    Ranks are dense over ascending totals; exact ties share a rank and are
    ordered by plant id.
    """
    if not tables:
        raise ValueError("benchmark_compare needs at least one rate table")
    totals: list[tuple[str, float]] = []
    errors: list[tuple[str, str]] = []
    for table in tables:
        try:
            _check_overrides(model, part, table.overrides)
            breakdown = compute_part_cost(model, part, scenario,
                                          extra_overlays=(table.overrides,))
            total = breakdown.subtotal
            if series is not None:
                total = amortize_series(total, series)
            totals.append((table.plant_id, total))
        except Exception as exc:
            errors.append((table.plant_id, str(exc)))
    ordered = sorted(totals, key=lambda pair: (pair[1], pair[0]))
    rows: list[BenchmarkRow] = []
    rank = 0
    previous: float | None = None
    for plant_id, total in ordered:
        if previous is None or total != previous:
            rank += 1
            previous = total
        rows.append(BenchmarkRow(plant_id, total, rank))
    return BenchmarkResult(tuple(rows), tuple(errors))
