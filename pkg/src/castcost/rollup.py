"""Bottom-up cost computation: line items, scrap chains, assembly rollup.

The breakdown tree mirrors the assembly DAG expanded from the root: each
assembly node holds its component children (purchased ones as line items,
produced ones as embedded sub-assembly nodes scaled to the consumed
quantity), then its operation line items in declaration order, then one
scrap line item carrying the surcharge the assembly's scrap chain adds on
top of the raw amounts.

Line-item amounts are the evaluated formula results; scrap is never folded
into them.  Node subtotals and category totals are exact rational sums of
the subtree's leaf amounts, rounded once to a float, so at every node the
subtotal equals the sum of its children and the category totals partition
it, with no tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .expr import eval_expr
from .model import (
    Category,
    Component,
    ContextPath,
    CostError,
    CostModel,
    Kind,
    MissingPartInput,
    ModelValidationError,
    Operation,
    PartSpec,
    ResolutionEnv,
    required_inputs_missing,
    validate_model,
)

HOURS = 3600.0


class YieldOutOfRange(CostError):
    def __init__(self, value: float, where: str = ""):
        super().__init__(f"material_yield {value} outside (0, 1]" + (f" in {where}" if where else ""))
        self.value = value


class PartsPerCycleOutOfRange(CostError):
    def __init__(self, value: float, where: str = ""):
        super().__init__(f"parts_per_cycle {value} below 1" + (f" in {where}" if where else ""))
        self.value = value


class ScrapRateOutOfRange(CostError):
    def __init__(self, value: float, where: str = ""):
        super().__init__(f"scrap_rate {value} outside [0, 1)" + (f" in {where}" if where else ""))
        self.value = value


class NonPositiveTarget(CostError):
    pass


class NonPositiveBudget(CostError):
    pass


@dataclass(frozen=True)
class LineItem:
    """One priced leaf: a component, an operation slice, or a scrap surcharge."""

    source_id: str
    label: str
    category: Category
    amount: float
    quantity: float
    context: ContextPath


@dataclass(frozen=True)
class CostBreakdown:
    """A node of the priced tree; children are sub-nodes or line items."""

    label: str
    source_id: str
    children: tuple["CostBreakdown | LineItem", ...]
    subtotal: float
    category_totals: dict[Category, float]
    scrap_multiplier_applied: float

    def iter_leaves(self, path: tuple[str, ...] = ()):
        """Yield (path, LineItem) pairs over the whole subtree."""
        here = path + (self.label,)
        for child in self.children:
            if isinstance(child, LineItem):
                yield here + (child.label,), child
            else:
                yield from child.iter_leaves(here)

    def find(self, label: str) -> "CostBreakdown | None":
        """First node with the given label, depth-first."""
        if self.label == label:
            return self
        for child in self.children:
            if isinstance(child, CostBreakdown):
                hit = child.find(label)
                if hit is not None:
                    return hit
        return None


@dataclass(frozen=True)
class SeriesSpec:
    """Ordered quantity and the tooling lump sum amortized over it."""

    quantity: int
    tooling_cost: float

    def __post_init__(self):
        if self.quantity < 1:
            raise ValueError(f"series quantity must be >= 1, got {self.quantity}")
        if self.tooling_cost < 0:
            raise ValueError(f"tooling cost must be >= 0, got {self.tooling_cost}")


@dataclass(frozen=True)
class Indicators:
    cost_to_target_ratio: float
    budget_overrun_ratio: float


# ---------------------------------------------------------------------------
# single-item pricing


def component_cost(
    model: CostModel,
    comp: Component,
    ctx: ContextPath,
    overlays: Sequence[Mapping[str, float]] = (),
    sub_assembly_cost: float | None = None,
) -> LineItem:
    """Price one component per unit of its owner's output.

    purchased: quantity * unit_cost / material_yield
    produced:  quantity * sub_assembly_cost / material_yield
    """
    env = ResolutionEnv(model, ctx, overlays)
    qty = eval_expr(comp.quantity_per_output, env)
    yld = eval_expr(comp.material_yield, env)
    if not (0.0 < yld <= 1.0):
        raise YieldOutOfRange(yld, comp.id)
    if comp.kind is Kind.PURCHASED:
        unit = eval_expr(comp.unit_cost, env)
        amount = qty * unit / yld
    else:
        if sub_assembly_cost is None:
            raise ValueError(f"produced component {comp.id} needs its sub-assembly cost")
        amount = qty * sub_assembly_cost / yld
    category = Category.MATERIAL
    if comp.entity is not None:
        category = model.entities[comp.entity].category
    return LineItem(comp.id, comp.id, category, amount, qty, ctx)


def operation_cost(
    model: CostModel,
    op: Operation,
    ctx: ContextPath,
    overlays: Sequence[Mapping[str, float]] = (),
) -> LineItem:
    """Price one operation's conversion cost per good unit of output.

    amount = (cycle_time_s / 3600) / parts_per_cycle
             * (machine_rate_per_h + labor_rate_per_h * crew_size)
             + consumable_cost_per_part

    Scrap is not applied here; the assembly's scrap chain compounds it.
    """
    env = ResolutionEnv(model, ctx, overlays)
    cycle = eval_expr(op.cycle_time_s, env)
    ppc = eval_expr(op.parts_per_cycle, env)
    if ppc < 1.0:
        raise PartsPerCycleOutOfRange(ppc, op.id)
    machine = eval_expr(op.machine_rate_per_h, env)
    labor = eval_expr(op.labor_rate_per_h, env)
    crew = eval_expr(op.crew_size, env)
    consumable = eval_expr(op.consumable_cost_per_part, env)
    hours_per_part = (cycle / HOURS) / ppc
    amount = hours_per_part * (machine + labor * crew) + consumable
    category = Category.MACHINE
    if op.entity is not None:
        category = model.entities[op.entity].category
    return LineItem(op.id, op.id, category, amount, hours_per_part, ctx)


def apply_scrap_chain(
    stage_costs: Sequence[tuple[float, float]], upstream_cost: float
) -> tuple[float, float]:
    """Compound per-stage conversion costs and scrap rates over an upstream cost.

    Scrapping at stage k forfeits all value accumulated through stage k:

        C_0 = upstream, C_k = (C_{k-1} + conversion_k) / (1 - scrap_k)

    Returns (cost per good part, cumulative multiplier prod 1/(1-scrap_k)).
    """
    cost = upstream_cost
    multiplier = 1.0
    for conversion, scrap in stage_costs:
        if not (0.0 <= scrap < 1.0):
            raise ScrapRateOutOfRange(scrap)
        cost = (cost + conversion) / (1.0 - scrap)
        multiplier *= 1.0 / (1.0 - scrap)
    return cost, multiplier


# ---------------------------------------------------------------------------
# assembly rollup


def _exact(node: "CostBreakdown | LineItem") -> Fraction:
    if isinstance(node, LineItem):
        return Fraction(node.amount)
    total = Fraction(0)
    for child in node.children:
        total += _exact(child)
    return total


def _aggregate(label: str, source_id: str, children, multiplier: float) -> CostBreakdown:
    """Build a node whose subtotal/category totals project the exact leaf sums."""
    cat_exact: dict[Category, Fraction] = {}
    for child in children:
        if isinstance(child, LineItem):
            cat_exact[child.category] = cat_exact.get(child.category, Fraction(0)) + Fraction(child.amount)
        else:
            for _, leaf in child.iter_leaves():
                cat_exact[leaf.category] = cat_exact.get(leaf.category, Fraction(0)) + Fraction(leaf.amount)
    total = sum(cat_exact.values(), Fraction(0))
    ordered = {c: float(cat_exact[c]) for c in Category if c in cat_exact}
    return CostBreakdown(
        label=label,
        source_id=source_id,
        children=tuple(children),
        subtotal=float(total),
        category_totals=ordered,
        scrap_multiplier_applied=multiplier,
    )


def _scale_node(node: CostBreakdown, factor: float, label: str, source_id: str) -> CostBreakdown:
    """Scale every leaf amount by `factor` and re-aggregate bottom-up."""
    children = []
    for child in node.children:
        if isinstance(child, LineItem):
            children.append(
                LineItem(child.source_id, child.label, child.category,
                         child.amount * factor, child.quantity * factor, child.context)
            )
        else:
            children.append(_scale_node(child, factor, child.label, child.source_id))
    return _aggregate(label, source_id, children, node.scrap_multiplier_applied)


class _Rollup:
    def __init__(self, model: CostModel, part: PartSpec,
                 overlays: Sequence[Mapping[str, float]]):
        self.model = model
        self.part = part
        self.overlays = overlays

    def ambient_ctx(self, comp: Component | None = None) -> ContextPath:
        process = self.part.process
        material = self.part.material
        if comp is not None:
            process = comp.process_id or process
            material = comp.material_id or material
        return ContextPath(process, material or None)

    def build(self, assembly_id: str, path: str) -> CostBreakdown:
        model = self.model
        asm = model.assemblies[assembly_id]
        children: list[CostBreakdown | LineItem] = []
        for cid in asm.components:
            comp = model.components[cid]
            where = f"{path}/{cid}"
            try:
                ctx = self.ambient_ctx(comp)
                if comp.kind is Kind.PURCHASED:
                    children.append(component_cost(model, comp, ctx, self.overlays))
                else:
                    env = ResolutionEnv(model, ctx, self.overlays)
                    qty = eval_expr(comp.quantity_per_output, env)
                    yld = eval_expr(comp.material_yield, env)
                    if not (0.0 < yld <= 1.0):
                        raise YieldOutOfRange(yld, comp.id)
                    sub = self.build(comp.sub_assembly, where)
                    children.append(_scale_node(sub, qty / yld, cid, cid))
            except Exception as exc:
                self.annotate(exc, where)
                raise
        stages: list[tuple[float, float]] = []
        any_scrap = False
        for oid in asm.operations:
            op = model.operations[oid]
            where = f"{path}/{oid}"
            try:
                ctx = op.effective_context(self.part.material)
                env = ResolutionEnv(model, ctx, self.overlays)
                scrap = eval_expr(op.scrap_rate, env)
                if not (0.0 <= scrap < 1.0):
                    raise ScrapRateOutOfRange(scrap, op.id)
                item = operation_cost(model, op, ctx, self.overlays)
            except Exception as exc:
                self.annotate(exc, where)
                raise
            children.append(item)
            stages.append((item.amount, scrap))
            any_scrap = any_scrap or scrap != 0.0
        multiplier = 1.0
        if stages:
            raw_exact = sum((_exact(c) for c in children), Fraction(0))
            upstream = float(raw_exact - sum((Fraction(conv) for conv, _ in stages), Fraction(0)))
            chained, multiplier = apply_scrap_chain(stages, upstream)
            surcharge = float(Fraction(chained) - raw_exact) if any_scrap else 0.0
            children.append(
                LineItem(asm.id, "scrap", Category.SCRAP, surcharge, multiplier,
                         self.ambient_ctx())
            )
        return _aggregate(asm.id, asm.id, children, multiplier)

    @staticmethod
    def annotate(exc: Exception, where: str):
        if getattr(exc, "location", None) is None:
            try:
                exc.location = where
            except Exception:
                pass


def compute_part_cost(
    model: CostModel,
    part: PartSpec,
    scenario=None,
    *,
    extra_overlays: Sequence[Mapping[str, float]] = (),
    validated: bool = False,
) -> CostBreakdown:
    """Price one part: expand the assembly DAG bottom-up from the root.

    `scenario` (anything with an `overrides` mapping, or a plain mapping)
    takes precedence over everything; `extra_overlays` slot between the
    scenario and the part scope, highest first.  The root subtotal is the
    per-part direct cost.
    """
    if not validated:
        diagnostics = validate_model(model)
        if any(d.severity == "error" for d in diagnostics):
            raise ModelValidationError(diagnostics)
    missing = required_inputs_missing(model, part)
    if missing:
        raise MissingPartInput(missing)
    overlays: list[Mapping[str, float]] = []
    if scenario is not None:
        overrides = getattr(scenario, "overrides", scenario)
        if overrides:
            overlays.append(overrides)
    overlays.extend(extra_overlays)
    overlays.append(part.params)
    rollup = _Rollup(model, part, overlays)
    return rollup.build(model.root_assembly, model.root_assembly)


# ---------------------------------------------------------------------------
# series amortization and indicators


def amortize_series(direct_cost_per_part: float, series: SeriesSpec) -> float:
    """Per-part cost including the tooling share: direct + tooling / quantity."""
    return direct_cost_per_part + series.tooling_cost / series.quantity


def target_indicator(actual_cost: float, target_cost: float) -> float:
    """Ratio of achieved cost to the objective cost (1.0 = on target)."""
    if target_cost <= 0:
        raise NonPositiveTarget(f"target cost must be > 0, got {target_cost}")
    return actual_cost / target_cost


def budget_overrun_indicator(actual_spend: float, budget: float) -> float:
    """Overrun share of the initial budget; 0 when spend is within budget."""
    if budget <= 0:
        raise NonPositiveBudget(f"budget must be > 0, got {budget}")
    return max(actual_spend - budget, 0.0) / budget
