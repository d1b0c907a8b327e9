"""Domain types for declarative cost models and context-tree parameter resolution.

A cost model declares processes, materials, cost entities, components,
operations and assemblies.  Parameters live in nested scopes; resolution
walks them from most to least specific:

    scenario > part > feature > material > process > global

The feature level is an operation's own parameter scope (the operation is
the tree leaf linking a process, a material and an activity).  A model is
immutable once validated; every function here is pure, so concurrent
evaluation needs no synchronization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .expr import Expr, eval_expr, free_variables, format_expr

MAX_PARAM_DEPTH = 32

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z", re.ASCII)


class Category(str, Enum):
    """Cost nature of an entity or line item."""

    MATERIAL = "material"
    LABOR = "labor"
    MACHINE = "machine"
    CONSUMABLE = "consumable"
    SCRAP = "scrap"
    TOOLING = "tooling"


class Kind(str, Enum):
    """Whether a component is bought or made in-house."""

    PURCHASED = "purchased"
    PRODUCED = "produced"


class CostError(Exception):
    """Base class for engine errors; `location` is filled in during rollup."""

    location: str | None = None


class UnresolvedParameter(CostError):
    def __init__(self, name: str, ctx: "ContextPath"):
        super().__init__(f"parameter '{name}' is not defined in context {ctx}")
        self.name = name
        self.ctx = ctx


class CyclicParameter(CostError):
    def __init__(self, chain: tuple[str, ...]):
        super().__init__("parameter reference cycle: " + " -> ".join(chain))
        self.chain = chain


class MissingPartInput(CostError):
    def __init__(self, names: tuple[str, ...]):
        super().__init__("part spec is missing required input(s): " + ", ".join(names))
        self.names = names


class ModelValidationError(CostError):
    def __init__(self, diagnostics: list["Diagnostic"]):
        errors = [d for d in diagnostics if d.severity == "error"]
        super().__init__(
            f"model has {len(errors)} validation error(s): "
            + "; ".join(str(d) for d in errors[:5])
        )
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Parameter:
    """A named value in some scope: a finite literal (with unit label) or an expression."""

    name: str
    value: float | Expr
    unit: str = ""

    def is_literal(self) -> bool:
        return isinstance(self.value, (int, float))


@dataclass(frozen=True)
class ContextPath:
    """A node of the process > material > feature modeling tree."""

    process_id: str
    material_id: str | None = None
    feature_id: str | None = None

    def __post_init__(self):
        if self.feature_id is not None and self.material_id is None:
            raise ValueError(
                f"context {self.process_id}/-/{self.feature_id}: "
                "a feature level requires a material level"
            )

    def __str__(self) -> str:
        parts = [self.process_id]
        if self.material_id:
            parts.append(self.material_id)
        if self.feature_id:
            parts.append(self.feature_id)
        return "/".join(parts)


@dataclass(frozen=True)
class CostEntity:
    """A grouping of resource costs scaled by exactly one driver parameter.

    `process_id`/`material_id` optionally pin the entity's own resolution
    context; when absent the caller's ambient context applies.
    """

    id: str
    driver: str
    formula: Expr
    category: Category
    process_id: str | None = None
    material_id: str | None = None


@dataclass(frozen=True)
class Component:
    """A consumed input: purchased at a unit cost, or produced by a sub-assembly.

    `process_id`/`material_id` optionally pin the component's own pricing
    context; when absent the part's ambient context applies.
    """

    id: str
    name: str
    kind: Kind
    quantity_per_output: Expr
    material_yield: Expr
    unit_cost: Expr | None = None
    sub_assembly: str | None = None
    process_id: str | None = None
    material_id: str | None = None
    entity: str | None = None


@dataclass(frozen=True)
class Operation:
    """A processing step: a machine/labor time slice plus consumables and scrap."""

    id: str
    name: str
    process_id: str
    cycle_time_s: Expr
    parts_per_cycle: Expr
    machine_rate_per_h: Expr
    labor_rate_per_h: Expr
    crew_size: Expr
    scrap_rate: Expr
    consumable_cost_per_part: Expr
    material_id: str | None = None
    params: dict[str, Parameter] = field(default_factory=dict)
    entity: str | None = None

    @property
    def context(self) -> ContextPath:
        """Declared context; the feature level exists only under a declared material."""
        feature = self.id if (self.params and self.material_id) else None
        return ContextPath(self.process_id, self.material_id, feature)

    def effective_context(self, ambient_material: str | None) -> ContextPath:
        """Context used during rollup: a missing material comes from the part."""
        material = self.material_id or ambient_material
        feature = self.id if (self.params and material) else None
        return ContextPath(self.process_id, material, feature)


@dataclass(frozen=True)
class Assembly:
    """An ordered set of consumed components and applied operations."""

    id: str
    name: str
    components: tuple[str, ...]
    operations: tuple[str, ...]
    output_name: str = ""


@dataclass(frozen=True)
class ProcessDef:
    id: str
    params: dict[str, Parameter] = field(default_factory=dict)


@dataclass(frozen=True)
class MaterialDef:
    id: str
    params: dict[str, Parameter] = field(default_factory=dict)


@dataclass(frozen=True)
class PartSpec:
    """Designer input: ambient process/material plus part-level parameter bindings."""

    process: str
    material: str
    params: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class CostModel:
    """A complete declarative cost model (immutable after validation)."""

    id: str
    currency: str = "eur"
    globals: dict[str, Parameter] = field(default_factory=dict)
    part_inputs: dict[str, str] = field(default_factory=dict)  # name -> unit label
    processes: dict[str, ProcessDef] = field(default_factory=dict)
    materials: dict[str, MaterialDef] = field(default_factory=dict)
    entities: dict[str, CostEntity] = field(default_factory=dict)
    components: dict[str, Component] = field(default_factory=dict)
    operations: dict[str, Operation] = field(default_factory=dict)
    assemblies: dict[str, Assembly] = field(default_factory=dict)
    root_assembly: str = ""


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} {self.location}: {self.message}"


def _sort_key(d: Diagnostic):
    return (d.location, d.severity, d.message)


class ResolutionEnv:
    """Layered parameter lookup for one context, usable as an eval environment.

    Expression-valued parameters are evaluated recursively in this same
    environment; reference chains are capped at MAX_PARAM_DEPTH and any
    revisit raises CyclicParameter.
    """

    __slots__ = ("model", "ctx", "scopes", "_stack")

    def __init__(
        self,
        model: CostModel,
        ctx: ContextPath,
        overlays: Sequence[Mapping[str, float]] = (),
    ):
        self.model = model
        self.ctx = ctx
        scopes: list[Mapping] = list(overlays)
        if ctx.feature_id is not None:
            op = model.operations.get(ctx.feature_id)
            if op is not None:
                scopes.append(op.params)
        if ctx.material_id is not None:
            mat = model.materials.get(ctx.material_id)
            if mat is not None:
                scopes.append(mat.params)
        proc = model.processes.get(ctx.process_id)
        if proc is not None:
            scopes.append(proc.params)
        scopes.append(model.globals)
        self.scopes = scopes
        self._stack: tuple[str, ...] = ()

    def __getitem__(self, name: str) -> float:
        return self._resolve(name, self._stack)

    def _resolve(self, name: str, stack: tuple[str, ...]) -> float:
        if name in stack:
            raise CyclicParameter(stack + (name,))
        if len(stack) >= MAX_PARAM_DEPTH:
            raise CyclicParameter(stack + (name,))
        for scope in self.scopes:
            if name in scope:
                entry = scope[name]
                if isinstance(entry, Parameter):
                    if entry.is_literal():
                        return float(entry.value)
                    view = _StackView(self, stack + (name,))
                    return eval_expr(entry.value, view)
                return float(entry)
        raise UnresolvedParameter(name, self.ctx)


class _StackView:
    """Mapping view carrying the reference chain across nested evaluations."""

    __slots__ = ("env", "stack")

    def __init__(self, env: ResolutionEnv, stack: tuple[str, ...]):
        self.env = env
        self.stack = stack

    def __getitem__(self, name: str) -> float:
        return self.env._resolve(name, self.stack)


def resolve_parameter(
    model: CostModel,
    name: str,
    ctx: ContextPath,
    overlays: Sequence[Mapping[str, float]] = (),
) -> float:
    """Resolve a parameter to a number for one context.

    `overlays` are extra scopes above the model's own, highest precedence
    first (typically ``[scenario_overrides, part_params]``).
    """
    return ResolutionEnv(model, ctx, overlays)[name]


def entity_cost(
    model: CostModel,
    entity: CostEntity | str,
    ctx: ContextPath,
    overlays: Sequence[Mapping[str, float]] = (),
) -> float:
    """Evaluate a cost entity's formula in a resolution environment.

    Negative results are allowed (explicit credits); non-finite results and
    unresolved parameters raise.
    """
    if isinstance(entity, str):
        entity = model.entities[entity]
    return eval_expr(entity.formula, ResolutionEnv(model, ctx, overlays))


# ---------------------------------------------------------------------------
# validation


def validate_model(model: CostModel) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the model is sound.

    Diagnostics are deterministic and ordered by location.  Invalid models
    are a valid return, never an exception.
    """
    v = _Validator(model)
    v.run()
    return sorted(v.diagnostics, key=_sort_key)


class _Validator:
    def __init__(self, model: CostModel):
        self.model = model
        self.diagnostics: list[Diagnostic] = []

    def error(self, location: str, message: str):
        self.diagnostics.append(Diagnostic("error", location, message))

    def warn(self, location: str, message: str):
        self.diagnostics.append(Diagnostic("warning", location, message))

    def run(self):
        self.check_identifiers()
        self.check_parameters()
        self.check_entities()
        self.check_components()
        self.check_operations()
        self.check_assemblies()
        self.check_root_and_reachability()
        self.check_produced_cycles()
        self.check_resolvability()
        self.check_unit_mixes()

    # -- structural ---------------------------------------------------------

    def check_identifiers(self):
        m = self.model
        for kind, ids in (
            ("process", m.processes),
            ("material", m.materials),
            ("entity", m.entities),
            ("component", m.components),
            ("operation", m.operations),
            ("assembly", m.assemblies),
        ):
            for ident in ids:
                if not _IDENT_RE.match(ident):
                    self.error(f"{kind}/{ident}", "identifier must be ASCII snake_case")

    def _check_scope(self, location: str, params: Mapping[str, Parameter]):
        for name, p in params.items():
            if not _IDENT_RE.match(name):
                self.error(f"{location}/{name}", "parameter name must be ASCII snake_case")
            if p.is_literal():
                value = float(p.value)
                if value != value or value in (float("inf"), float("-inf")):
                    self.error(f"{location}/{name}", "literal parameter must be finite")

    def check_parameters(self):
        m = self.model
        self._check_scope("globals", m.globals)
        for proc in m.processes.values():
            self._check_scope(f"process/{proc.id}", proc.params)
        for mat in m.materials.values():
            self._check_scope(f"material/{mat.id}", mat.params)
        for op in m.operations.values():
            self._check_scope(f"operation/{op.id}", op.params)
        for name in m.part_inputs:
            if not _IDENT_RE.match(name):
                self.error(f"inputs/{name}", "input name must be ASCII snake_case")

    def check_entities(self):
        m = self.model
        for ent in m.entities.values():
            loc = f"entity/{ent.id}"
            if ent.driver not in free_variables(ent.formula):
                self.error(
                    loc,
                    f"driver '{ent.driver}' does not appear in formula "
                    f"'{format_expr(ent.formula)}'",
                )
            if ent.process_id is not None and ent.process_id not in m.processes:
                self.error(loc, f"unresolved id {ent.process_id}")
            if ent.material_id is not None and ent.material_id not in m.materials:
                self.error(loc, f"unresolved id {ent.material_id}")

    def check_components(self):
        m = self.model
        for comp in m.components.values():
            loc = f"component/{comp.id}"
            if comp.kind is Kind.PURCHASED:
                if comp.unit_cost is None:
                    self.error(loc, "purchased component requires unit_cost")
                if comp.sub_assembly is not None:
                    self.error(loc, "purchased component must not name a sub_assembly")
            else:
                if comp.sub_assembly is None:
                    self.error(loc, "produced component requires sub_assembly")
                elif comp.sub_assembly not in m.assemblies:
                    self.error(loc, f"unresolved id {comp.sub_assembly}")
                if comp.unit_cost is not None:
                    self.error(loc, "produced component must not carry unit_cost")
            if comp.process_id is not None and comp.process_id not in m.processes:
                self.error(loc, f"unresolved id {comp.process_id}")
            if comp.material_id is not None and comp.material_id not in m.materials:
                self.error(loc, f"unresolved id {comp.material_id}")
            if comp.entity is not None and comp.entity not in m.entities:
                self.error(loc, f"unresolved id {comp.entity}")

    def check_operations(self):
        m = self.model
        for op in m.operations.values():
            loc = f"operation/{op.id}"
            if op.process_id not in m.processes:
                self.error(loc, f"unresolved id {op.process_id}")
            if op.material_id is not None and op.material_id not in m.materials:
                self.error(loc, f"unresolved id {op.material_id}")
            if op.entity is not None and op.entity not in m.entities:
                self.error(loc, f"unresolved id {op.entity}")
            if op.scrap_rate is not None and _literal_value(op.scrap_rate) is not None:
                s = _literal_value(op.scrap_rate)
                if not (0.0 <= s < 1.0):
                    self.error(loc, f"scrap_rate {s} outside [0, 1)")
            ppc = _literal_value(op.parts_per_cycle)
            if ppc is not None and ppc < 1.0:
                self.error(loc, f"parts_per_cycle {ppc} below 1")

    def check_assemblies(self):
        m = self.model
        for asm in m.assemblies.values():
            loc = f"assembly/{asm.id}"
            if not asm.components and not asm.operations:
                self.error(loc, "assembly must list at least one component or operation")
            seen: set[str] = set()
            for cid in asm.components:
                if cid in seen:
                    self.error(loc, f"id {cid} repeated")
                seen.add(cid)
                if cid not in m.components:
                    self.error(loc, f"unresolved id {cid}")
            for oid in asm.operations:
                if oid in seen:
                    self.error(loc, f"id {oid} repeated")
                seen.add(oid)
                if oid not in m.operations:
                    self.error(loc, f"unresolved id {oid}")

    def check_root_and_reachability(self):
        m = self.model
        if not m.root_assembly:
            self.error("root", "model does not declare a root assembly")
            return
        if m.root_assembly not in m.assemblies:
            self.error("root", f"unresolved id {m.root_assembly}")
            return
        reachable: set[str] = set()
        used_components: set[str] = set()
        used_operations: set[str] = set()
        stack = [m.root_assembly]
        while stack:
            aid = stack.pop()
            if aid in reachable or aid not in m.assemblies:
                continue
            reachable.add(aid)
            asm = m.assemblies[aid]
            used_operations.update(asm.operations)
            for cid in asm.components:
                used_components.add(cid)
                comp = m.components.get(cid)
                if comp is not None and comp.sub_assembly is not None:
                    stack.append(comp.sub_assembly)
        for aid in m.assemblies:
            if aid not in reachable:
                self.warn(f"assembly/{aid}", "assembly is not reachable from the root")
        for cid in m.components:
            if cid not in used_components:
                self.warn(f"component/{cid}", "component is not used by any assembly")
        for oid in m.operations:
            if oid not in used_operations:
                self.warn(f"operation/{oid}", "operation is not used by any assembly")

    def check_produced_cycles(self):
        m = self.model
        edges: dict[str, list[str]] = {aid: [] for aid in m.assemblies}
        for asm in m.assemblies.values():
            for cid in asm.components:
                comp = m.components.get(cid)
                if comp is not None and comp.sub_assembly in m.assemblies:
                    edges[asm.id].append(comp.sub_assembly)
        state: dict[str, int] = {}  # 0 visiting, 1 done
        reported: set[tuple[str, ...]] = set()

        def visit(node: str, path: list[str]):
            state[node] = 0
            path.append(node)
            for nxt in edges[node]:
                if nxt not in state:
                    visit(nxt, path)
                elif state[nxt] == 0:
                    cycle = tuple(path[path.index(nxt):])
                    key = tuple(sorted(cycle))
                    if key not in reported:
                        reported.add(key)
                        self.error(
                            f"assembly/{min(cycle)}",
                            "produced-component cycle " + ",".join(cycle),
                        )
            path.pop()
            state[node] = 1

        for aid in sorted(edges):
            if aid not in state:
                visit(aid, [])

    # -- resolvability -------------------------------------------------------

    def _scope_chain(self, process_id: str | None, material_id: str | None,
                     feature_params: Mapping[str, Parameter] | None):
        m = self.model
        chain: list[Mapping[str, Parameter]] = []
        if feature_params:
            chain.append(feature_params)
        if material_id is not None and material_id in m.materials:
            chain.append(m.materials[material_id].params)
        if process_id is not None and process_id in m.processes:
            chain.append(m.processes[process_id].params)
        chain.append(m.globals)
        return chain

    def _resolvable(self, name: str, chain, stack: tuple[str, ...]) -> bool:
        if name in self.model.part_inputs:
            return True
        if name in stack or len(stack) >= MAX_PARAM_DEPTH:
            self.error(
                "params",
                "parameter reference cycle " + " -> ".join(stack + (name,)),
            )
            return True  # cycle already reported; avoid cascading noise
        for scope in chain:
            if name in scope:
                p = scope[name]
                if p.is_literal():
                    return True
                return all(
                    self._resolvable(v, chain, stack + (name,))
                    for v in sorted(free_variables(p.value))
                )
        return False

    def _check_expr(self, location: str, expr: Expr | None,
                    process_id: str | None, material_id: str | None,
                    feature_params=None):
        if expr is None:
            return
        m = self.model
        processes = [process_id] if process_id else (list(m.processes) or [None])
        materials = [material_id] if material_id else (list(m.materials) or [None])
        for name in sorted(free_variables(expr)):
            for pid in processes:
                for mid in materials:
                    chain = self._scope_chain(pid, mid, feature_params)
                    if not self._resolvable(name, chain, ()):
                        where = f"{pid or '*'}/{mid or '*'}"
                        self.error(
                            location,
                            f"parameter '{name}' cannot be resolved in context {where} "
                            "for a complete part spec",
                        )

    def check_resolvability(self):
        m = self.model
        for comp in m.components.values():
            loc = f"component/{comp.id}"
            self._check_expr(loc, comp.quantity_per_output, comp.process_id, comp.material_id)
            self._check_expr(loc, comp.material_yield, comp.process_id, comp.material_id)
            if comp.kind is Kind.PURCHASED:
                self._check_expr(loc, comp.unit_cost, comp.process_id, comp.material_id)
        for op in m.operations.values():
            loc = f"operation/{op.id}"
            for fname in ("cycle_time_s", "parts_per_cycle", "machine_rate_per_h",
                          "labor_rate_per_h", "crew_size", "scrap_rate",
                          "consumable_cost_per_part"):
                self._check_expr(loc, getattr(op, fname), op.process_id,
                                 op.material_id, op.params)
            for p in op.params.values():
                if not p.is_literal():
                    self._check_expr(f"{loc}/{p.name}", p.value, op.process_id,
                                     op.material_id, op.params)
        for ent in m.entities.values():
            self._check_expr(f"entity/{ent.id}", ent.formula, ent.process_id,
                             ent.material_id)
        for name, p in m.globals.items():
            if not p.is_literal():
                self._check_expr(f"globals/{name}", p.value, None, None)
        for proc in m.processes.values():
            for name, p in proc.params.items():
                if not p.is_literal():
                    self._check_expr(f"process/{proc.id}/{name}", p.value, proc.id, None)
        for mat in m.materials.values():
            for name, p in mat.params.items():
                if not p.is_literal():
                    self._check_expr(f"material/{mat.id}/{name}", p.value, None, mat.id)

    # -- unit sanity ----------------------------------------------------------

    def _known_units(self) -> dict[str, str]:
        units: dict[str, str] = {}
        conflicting: set[str] = set()
        m = self.model
        scopes = [m.globals]
        scopes += [p.params for p in m.processes.values()]
        scopes += [mat.params for mat in m.materials.values()]
        scopes += [op.params for op in m.operations.values()]
        for scope in scopes:
            for name, p in scope.items():
                if not p.unit:
                    continue
                if name in units and units[name] != p.unit:
                    conflicting.add(name)
                units[name] = p.unit
        for name, unit in m.part_inputs.items():
            if unit:
                if name in units and units[name] != unit:
                    conflicting.add(name)
                units[name] = unit
        for name in conflicting:
            units.pop(name, None)
        return units

    def check_unit_mixes(self):
        """Warn when an addition mixes identifiers with different unit labels."""
        from .expr import BinOp, Var

        units = self._known_units()
        if not units:
            return

        def walk(location: str, e: Expr):
            if isinstance(e, BinOp):
                if e.op in "+-" and isinstance(e.left, Var) and isinstance(e.right, Var):
                    lu = units.get(e.left.name)
                    ru = units.get(e.right.name)
                    if lu and ru and lu != ru:
                        self.warn(
                            location,
                            f"'{e.left.name} {e.op} {e.right.name}' mixes units "
                            f"{lu} and {ru}",
                        )
                walk(location, e.left)
                walk(location, e.right)
            elif hasattr(e, "operand"):
                walk(location, e.operand)
            elif hasattr(e, "args"):
                for a in e.args:
                    walk(location, a)

        m = self.model
        for scope_loc, scope in [("globals", m.globals)] + [
            (f"process/{p.id}", p.params) for p in m.processes.values()
        ] + [(f"material/{x.id}", x.params) for x in m.materials.values()] + [
            (f"operation/{o.id}", o.params) for o in m.operations.values()
        ]:
            for name, p in scope.items():
                if not p.is_literal():
                    walk(f"{scope_loc}/{name}", p.value)
        for ent in m.entities.values():
            walk(f"entity/{ent.id}", ent.formula)
        for comp in m.components.values():
            for e in (comp.quantity_per_output, comp.unit_cost, comp.material_yield):
                if e is not None:
                    walk(f"component/{comp.id}", e)
        for op in m.operations.values():
            for fname in ("cycle_time_s", "parts_per_cycle", "machine_rate_per_h",
                          "labor_rate_per_h", "crew_size", "scrap_rate",
                          "consumable_cost_per_part"):
                walk(f"operation/{op.id}", getattr(op, fname))


def _literal_value(e: Expr) -> float | None:
    from .expr import Num

    return e.value if isinstance(e, Num) else None


def required_inputs_missing(model: CostModel, part: PartSpec) -> tuple[str, ...]:
    """Names from the model's input declaration absent from the part spec."""
    return tuple(n for n in model.part_inputs if n not in part.params)
