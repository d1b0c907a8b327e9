"""Line-oriented text format for cost models: parser and canonical printer.

Layout of a model file (comments run from ``#`` to end of line):

    model "demo" {
      currency = "eur";
      input part_mass_kg "kg";
      param labor_rate_eur_h = 32 "eur_per_h";

      process machining { param rate = 80 "eur_per_h"; }
      material steel    { param price_eur_kg = 0.9; }

      entity metal { driver = part_mass_kg; category = material;
                     formula = "part_mass_kg * price_eur_kg"; }

      component blank { kind = purchased; quantity_per_output = "part_mass_kg";
                        unit_cost = "price_eur_kg"; material_yield = 1; }

      operation turn { process = machining; cycle_time_s = 60;
                       machine_rate_per_h = "rate"; }

      assembly part { components = [blank]; operations = [turn]; }
      root = part;
    }

Expression-valued fields are written as quoted strings; bare numbers are
literals.  ``param`` lines inside an operation block form that operation's
feature scope.  Structural problems (unbalanced braces, missing header)
raise ModelSyntaxError; recoverable ones (duplicate ids, unknown keys,
malformed expressions) are collected as positioned diagnostics and parsing
continues.  ``print_model`` emits a canonical form on which parse-then-print
is a fixpoint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .expr import Expr, ExprSyntaxError, Num, format_expr, format_number, parse_expr
from .model import (
    Assembly,
    Category,
    Component,
    CostEntity,
    CostModel,
    Diagnostic,
    Kind,
    MaterialDef,
    Operation,
    Parameter,
    ProcessDef,
)


class ModelSyntaxError(Exception):
    """Unrecoverable structural error in a model file."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class ModelDocument:
    """A parsed model file: source text, model, and declaration locations."""

    source: str
    model: CostModel
    locations: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<num>[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<string>\"[^\"\n]*\")"
    r"|(?P<punct>[{}\[\]=,;])",
    re.ASCII,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ModelSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return tokens


_OP_EXPR_KEYS = (
    "cycle_time_s",
    "parts_per_cycle",
    "machine_rate_per_h",
    "labor_rate_per_h",
    "crew_size",
    "scrap_rate",
    "consumable_cost_per_part",
)
_OP_DEFAULTS = {
    "cycle_time_s": 0.0,
    "parts_per_cycle": 1.0,
    "machine_rate_per_h": 0.0,
    "labor_rate_per_h": 0.0,
    "crew_size": 0.0,
    "scrap_rate": 0.0,
    "consumable_cost_per_part": 0.0,
}


class _ModelParser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.idx = 0
        self.diagnostics: list[Diagnostic] = []
        self.locations: dict[tuple[str, str], tuple[int, int]] = {}
        self.currency = "eur"
        self.globals: dict[str, Parameter] = {}
        self.part_inputs: dict[str, str] = {}
        self.processes: dict[str, ProcessDef] = {}
        self.materials: dict[str, MaterialDef] = {}
        self.entities: dict[str, CostEntity] = {}
        self.components: dict[str, Component] = {}
        self.operations: dict[str, Operation] = {}
        self.assemblies: dict[str, Assembly] = {}
        self.root: str = ""

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> _Tok:
        return self.tokens[self.idx]

    def advance(self) -> _Tok:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def fail(self, message: str) -> ModelSyntaxError:
        tok = self.peek()
        found = "end of file" if tok.kind == "eof" else repr(tok.text)
        return ModelSyntaxError(f"{message}, found {found}", tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None, what: str = "") -> _Tok:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            raise self.fail(f"expected {what or text or kind}")
        return self.advance()

    def skip_semi(self):
        while self.peek().kind == "punct" and self.peek().text == ";":
            self.advance()

    def diag(self, tok: _Tok, location: str, message: str, severity: str = "error"):
        self.diagnostics.append(
            Diagnostic(severity, location, f"{message} (at {tok.line}:{tok.col})")
        )

    # -- grammar ------------------------------------------------------------

    def parse(self) -> ModelDocument:
        if self.peek().kind != "ident" or self.peek().text != "model":
            raise ModelSyntaxError("expected model", self.peek().line, self.peek().col)
        self.advance()
        name_tok = self.expect("string", what="model name string")
        model_id = name_tok.text[1:-1]
        self.expect("punct", "{")
        while not (self.peek().kind == "punct" and self.peek().text == "}"):
            if self.peek().kind == "eof":
                raise self.fail("expected '}' to close model")
            self.item()
        self.advance()  # '}'
        if self.peek().kind != "eof":
            raise self.fail("expected end of file after model")
        model = CostModel(
            id=model_id,
            currency=self.currency,
            globals=self.globals,
            part_inputs=self.part_inputs,
            processes=self.processes,
            materials=self.materials,
            entities=self.entities,
            components=self.components,
            operations=self.operations,
            assemblies=self.assemblies,
            root_assembly=self.root,
        )
        return ModelDocument(self.source, model, self.locations, self.diagnostics)

    def item(self):
        tok = self.expect("ident", what="a declaration keyword")
        kw = tok.text
        if kw == "currency":
            self.expect("punct", "=")
            self.currency = self.expect("string", what="currency string").text[1:-1]
            self.skip_semi()
        elif kw == "param":
            self.param_line(self.globals, "globals")
        elif kw == "input":
            name_tok = self.expect("ident", what="input name")
            unit = ""
            if self.peek().kind == "string":
                unit = self.advance().text[1:-1]
            if name_tok.text in self.part_inputs:
                self.diag(name_tok, f"inputs/{name_tok.text}", "duplicate input")
            else:
                self.part_inputs[name_tok.text] = unit
            self.skip_semi()
        elif kw == "process":
            self.scope_block(kw, self.processes, ProcessDef)
        elif kw == "material":
            self.scope_block(kw, self.materials, MaterialDef)
        elif kw == "entity":
            self.entity_block()
        elif kw == "component":
            self.component_block()
        elif kw == "operation":
            self.operation_block()
        elif kw == "assembly":
            self.assembly_block()
        elif kw == "root":
            self.expect("punct", "=")
            root_tok = self.expect("ident", what="assembly id")
            if self.root:
                self.diag(root_tok, "root", "duplicate root declaration")
            else:
                self.root = root_tok.text
            self.skip_semi()
        else:
            raise ModelSyntaxError(f"unknown declaration '{kw}'", tok.line, tok.col)

    def declare(self, kind: str, tok: _Tok) -> bool:
        """Record a declaration's location; False when the id is a duplicate."""
        key = (kind, tok.text)
        if key in self.locations:
            first = self.locations[key]
            self.diag(
                tok,
                f"{kind}/{tok.text}",
                f"duplicate {kind} id '{tok.text}' (first declared at "
                f"{first[0]}:{first[1]})",
            )
            return False
        self.locations[key] = (tok.line, tok.col)
        return True

    def param_line(self, scope: dict[str, Parameter], location: str):
        name_tok = self.expect("ident", what="parameter name")
        self.expect("punct", "=")
        value, unit = self.param_value(location, name_tok.text)
        if name_tok.text in scope:
            self.diag(name_tok, f"{location}/{name_tok.text}", "duplicate parameter")
        else:
            scope[name_tok.text] = Parameter(name_tok.text, value, unit)
            self.locations[("param", f"{location}/{name_tok.text}")] = (
                name_tok.line,
                name_tok.col,
            )
        self.skip_semi()

    def param_value(self, location: str, name: str) -> tuple[float | Expr, str]:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            unit = ""
            if self.peek().kind == "string":
                unit = self.advance().text[1:-1]
            return float(tok.text), unit
        if tok.kind == "string":
            self.advance()
            unit = ""
            if self.peek().kind == "string":
                unit = self.advance().text[1:-1]
            return self.parse_expr_source(tok, f"{location}/{name}"), unit
        raise self.fail("expected a number or a quoted expression")

    def parse_expr_source(self, tok: _Tok, location: str) -> Expr:
        try:
            return parse_expr(tok.text[1:-1])
        except ExprSyntaxError as exc:
            self.diag(tok, location, f"malformed expression: {exc}")
            return Num(0.0)

    def scope_block(self, kind: str, table: dict, ctor):
        id_tok = self.expect("ident", what=f"{kind} id")
        fresh = self.declare(kind, id_tok)
        self.expect("punct", "{")
        params: dict[str, Parameter] = {}
        while not (self.peek().kind == "punct" and self.peek().text == "}"):
            tok = self.expect("ident", what="'param'")
            if tok.text != "param":
                raise ModelSyntaxError(
                    f"only param lines are allowed in a {kind} block", tok.line, tok.col
                )
            self.param_line(params, f"{kind}/{id_tok.text}")
        self.advance()
        if fresh:
            table[id_tok.text] = ctor(id_tok.text, params)

    def kv_block(self, kind: str, id_tok: _Tok, expr_keys: tuple[str, ...],
                 ident_keys: tuple[str, ...], string_keys: tuple[str, ...],
                 allow_params: bool = False):
        """Parse a `{ key = value; ... }` block into raw dicts."""
        exprs: dict[str, Expr] = {}
        idents: dict[str, str] = {}
        strings: dict[str, str] = {}
        params: dict[str, Parameter] = {}
        location = f"{kind}/{id_tok.text}"
        self.expect("punct", "{")
        while not (self.peek().kind == "punct" and self.peek().text == "}"):
            key_tok = self.expect("ident", what="a key")
            key = key_tok.text
            if allow_params and key == "param":
                self.param_line(params, location)
                continue
            self.expect("punct", "=")
            val = self.peek()
            if key in exprs or key in idents or key in strings:
                self.diag(key_tok, location, f"duplicate key '{key}'")
            if key in expr_keys:
                if val.kind == "num":
                    self.advance()
                    exprs[key] = Num(float(val.text))
                elif val.kind == "string":
                    self.advance()
                    exprs[key] = self.parse_expr_source(val, f"{location}/{key}")
                else:
                    raise self.fail(f"expected a number or expression for '{key}'")
            elif key in ident_keys:
                idents[key] = self.expect("ident", what=f"an identifier for '{key}'").text
            elif key in string_keys:
                strings[key] = self.expect("string", what=f"a string for '{key}'").text[1:-1]
            else:
                self.diag(key_tok, location, f"unknown key '{key}' in {kind}")
                if val.kind in ("num", "string", "ident"):
                    self.advance()
                else:
                    raise self.fail("expected a value")
            self.skip_semi()
        self.advance()
        return exprs, idents, strings, params

    def entity_block(self):
        id_tok = self.expect("ident", what="entity id")
        fresh = self.declare("entity", id_tok)
        exprs, idents, _, _ = self.kv_block(
            "entity", id_tok, ("formula",), ("driver", "category", "process", "material"), ()
        )
        location = f"entity/{id_tok.text}"
        if "driver" not in idents:
            self.diag(id_tok, location, "entity requires a driver")
        if "formula" not in exprs:
            self.diag(id_tok, location, "entity requires a formula")
        category = Category.MATERIAL
        if "category" in idents:
            try:
                category = Category(idents["category"])
            except ValueError:
                self.diag(
                    id_tok, location,
                    f"unknown category '{idents['category']}' "
                    f"(expected one of {', '.join(c.value for c in Category)})",
                )
        if fresh:
            self.entities[id_tok.text] = CostEntity(
                id=id_tok.text,
                driver=idents.get("driver", ""),
                formula=exprs.get("formula", Num(0.0)),
                category=category,
                process_id=idents.get("process"),
                material_id=idents.get("material"),
            )

    def component_block(self):
        id_tok = self.expect("ident", what="component id")
        fresh = self.declare("component", id_tok)
        exprs, idents, strings, _ = self.kv_block(
            "component", id_tok,
            ("quantity_per_output", "unit_cost", "material_yield"),
            ("kind", "sub_assembly", "process", "material", "entity"),
            ("name",),
        )
        location = f"component/{id_tok.text}"
        kind = Kind.PURCHASED
        if "kind" not in idents:
            self.diag(id_tok, location, "component requires kind = purchased | produced")
        else:
            try:
                kind = Kind(idents["kind"])
            except ValueError:
                self.diag(id_tok, location, f"unknown kind '{idents['kind']}'")
        if fresh:
            self.components[id_tok.text] = Component(
                id=id_tok.text,
                name=strings.get("name", id_tok.text),
                kind=kind,
                quantity_per_output=exprs.get("quantity_per_output", Num(1.0)),
                material_yield=exprs.get("material_yield", Num(1.0)),
                unit_cost=exprs.get("unit_cost"),
                sub_assembly=idents.get("sub_assembly"),
                process_id=idents.get("process"),
                material_id=idents.get("material"),
                entity=idents.get("entity"),
            )

    def operation_block(self):
        id_tok = self.expect("ident", what="operation id")
        fresh = self.declare("operation", id_tok)
        exprs, idents, strings, params = self.kv_block(
            "operation", id_tok, _OP_EXPR_KEYS,
            ("process", "material", "entity"), ("name",), allow_params=True,
        )
        location = f"operation/{id_tok.text}"
        if "process" not in idents:
            self.diag(id_tok, location, "operation requires process = <process id>")
        if fresh:
            self.operations[id_tok.text] = Operation(
                id=id_tok.text,
                name=strings.get("name", id_tok.text),
                process_id=idents.get("process", ""),
                material_id=idents.get("material"),
                entity=idents.get("entity"),
                params=params,
                **{
                    key: exprs.get(key, Num(_OP_DEFAULTS[key]))
                    for key in _OP_EXPR_KEYS
                },
            )

    def id_list(self) -> tuple[str, ...]:
        self.expect("punct", "[")
        ids: list[str] = []
        if not (self.peek().kind == "punct" and self.peek().text == "]"):
            ids.append(self.expect("ident", what="an id").text)
            while self.peek().kind == "punct" and self.peek().text == ",":
                self.advance()
                ids.append(self.expect("ident", what="an id").text)
        self.expect("punct", "]")
        return tuple(ids)

    def assembly_block(self):
        id_tok = self.expect("ident", what="assembly id")
        fresh = self.declare("assembly", id_tok)
        location = f"assembly/{id_tok.text}"
        components: tuple[str, ...] = ()
        operations: tuple[str, ...] = ()
        output = ""
        name = id_tok.text
        self.expect("punct", "{")
        while not (self.peek().kind == "punct" and self.peek().text == "}"):
            key_tok = self.expect("ident", what="a key")
            self.expect("punct", "=")
            if key_tok.text == "components":
                components = self.id_list()
            elif key_tok.text == "operations":
                operations = self.id_list()
            elif key_tok.text == "output":
                output = self.expect("ident", what="an output name").text
            elif key_tok.text == "name":
                name = self.expect("string", what="a string").text[1:-1]
            else:
                self.diag(key_tok, location, f"unknown key '{key_tok.text}' in assembly")
                if self.peek().kind in ("num", "string", "ident"):
                    self.advance()
            self.skip_semi()
        self.advance()
        if fresh:
            self.assemblies[id_tok.text] = Assembly(
                id=id_tok.text,
                name=name,
                components=components,
                operations=operations,
                output_name=output,
            )


def parse_model(text: str) -> ModelDocument:
    """Parse model source; structural errors raise ModelSyntaxError."""
    return _ModelParser(text).parse()


# ---------------------------------------------------------------------------
# canonical printer


def _fmt_value(value: float | Expr, unit: str = "") -> str:
    if isinstance(value, (int, float)):
        out = format_number(float(value))
    elif isinstance(value, Num):
        out = format_number(value.value)
    else:
        out = f'"{format_expr(value)}"'
    if unit:
        out += f' "{unit}"'
    return out


def _fmt_expr_field(e: Expr) -> str:
    if isinstance(e, Num):
        return format_number(e.value)
    return f'"{format_expr(e)}"'


def print_model(doc: ModelDocument | CostModel) -> str:
    """Emit canonical model text; parsing it reproduces the model structurally."""
    m = doc.model if isinstance(doc, ModelDocument) else doc
    out: list[str] = [f'model "{m.id}" {{']
    out.append(f'  currency = "{m.currency}";')
    for name, unit in m.part_inputs.items():
        suffix = f' "{unit}"' if unit else ""
        out.append(f"  input {name}{suffix};")
    for p in m.globals.values():
        out.append(f"  param {p.name} = {_fmt_value(p.value, p.unit)};")
    for proc in m.processes.values():
        out.append(f"  process {proc.id} {{")
        for p in proc.params.values():
            out.append(f"    param {p.name} = {_fmt_value(p.value, p.unit)};")
        out.append("  }")
    for mat in m.materials.values():
        out.append(f"  material {mat.id} {{")
        for p in mat.params.values():
            out.append(f"    param {p.name} = {_fmt_value(p.value, p.unit)};")
        out.append("  }")
    for ent in m.entities.values():
        out.append(f"  entity {ent.id} {{")
        out.append(f"    driver = {ent.driver};")
        out.append(f"    category = {ent.category.value};")
        out.append(f'    formula = "{format_expr(ent.formula)}";')
        if ent.process_id is not None:
            out.append(f"    process = {ent.process_id};")
        if ent.material_id is not None:
            out.append(f"    material = {ent.material_id};")
        out.append("  }")
    for comp in m.components.values():
        out.append(f"  component {comp.id} {{")
        out.append(f"    kind = {comp.kind.value};")
        if comp.name != comp.id:
            out.append(f'    name = "{comp.name}";')
        out.append(f"    quantity_per_output = {_fmt_expr_field(comp.quantity_per_output)};")
        if comp.unit_cost is not None:
            out.append(f"    unit_cost = {_fmt_expr_field(comp.unit_cost)};")
        if comp.sub_assembly is not None:
            out.append(f"    sub_assembly = {comp.sub_assembly};")
        out.append(f"    material_yield = {_fmt_expr_field(comp.material_yield)};")
        if comp.process_id is not None:
            out.append(f"    process = {comp.process_id};")
        if comp.material_id is not None:
            out.append(f"    material = {comp.material_id};")
        if comp.entity is not None:
            out.append(f"    entity = {comp.entity};")
        out.append("  }")
    for op in m.operations.values():
        out.append(f"  operation {op.id} {{")
        if op.name != op.id:
            out.append(f'    name = "{op.name}";')
        out.append(f"    process = {op.process_id};")
        if op.material_id is not None:
            out.append(f"    material = {op.material_id};")
        for key in _OP_EXPR_KEYS:
            out.append(f"    {key} = {_fmt_expr_field(getattr(op, key))};")
        if op.entity is not None:
            out.append(f"    entity = {op.entity};")
        for p in op.params.values():
            out.append(f"    param {p.name} = {_fmt_value(p.value, p.unit)};")
        out.append("  }")
    for asm in m.assemblies.values():
        out.append(f"  assembly {asm.id} {{")
        if asm.name != asm.id:
            out.append(f'    name = "{asm.name}";')
        out.append(f"    components = [{', '.join(asm.components)}];")
        out.append(f"    operations = [{', '.join(asm.operations)}];")
        if asm.output_name:
            out.append(f"    output = {asm.output_name};")
        out.append("  }")
    if m.root_assembly:
        out.append(f"  root = {m.root_assembly};")
    out.append("}")
    return "\n".join(out) + "\n"
