"""Arithmetic expression language used by every formula in a cost model.

Grammar (EBNF):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

NUMBER is an unsigned decimal literal with optional fraction and exponent;
negative constants are written with unary minus.  IDENT is ASCII
``[A-Za-z_][A-Za-z0-9_]*``.  Built-in calls: ``min(a, b)``, ``max(a, b)``,
``ceil(x)``, ``floor(x)``, ``abs(x)``.  There are no booleans, comparisons
or conditionals; threshold logic is written with min/max.

Evaluation is IEEE double precision.  Division by zero raises instead of
producing an infinity, and any non-finite intermediate result raises.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass


class ExprError(Exception):
    """Base class for expression-language errors."""


class ExprSyntaxError(ExprError):
    """Raised when a source string does not match the grammar."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.expected = expected


class UnboundVariable(ExprError):
    """Raised when an identifier has no binding in the evaluation environment."""

    def __init__(self, name: str):
        super().__init__(f"unbound variable '{name}'")
        self.name = name


class DivisionByZero(ExprError):
    """Raised on division by zero (results are never infinities)."""


class NonFiniteResult(ExprError):
    """Raised when evaluation produces an infinity or NaN."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Num | Var | Neg | BinOp | Call

BUILTINS: dict[str, int] = {"min": 2, "max": 2, "ceil": 1, "floor": 1, "abs": 1}

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[()+\-*/,])",
    re.ASCII,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]]):
        self.tokens = tokens
        self.idx = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def fail(self, expected: tuple[str, ...]):
        kind, text, pos = self.peek()
        what = "end of input" if kind == "eof" else repr(text)
        raise ExprSyntaxError(
            f"unexpected {what}, expected {' or '.join(expected)}", pos, expected
        )

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[:2] in (("punct", "+"), ("punct", "-")):
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[:2] in (("punct", "*"), ("punct", "/")):
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "punct" and text == "-":
            self.advance()
            return Neg(self.factor())
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "ident":
            self.advance()
            if self.peek()[:2] == ("punct", "("):
                return self.call(text, pos)
            return Var(text)
        if kind == "punct" and text == "(":
            self.advance()
            node = self.expr()
            if self.peek()[:2] != ("punct", ")"):
                self.fail(("')'",))
            self.advance()
            return node
        self.fail(("number", "identifier", "'-'", "'('"))

    def call(self, func: str, pos: int) -> Expr:
        if func not in BUILTINS:
            raise ExprSyntaxError(f"unknown function '{func}'", pos, tuple(BUILTINS))
        self.advance()  # '('
        args = [self.expr()]
        while self.peek()[:2] == ("punct", ","):
            self.advance()
            args.append(self.expr())
        if self.peek()[:2] != ("punct", ")"):
            self.fail(("','", "')'"))
        self.advance()
        if len(args) != BUILTINS[func]:
            raise ExprSyntaxError(
                f"{func} takes {BUILTINS[func]} argument(s), got {len(args)}", pos
            )
        return Call(func, tuple(args))


def parse_expr(text: str) -> Expr:
    """Parse source text into an AST; raises ExprSyntaxError on malformed input."""
    if not isinstance(text, str):
        raise ExprSyntaxError("expression source must be a string", 0)
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    if parser.peek()[0] != "eof":
        parser.fail(("operator", "end of input"))
    return node


def eval_expr(e: Expr, env) -> float:
    """Evaluate an AST against a name->number mapping.

    The mapping may raise KeyError (reported as UnboundVariable) or any
    richer lookup error of its own, which is propagated unchanged.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Neg):
        return -eval_expr(e.operand, env)
    if isinstance(e, BinOp):
        left = eval_expr(e.left, env)
        right = eval_expr(e.right, env)
        if e.op == "+":
            result = left + right
        elif e.op == "-":
            result = left - right
        elif e.op == "*":
            result = left * right
        else:
            if right == 0.0:
                raise DivisionByZero(f"division by zero in '{format_expr(e)}'")
            result = left / right
        if not math.isfinite(result):
            raise NonFiniteResult(f"non-finite result in '{format_expr(e)}'")
        return result
    if isinstance(e, Call):
        args = [eval_expr(a, env) for a in e.args]
        if e.func == "min":
            return min(args)
        if e.func == "max":
            return max(args)
        if e.func == "ceil":
            return float(math.ceil(args[0]))
        if e.func == "floor":
            return float(math.floor(args[0]))
        return abs(args[0])
    raise TypeError(f"not an expression node: {e!r}")


_PREC_ADD = 1
_PREC_MUL = 2
_PREC_UNARY = 3
_PREC_ATOM = 4


def _precedence(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC_ADD if e.op in "+-" else _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_UNARY
    return _PREC_ATOM


def format_number(value: float) -> str:
    """Canonical decimal form: integers without a point, others via repr."""
    if value != value or value in (math.inf, -math.inf):
        raise ValueError("cannot format a non-finite literal")
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def format_expr(e: Expr) -> str:
    """Render an AST to canonical text; parse_expr inverts it structurally.

    Parentheses are emitted exactly where the grammar requires them, so the
    output is a fixpoint of parse-then-format.  Note that negative Num
    literals render with a leading minus and therefore reparse as a unary
    minus node; the parser itself never builds negative literals.
    """
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = format_expr(e.operand)
        if _precedence(e.operand) < _PREC_UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        prec = _precedence(e)
        left = format_expr(e.left)
        if _precedence(e.left) < prec:
            left = f"({left})"
        right = format_expr(e.right)
        # grammar is left-associative: a same-precedence right operand
        # only reparses identically when parenthesized
        if _precedence(e.right) <= prec:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(format_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def free_variables(e: Expr) -> set[str]:
    """All identifiers appearing in the expression."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, Call):
        out: set[str] = set()
        for a in e.args:
            out |= free_variables(a)
        return out
    return set()
