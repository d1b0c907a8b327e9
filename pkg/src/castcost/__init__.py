"""Cost-entity modeling engine and design-to-cost workbench for sand-casting parts."""

__version__ = "0.1.0"

from .expr import (
    DivisionByZero,
    Expr,
    ExprSyntaxError,
    NonFiniteResult,
    UnboundVariable,
    eval_expr,
    format_expr,
    free_variables,
    parse_expr,
)
from .model import (
    Assembly,
    Category,
    Component,
    ContextPath,
    CostEntity,
    CostError,
    CostModel,
    CyclicParameter,
    Diagnostic,
    Kind,
    MaterialDef,
    MissingPartInput,
    ModelValidationError,
    Operation,
    Parameter,
    PartSpec,
    ProcessDef,
    UnresolvedParameter,
    entity_cost,
    resolve_parameter,
    validate_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
