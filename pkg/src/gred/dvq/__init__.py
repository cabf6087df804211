"""Parser, canonical renderer, and component decomposer for the DVQ language."""

from .canonical import canonical_equal, comparison_key, decompose, render_canonical
from .errors import DanglingAlias, DvqError, MalformedClause, UnbalancedParens, UnknownChartType
from .model import (
    AGGREGATES,
    AxisTerm,
    BinClause,
    BoolOp,
    ChartType,
    ColumnRef,
    Comparison,
    DvqComponents,
    DvqQuery,
    InSubquery,
    Join,
    Literal,
    NullCheck,
    OrderBy,
    Source,
    Subquery,
)
from .parser import parse_dvq

__all__ = [
    "AGGREGATES",
    "AxisTerm",
    "BinClause",
    "BoolOp",
    "ChartType",
    "ColumnRef",
    "Comparison",
    "DanglingAlias",
    "DvqComponents",
    "DvqError",
    "DvqQuery",
    "InSubquery",
    "Join",
    "Literal",
    "MalformedClause",
    "NullCheck",
    "OrderBy",
    "Source",
    "Subquery",
    "UnbalancedParens",
    "UnknownChartType",
    "canonical_equal",
    "comparison_key",
    "decompose",
    "parse_dvq",
    "render_canonical",
]
