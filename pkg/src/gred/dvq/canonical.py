"""Canonical rendering, component decomposition, and canonical equality for DVQs.

Canonical form: single spaces between tokens, keywords upper-case (the leading
keyword is always spelled ``Visualize``), ``" , "`` between list items, aggregate
calls rendered tight (``COUNT(DISTINCT x)``), string literals single-quoted, and
identifiers preserved verbatim. Equality folds identifier case but compares
string-literal contents case-sensitively.
"""

from __future__ import annotations

from .errors import DvqError
from .model import (
    AxisTerm,
    BoolOp,
    ColumnRef,
    Comparison,
    DvqComponents,
    DvqQuery,
    Expr,
    InSubquery,
    NullCheck,
    Operand,
    Subquery,
)
from .parser import parse_dvq


def _column(col: ColumnRef, fold: bool) -> str:
    name = col.name.lower() if fold and not col.is_star else col.name
    if col.qualifier is None:
        return name
    qualifier = col.qualifier.lower() if fold else col.qualifier
    return f"{qualifier}.{name}"


def _axis(term: AxisTerm, fold: bool) -> str:
    column = _column(term.column, fold)
    if term.aggregate is None:
        return column
    if term.distinct:
        return f"{term.aggregate}(DISTINCT {column})"
    return f"{term.aggregate}({column})"


def _operand(op: Operand, fold: bool) -> str:
    if isinstance(op, ColumnRef):
        return _column(op, fold)
    if op.is_string:
        return "'" + op.text.replace("'", "''") + "'"
    return op.text


def _subquery(sub: Subquery, fold: bool) -> str:
    table = sub.table.lower() if fold else sub.table
    text = f"SELECT {_axis(sub.term, fold)} FROM {table}"
    if sub.where is not None:
        text += f" WHERE {_expr(sub.where, fold)}"
    return text


def _expr(expr: Expr, fold: bool) -> str:
    if isinstance(expr, BoolOp):
        parts = []
        for item in expr.items:
            rendered = _expr(item, fold)
            # an OR nested under an AND needs explicit grouping
            if expr.op == "AND" and isinstance(item, BoolOp):
                rendered = f"({rendered})"
            parts.append(rendered)
        return f" {expr.op} ".join(parts)
    if isinstance(expr, Comparison):
        if isinstance(expr.right, Subquery):
            return f"{_operand(expr.left, fold)} {expr.op} ({_subquery(expr.right, fold)})"
        return f"{_operand(expr.left, fold)} {expr.op} {_operand(expr.right, fold)}"
    if isinstance(expr, InSubquery):
        return f"{_operand(expr.left, fold)} IN ({_subquery(expr.query, fold)})"
    if isinstance(expr, NullCheck):
        keyword = "IS NOT NULL" if expr.negated else "IS NULL"
        return f"{_operand(expr.operand, fold)} {keyword}"
    raise TypeError(f"unexpected expression node {type(expr).__name__}")


def _data(query: DvqQuery, fold: bool) -> str:
    source = query.source
    table = source.table.lower() if fold else source.table
    parts = [f"FROM {table}"]
    if source.alias:
        parts.append(f"AS {source.alias.lower() if fold else source.alias}")
    for join in source.joins:
        join_table = join.table.lower() if fold else join.table
        parts.append(f"JOIN {join_table}")
        if join.alias:
            parts.append(f"AS {join.alias.lower() if fold else join.alias}")
        parts.append(f"ON {_column(join.left, fold)} = {_column(join.right, fold)}")
    if query.where is not None:
        parts.append(f"WHERE {_expr(query.where, fold)}")
    if query.group_by:
        parts.append("GROUP BY " + " , ".join(_column(c, fold) for c in query.group_by))
    if query.order_by is not None:
        order = f"ORDER BY {_axis(query.order_by.term, fold)}"
        if query.order_by.direction:
            order += f" {query.order_by.direction}"
        parts.append(order)
    if query.bin is not None:
        parts.append(f"BIN {_column(query.bin.column, fold)} BY {query.bin.unit}")
    return " ".join(parts)


def decompose(query: DvqQuery, *, fold_identifiers: bool = False) -> DvqComponents:
    """Split a query into its chart, axes, and data-transformation components."""
    fold = fold_identifiers
    return DvqComponents(
        vis=query.chart.value,
        axes=f"{_axis(query.x, fold)} , {_axis(query.y, fold)}",
        data=_data(query, fold),
    )


def render_canonical(query: DvqQuery, *, fold_identifiers: bool = False) -> str:
    """Render the canonical surface form of a query."""
    parts = decompose(query, fold_identifiers=fold_identifiers)
    return f"Visualize {parts.vis} SELECT {parts.axes} {parts.data}"


def comparison_key(query: DvqQuery) -> str:
    """Canonical form with identifier case folded; equal keys mean equal queries."""
    return render_canonical(query, fold_identifiers=True)


def canonical_equal(a: str, b: str) -> bool:
    """True iff both strings parse and their canonical forms match.

    Identifiers compare case-insensitively; string-literal contents compare
    case-sensitively. Returns False (never raises) when either side fails to
    parse; callers that need the parse error should parse explicitly.
    """
    try:
        qa = parse_dvq(a)
        qb = parse_dvq(b)
    except DvqError:
        return False
    return comparison_key(qa) == comparison_key(qb)
