"""AST node types for the DVQ language.

A DVQ has the surface form

    Visualize <chart> SELECT <x> , <y> FROM <source>
        [WHERE <predicate>] [GROUP BY <cols>] [ORDER BY <term> [ASC|DESC]] [BIN <col> BY <unit>]

All nodes are immutable; queries can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union


class ChartType(str, Enum):
    BAR = "BAR"
    PIE = "PIE"
    LINE = "LINE"
    SCATTER = "SCATTER"


AGGREGATES = ("COUNT", "SUM", "AVG", "MIN", "MAX")


@dataclass(frozen=True)
class ColumnRef:
    """A column, optionally alias- or table-qualified (e.g. ``T1.Dept_ID``). ``*`` is the star column."""

    name: str
    qualifier: str | None = None

    @property
    def is_star(self) -> bool:
        return self.name == "*"


@dataclass(frozen=True)
class AxisTerm:
    """A SELECT/ORDER BY term: a column, optionally wrapped in an aggregate."""

    column: ColumnRef
    aggregate: str | None = None
    distinct: bool = False

    def __post_init__(self):
        if self.distinct and self.aggregate != "COUNT":
            raise ValueError("DISTINCT is only valid inside COUNT")
        if self.column.is_star and self.aggregate != "COUNT":
            raise ValueError("* is only valid inside COUNT")


@dataclass(frozen=True)
class Join:
    table: str
    alias: str | None
    left: ColumnRef
    right: ColumnRef


@dataclass(frozen=True)
class Source:
    """FROM clause: a base table plus zero or more equi-joins."""

    table: str
    alias: str | None = None
    joins: tuple[Join, ...] = ()


@dataclass(frozen=True)
class Literal:
    """A number or string constant. ``text`` is the lexeme (string content without quotes)."""

    text: str
    is_string: bool = False


@dataclass(frozen=True)
class Subquery:
    """A scalar subselect usable as a comparison operand or IN target."""

    term: AxisTerm
    table: str
    where: "Expr | None" = None


Operand = Union[ColumnRef, Literal]


@dataclass(frozen=True)
class Comparison:
    left: Operand
    op: str  # = != < <= > >= LIKE
    right: "Operand | Subquery"


@dataclass(frozen=True)
class InSubquery:
    left: Operand
    query: Subquery


@dataclass(frozen=True)
class NullCheck:
    operand: Operand
    negated: bool = False


@dataclass(frozen=True)
class BoolOp:
    """N-ary AND/OR; same-operator children are flattened at parse time."""

    op: str  # AND | OR
    items: tuple["Expr", ...]


Expr = Union[Comparison, InSubquery, NullCheck, BoolOp]


@dataclass(frozen=True)
class OrderBy:
    term: AxisTerm
    direction: str | None = None  # ASC | DESC


@dataclass(frozen=True)
class BinClause:
    column: ColumnRef
    unit: str


@dataclass(frozen=True)
class DvqQuery:
    chart: ChartType
    x: AxisTerm
    y: AxisTerm
    source: Source
    where: Expr | None = None
    group_by: tuple[ColumnRef, ...] = ()
    order_by: OrderBy | None = None
    bin: BinClause | None = None


@dataclass(frozen=True)
class DvqComponents:
    """The three scored components of a query: chart token, SELECT axes, and everything after."""

    vis: str
    axes: str
    data: str
