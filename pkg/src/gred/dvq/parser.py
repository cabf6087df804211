"""Recursive-descent parser for DVQ text.

Keywords are matched case-insensitively and token spacing is irrelevant; the
grammar covers SELECT of exactly two axis terms plus the optional JOIN / WHERE /
GROUP BY / ORDER BY / BIN clauses. Anything else fails loudly with a typed error.
"""

from __future__ import annotations

from .errors import DanglingAlias, MalformedClause, UnknownChartType
from .lexer import EOF, NUMBER, STRING, SYMBOL, WORD, Token, tokenize
from .model import (
    AGGREGATES,
    AxisTerm,
    BinClause,
    BoolOp,
    ChartType,
    ColumnRef,
    Comparison,
    DvqQuery,
    Expr,
    InSubquery,
    Join,
    Literal,
    NullCheck,
    Operand,
    OrderBy,
    Source,
    Subquery,
)

_COMPARISON_OPS = {"=", "!=", "<>", "<", "<=", ">", ">="}


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # ------------------------------------------------------------- cursor

    def peek(self, ahead: int = 0) -> Token:
        idx = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at_word(self, *words: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == WORD and tok.text.upper() in words

    def at_symbol(self, symbol: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == SYMBOL and tok.text == symbol

    def expect_word(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != WORD or tok.text.upper() != word:
            raise MalformedClause(f"expected keyword {word}", tok.offset)
        return self.advance()

    def expect_symbol(self, symbol: str) -> Token:
        tok = self.peek()
        if tok.kind != SYMBOL or tok.text != symbol:
            raise MalformedClause(f"expected {symbol!r}", tok.offset)
        return self.advance()

    def expect_name(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind != WORD:
            raise MalformedClause(f"expected {what}", tok.offset)
        return self.advance()

    # ------------------------------------------------------------ grammar

    def query(self) -> DvqQuery:
        self.expect_word("VISUALIZE")
        chart_tok = self.peek()
        if chart_tok.kind != WORD:
            raise MalformedClause("expected a chart type", chart_tok.offset)
        try:
            chart = ChartType(chart_tok.text.upper())
        except ValueError:
            raise UnknownChartType(chart_tok.text, chart_tok.offset) from None
        self.advance()

        self.expect_word("SELECT")
        x = self.axis_term()
        self.expect_symbol(",")
        y = self.axis_term()
        self.expect_word("FROM")
        source = self.source()

        where = None
        if self.at_word("WHERE"):
            self.advance()
            where = self.or_expr()
        group_by: tuple[ColumnRef, ...] = ()
        if self.at_word("GROUP"):
            self.advance()
            self.expect_word("BY")
            cols = [self.column_ref()]
            while self.at_symbol(","):
                self.advance()
                cols.append(self.column_ref())
            group_by = tuple(cols)
        order_by = None
        if self.at_word("ORDER"):
            self.advance()
            self.expect_word("BY")
            term = self.axis_term()
            direction = None
            if self.at_word("ASC", "DESC"):
                direction = self.advance().text.upper()
            order_by = OrderBy(term, direction)
        bin_clause = None
        if self.at_word("BIN"):
            self.advance()
            column = self.column_ref()
            self.expect_word("BY")
            unit = self.expect_name("a bin unit")
            bin_clause = BinClause(column, unit.text.upper())

        tail = self.peek()
        if tail.kind != EOF:
            raise MalformedClause(f"unexpected trailing input {tail.text!r}", tail.offset)
        return DvqQuery(chart, x, y, source, where, group_by, order_by, bin_clause)

    def axis_term(self) -> AxisTerm:
        tok = self.peek()
        if tok.kind == WORD and tok.text.upper() in AGGREGATES and self.at_symbol("(", ahead=1):
            aggregate = tok.text.upper()
            self.advance()
            self.expect_symbol("(")
            distinct = False
            if self.at_word("DISTINCT"):
                if aggregate != "COUNT":
                    raise MalformedClause("DISTINCT is only valid inside COUNT", self.peek().offset)
                distinct = True
                self.advance()
            if self.at_symbol("*"):
                star = self.advance()
                if aggregate != "COUNT":
                    raise MalformedClause("* is only valid inside COUNT", star.offset)
                column = ColumnRef("*")
            else:
                column = self.column_ref()
            self.expect_symbol(")")
            return AxisTerm(column, aggregate, distinct)
        return AxisTerm(self.column_ref())

    def column_ref(self) -> ColumnRef:
        first = self.expect_name("a column name")
        if self.at_symbol("."):
            self.advance()
            name = self.expect_name("a column name after '.'")
            return ColumnRef(name.text, qualifier=first.text)
        return ColumnRef(first.text)

    def source(self) -> Source:
        table = self.expect_name("a table name")
        alias = None
        if self.at_word("AS"):
            self.advance()
            alias = self.expect_name("an alias").text
        joins: list[Join] = []
        while self.at_word("JOIN"):
            self.advance()
            join_table = self.expect_name("a table name")
            join_alias = None
            if self.at_word("AS"):
                self.advance()
                join_alias = self.expect_name("an alias").text
            self.expect_word("ON")
            left = self.column_ref()
            self.expect_symbol("=")
            right = self.column_ref()
            joins.append(Join(join_table.text, join_alias, left, right))
        return Source(table.text, alias, tuple(joins))

    def or_expr(self) -> Expr:
        items = [self.and_expr()]
        while self.at_word("OR"):
            self.advance()
            items.append(self.and_expr())
        if len(items) == 1:
            return items[0]
        return BoolOp("OR", tuple(items))

    def and_expr(self) -> Expr:
        items = [self.predicate()]
        while self.at_word("AND"):
            self.advance()
            items.append(self.predicate())
        if len(items) == 1:
            return items[0]
        return BoolOp("AND", tuple(items))

    def predicate(self) -> Expr:
        if self.at_symbol("("):
            self.advance()
            inner = self.or_expr()
            self.expect_symbol(")")
            return inner
        left = self.operand()
        if self.at_word("IS"):
            self.advance()
            negated = False
            if self.at_word("NOT"):
                self.advance()
                negated = True
            self.expect_word("NULL")
            return NullCheck(left, negated)
        if self.at_word("IN"):
            self.advance()
            self.expect_symbol("(")
            query = self.subquery()
            self.expect_symbol(")")
            return InSubquery(left, query)
        if self.at_word("LIKE"):
            self.advance()
            return Comparison(left, "LIKE", self.operand())
        tok = self.peek()
        if tok.kind == SYMBOL and tok.text in _COMPARISON_OPS:
            self.advance()
            op = "!=" if tok.text == "<>" else tok.text
            if self.at_symbol("(") and self.at_word("SELECT", ahead=1):
                self.advance()
                query = self.subquery()
                self.expect_symbol(")")
                return Comparison(left, op, query)
            return Comparison(left, op, self.operand())
        raise MalformedClause("expected a comparison operator", tok.offset)

    def operand(self) -> Operand:
        tok = self.peek()
        if tok.kind == STRING:
            self.advance()
            return Literal(tok.text, is_string=True)
        if tok.kind == NUMBER:
            self.advance()
            return Literal(tok.text, is_string=False)
        if tok.kind == WORD:
            return self.column_ref()
        raise MalformedClause("expected a value or column", tok.offset)

    def subquery(self) -> Subquery:
        self.expect_word("SELECT")
        term = self.axis_term()
        self.expect_word("FROM")
        table = self.expect_name("a table name")
        where = None
        if self.at_word("WHERE"):
            self.advance()
            where = self.or_expr()
        return Subquery(term, table.text, where)


def parse_dvq(text: str) -> DvqQuery:
    """Parse DVQ text into a query, or raise a DvqError subclass."""
    if not text or not text.strip():
        raise MalformedClause("empty input", 0)
    query = _Parser(text).query()
    _check_aliases(query)
    return query


# ------------------------------------------------------------------ alias checks


def _check_aliases(query: DvqQuery) -> None:
    declared = {query.source.table.lower()}
    if query.source.alias:
        declared.add(query.source.alias.lower())
    for join in query.source.joins:
        declared.add(join.table.lower())
        if join.alias:
            declared.add(join.alias.lower())

    def check_column(col: ColumnRef, scope: set[str]) -> None:
        if col.qualifier is not None and col.qualifier.lower() not in scope:
            raise DanglingAlias(col.qualifier)

    def check_operand(op: Operand, scope: set[str]) -> None:
        if isinstance(op, ColumnRef):
            check_column(op, scope)

    def check_expr(expr: Expr, scope: set[str]) -> None:
        if isinstance(expr, BoolOp):
            for item in expr.items:
                check_expr(item, scope)
        elif isinstance(expr, Comparison):
            check_operand(expr.left, scope)
            if isinstance(expr.right, Subquery):
                check_subquery(expr.right, scope)
            else:
                check_operand(expr.right, scope)
        elif isinstance(expr, InSubquery):
            check_operand(expr.left, scope)
            check_subquery(expr.query, scope)
        elif isinstance(expr, NullCheck):
            check_operand(expr.operand, scope)

    def check_subquery(sub: Subquery, scope: set[str]) -> None:
        inner = scope | {sub.table.lower()}
        check_column(sub.term.column, inner)
        if sub.where is not None:
            check_expr(sub.where, inner)

    check_column(query.x.column, declared)
    check_column(query.y.column, declared)
    for join in query.source.joins:
        check_column(join.left, declared)
        check_column(join.right, declared)
    if query.where is not None:
        check_expr(query.where, declared)
    for col in query.group_by:
        check_column(col, declared)
    if query.order_by is not None:
        check_column(query.order_by.term.column, declared)
    if query.bin is not None:
        check_column(query.bin.column, declared)
