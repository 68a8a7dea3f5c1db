"""Recursive-descent parser for the Spider SQL dialect.

The same parser serves two callers: ``parse_sql`` (strict: the whole text
must form one resolvable statement) and the incremental checker (prefix
mode: running out of tokens mid-production signals a viable prefix via
``EndOfPrefix`` rather than an error).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..catalog import SchemaCatalog
from ..errors import ResolutionError, SqlSyntaxError
from .ast import (
    AGG_OPS,
    ColumnRef,
    ColUnit,
    CondUnit,
    Literal,
    OrderBy,
    SelectItem,
    SqlAst,
    SubqueryRef,
    TableRef,
    ValUnit,
)
from .lexer import SqlToken, lex

_AGG_KEYWORDS = frozenset(AGG_OPS) - {"none"}
_CLAUSE_STOPPERS = frozenset(
    {"where", "group", "having", "order", "limit", "intersect", "union", "except", "on", "join"}
)
_JOIN_MODIFIERS = frozenset({"left", "right", "inner", "outer", "full", "cross"})


class EndOfPrefix(Exception):
    """Prefix mode ran out of tokens mid-production; the prefix is viable."""


@dataclass
class Scope:
    """Name-resolution scope of one SELECT level."""

    parent: Optional["Scope"] = None
    tables: list[str] = field(default_factory=list)  # lowercase table names
    aliases: dict[str, str] = field(default_factory=dict)  # alias -> table (lower)
    subquery_tables: dict[str, list[str]] = field(default_factory=dict)
    anon_subquery_tables: list[str] = field(default_factory=list)
    from_complete: bool = False

    def chain(self) -> list["Scope"]:
        scopes, cur = [], self
        while cur is not None:
            scopes.append(cur)
            cur = cur.parent
        return scopes

    def visible_tables(self) -> list[str]:
        seen: list[str] = []
        for name in self.tables + self.anon_subquery_tables:
            if name not in seen:
                seen.append(name)
        for names in self.subquery_tables.values():
            for name in names:
                if name not in seen:
                    seen.append(name)
        return seen


@dataclass
class ColumnRefRecord:
    ref: ColumnRef
    token: SqlToken
    scope: Scope
    clause: str


@dataclass
class TableRefRecord:
    name: str
    token: SqlToken
    scope: Scope


@dataclass
class ParseOutcome:
    ast: Optional[SqlAst]
    column_refs: list[ColumnRefRecord]
    table_refs: list[TableRefRecord]
    complete: bool


class _Stream:
    def __init__(self, tokens: list[SqlToken], prefix_mode: bool):
        self.tokens = tokens
        self.pos = 0
        self.prefix_mode = prefix_mode

    def peek(self, offset: int = 0) -> Optional[SqlToken]:
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def take(self) -> SqlToken:
        if self.at_end():
            if self.prefix_mode:
                raise EndOfPrefix()
            raise SqlSyntaxError("unexpected end of input")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_keyword(self, *words: str) -> SqlToken:
        tok = self.take()
        if tok.kind != "keyword" or tok.lower not in words:
            raise SqlSyntaxError(
                f"expected {' or '.join(w.upper() for w in words)}, got {tok.lexeme!r}",
                tok.span,
            )
        return tok

    def expect_punct(self, lexeme: str) -> SqlToken:
        tok = self.take()
        if tok.lexeme != lexeme:
            raise SqlSyntaxError(f"expected {lexeme!r}, got {tok.lexeme!r}", tok.span)
        return tok

    def match_keyword(self, *words: str) -> Optional[SqlToken]:
        tok = self.peek()
        if tok is not None and tok.kind == "keyword" and tok.lower in words:
            self.pos += 1
            return tok
        return None

    def match_punct(self, lexeme: str) -> Optional[SqlToken]:
        tok = self.peek()
        if tok is not None and tok.lexeme == lexeme:
            self.pos += 1
            return tok
        return None


class Parser:
    def __init__(self, tokens: list[SqlToken], prefix_mode: bool = False):
        self.ts = _Stream(tokens, prefix_mode)
        self.column_refs: list[ColumnRefRecord] = []
        self.table_refs: list[TableRefRecord] = []

    # -- entry -----------------------------------------------------------

    def parse_statement(self) -> ParseOutcome:
        complete = False
        ast = None
        try:
            ast = self.parse_query(None)
            self.ts.match_punct(";")
            if not self.ts.at_end():
                tok = self.ts.peek()
                raise SqlSyntaxError(f"trailing input at {tok.lexeme!r}", tok.span)
            complete = True
        except EndOfPrefix:
            pass
        return ParseOutcome(ast, self.column_refs, self.table_refs, complete)

    # -- grammar ---------------------------------------------------------

    def parse_query(self, parent: Optional[Scope]) -> SqlAst:
        scope = Scope(parent=parent)
        ast = SqlAst()
        self.ts.expect_keyword("select")
        ast.select_distinct = self.ts.match_keyword("distinct") is not None
        ast.select.append(self.parse_select_item(scope))
        while self.ts.match_punct(","):
            ast.select.append(self.parse_select_item(scope))

        self.ts.expect_keyword("from")
        self.parse_from(ast, scope)
        # In prefix mode the FROM clause is only settled once a token that
        # cannot extend it has been seen; at end-of-tokens another JOIN or
        # alias may still arrive.
        scope.from_complete = not self.ts.prefix_mode or not self.ts.at_end()

        if self.ts.match_keyword("where"):
            ast.where = self.parse_condition(scope, "where")
        if self.ts.match_keyword("group"):
            self.ts.expect_keyword("by")
            ast.group_by.append(self.parse_col_unit(scope, "group_by"))
            while self.ts.match_punct(","):
                ast.group_by.append(self.parse_col_unit(scope, "group_by"))
        if self.ts.match_keyword("having"):
            ast.having = self.parse_condition(scope, "having")
        if self.ts.match_keyword("order"):
            self.ts.expect_keyword("by")
            items = [self.parse_val_unit(scope, "order_by")]
            while self.ts.match_punct(","):
                items.append(self.parse_val_unit(scope, "order_by"))
            direction = "asc"
            tok = self.ts.match_keyword("asc", "desc")
            if tok is not None:
                direction = tok.lower
            ast.order_by = OrderBy(direction, items)
        if self.ts.match_keyword("limit"):
            tok = self.ts.take()
            if tok.kind != "literal" or not tok.lexeme[:1].isdigit():
                raise SqlSyntaxError(f"expected LIMIT count, got {tok.lexeme!r}", tok.span)
            ast.limit = int(float(tok.lexeme))
        set_tok = self.ts.match_keyword("intersect", "union", "except")
        if set_tok is not None:
            self.ts.match_keyword("all")
            ast.set_op = (set_tok.lower, self.parse_query(parent))
        return ast

    def parse_select_item(self, scope: Scope) -> SelectItem:
        # Aggregates live inside col_units (see parse_col_unit), so both
        # count(*) and max(budget) - min(budget) parse uniformly.
        return SelectItem("none", self.parse_val_unit(scope, "select", allow_distinct=True))

    def parse_val_unit(
        self, scope: Scope, clause: str, allow_distinct: bool = False
    ) -> ValUnit:
        left = self.parse_col_unit(scope, clause, allow_distinct=allow_distinct)
        tok = self.ts.peek()
        if tok is not None and tok.kind == "operator" and tok.lexeme in "-+*/":
            # Bare '*' is lexed as an operator; it only means arithmetic when
            # something column-like follows.
            nxt = self.ts.peek(1)
            if tok.lexeme == "*" and (nxt is None or nxt.kind not in ("identifier", "keyword")):
                return ValUnit("none", left)
            self.ts.take()
            right = self.parse_col_unit(scope, clause)
            return ValUnit(tok.lexeme, left, right)
        return ValUnit("none", left)

    def parse_col_unit(
        self, scope: Scope, clause: str, allow_distinct: bool = False
    ) -> ColUnit:
        distinct = False
        if allow_distinct and self.ts.match_keyword("distinct"):
            distinct = True
        tok = self.ts.peek()
        if tok is not None and tok.kind == "keyword" and tok.lower in _AGG_KEYWORDS:
            agg = self.ts.take().lower
            self.ts.expect_punct("(")
            if self.ts.match_keyword("distinct"):
                distinct = True
            ref = self.parse_column_ref(scope, clause)
            self.ts.expect_punct(")")
            return ColUnit(agg, distinct, ref)
        ref = self.parse_column_ref(scope, clause)
        return ColUnit("none", distinct, ref)

    def parse_column_ref(self, scope: Scope, clause: str) -> ColumnRef:
        tok = self.ts.take()
        if tok.lexeme == "*":
            return ColumnRef(None, "*")
        if tok.kind != "identifier":
            raise SqlSyntaxError(f"expected column, got {tok.lexeme!r}", tok.span)
        qualifier = None
        name_tok = tok
        if self.ts.match_punct("."):
            qualifier = tok.lexeme
            name_tok = self.ts.take()
            if name_tok.lexeme == "*":
                return ColumnRef(qualifier, "*")
            if name_tok.kind != "identifier":
                raise SqlSyntaxError(
                    f"expected column after '.', got {name_tok.lexeme!r}", name_tok.span
                )
        ref = ColumnRef(qualifier, name_tok.lexeme)
        self.column_refs.append(ColumnRefRecord(ref, name_tok, scope, clause))
        return ref

    # -- FROM ------------------------------------------------------------

    def parse_from(self, ast: SqlAst, scope: Scope) -> None:
        self.parse_table_source(ast, scope)
        while True:
            if self.ts.match_punct(","):
                self.parse_table_source(ast, scope)
                continue
            tok = self.ts.peek()
            if tok is not None and tok.kind == "keyword" and (
                tok.lower == "join" or tok.lower in _JOIN_MODIFIERS
            ):
                while self.ts.match_keyword(*_JOIN_MODIFIERS):
                    pass
                self.ts.expect_keyword("join")
                self.parse_table_source(ast, scope)
                if self.ts.match_keyword("on"):
                    conds = self.parse_condition(scope, "join")
                    if ast.join_conds:
                        ast.join_conds.append("and")
                    ast.join_conds.extend(conds)
                continue
            break

    def parse_table_source(self, ast: SqlAst, scope: Scope) -> None:
        if self.ts.match_punct("("):
            sub = self.parse_query(scope.parent)
            self.ts.expect_punct(")")
            alias = self._parse_alias()
            ast.from_items.append(SubqueryRef(sub, alias))
            exposed = _underlying_tables(sub)
            if alias:
                scope.subquery_tables[alias.lower()] = exposed
            else:
                scope.anon_subquery_tables.extend(exposed)
            return
        tok = self.ts.take()
        if tok.kind != "identifier":
            raise SqlSyntaxError(f"expected table name, got {tok.lexeme!r}", tok.span)
        alias = self._parse_alias()
        ast.from_items.append(TableRef(tok.lexeme, alias))
        self.table_refs.append(TableRefRecord(tok.lexeme, tok, scope))
        scope.tables.append(tok.lower)
        if alias:
            scope.aliases[alias.lower()] = tok.lower

    def _parse_alias(self) -> Optional[str]:
        if self.ts.match_keyword("as"):
            tok = self.ts.take()
            if tok.kind != "identifier":
                raise SqlSyntaxError(f"expected alias, got {tok.lexeme!r}", tok.span)
            return tok.lexeme
        return None

    # -- conditions ------------------------------------------------------

    def parse_condition(self, scope: Scope, clause: str) -> list:
        conds: list = [self.parse_cond_unit(scope, clause)]
        while True:
            tok = self.ts.match_keyword("and", "or")
            if tok is None:
                break
            conds.append(tok.lower)
            conds.append(self.parse_cond_unit(scope, clause))
        return conds

    def parse_cond_unit(self, scope: Scope, clause: str) -> CondUnit:
        not_op = self.ts.match_keyword("not") is not None
        if self.ts.match_keyword("exists"):
            self.ts.expect_punct("(")
            sub = self.parse_query(scope)
            self.ts.expect_punct(")")
            star = ValUnit("none", ColUnit("none", False, ColumnRef(None, "*")))
            return CondUnit(not_op, "exists", star, sub)
        val_unit = self.parse_val_unit(scope, clause)
        if self.ts.match_keyword("not"):
            not_op = True
        tok = self.ts.take()
        if tok.kind == "keyword" and tok.lower == "between":
            lo = self.parse_value(scope, clause)
            self.ts.expect_keyword("and")
            hi = self.parse_value(scope, clause)
            return CondUnit(not_op, "between", val_unit, lo, hi)
        if tok.kind == "keyword" and tok.lower == "in":
            self.ts.expect_punct("(")
            nxt = self.ts.peek()
            if nxt is not None and nxt.kind == "keyword" and nxt.lower == "select":
                sub = self.parse_query(scope)
                self.ts.expect_punct(")")
                return CondUnit(not_op, "in", val_unit, sub)
            values = [self.parse_value(scope, clause)]
            while self.ts.match_punct(","):
                values.append(self.parse_value(scope, clause))
            self.ts.expect_punct(")")
            return CondUnit(not_op, "in", val_unit, tuple(values))
        if tok.kind == "keyword" and tok.lower == "like":
            return CondUnit(not_op, "like", val_unit, self.parse_value(scope, clause))
        if tok.kind == "keyword" and tok.lower == "is":
            if self.ts.match_keyword("not"):
                not_op = True
            self.ts.expect_keyword("null")
            return CondUnit(not_op, "is", val_unit, Literal("null", False))
        if tok.kind == "operator" and tok.lexeme in ("=", ">", "<", ">=", "<=", "!=", "<>"):
            op = "!=" if tok.lexeme == "<>" else tok.lexeme
            return CondUnit(not_op, op, val_unit, self.parse_value(scope, clause))
        raise SqlSyntaxError(f"expected comparison, got {tok.lexeme!r}", tok.span)

    def parse_value(self, scope: Scope, clause: str):
        tok = self.ts.peek()
        if tok is None:
            if self.ts.prefix_mode:
                raise EndOfPrefix()
            raise SqlSyntaxError("unexpected end of input")
        if tok.lexeme == "(":
            self.ts.take()
            sub = self.parse_query(scope)
            self.ts.expect_punct(")")
            return sub
        if tok.kind == "literal":
            self.ts.take()
            if tok.lexeme[:1] in "'\"":
                return Literal(_unquote(tok.lexeme), True)
            return Literal(float(tok.lexeme), False)
        if tok.kind == "operator" and tok.lexeme in "+-":
            sign_tok = self.ts.take()
            num = self.ts.take()
            if num.kind != "literal" or num.lexeme[:1] in "'\"":
                raise SqlSyntaxError(f"expected number after {sign_tok.lexeme!r}", num.span)
            value = float(num.lexeme)
            return Literal(-value if sign_tok.lexeme == "-" else value, False)
        if tok.kind == "keyword" and tok.lower == "null":
            self.ts.take()
            return Literal("null", False)
        return self.parse_col_unit(scope, clause)


def _unquote(lexeme: str) -> str:
    quote = lexeme[0]
    body = lexeme[1:]
    if body.endswith(quote):
        body = body[:-1]
    return body


def _underlying_tables(ast: SqlAst) -> list[str]:
    tables: list[str] = []
    for item in ast.from_items:
        if isinstance(item, TableRef):
            tables.append(item.name.lower())
        else:
            tables.extend(_underlying_tables(item.query))
    return tables


# -- resolution ------------------------------------------------------------


def _lookup_qualifier(scope: Scope, qualifier: str) -> Optional[tuple[str, list[str]]]:
    """Resolve a qualifier to ('table', [table]) or ('subquery', tables)."""
    q = qualifier.lower()
    for sc in scope.chain():
        if q in sc.aliases:
            return ("table", [sc.aliases[q]])
        if q in sc.tables:
            return ("table", [q])
        if q in sc.subquery_tables:
            return ("subquery", sc.subquery_tables[q])
    return None


def _scope_tables(scope: Scope) -> list[str]:
    seen: list[str] = []
    for sc in scope.chain():
        for name in sc.visible_tables():
            if name not in seen:
                seen.append(name)
    return seen


def resolve_refs(outcome: ParseOutcome, catalog: SchemaCatalog) -> None:
    """Strictly resolve every recorded reference; raises ResolutionError."""
    for rec in outcome.table_refs:
        if not catalog.has_table(rec.name):
            raise ResolutionError(rec.name, f"unknown table {rec.name!r}")
    for rec in outcome.column_refs:
        ref = rec.ref
        if ref.is_star:
            continue
        if ref.qualifier is not None:
            found = _lookup_qualifier(rec.scope, ref.qualifier)
            if found is None:
                raise ResolutionError(ref.qualifier, f"unknown table or alias {ref.qualifier!r}")
            _, candidates = found
        else:
            candidates = _scope_tables(rec.scope)
        for name in candidates:
            tab = catalog.table(name)
            if tab is not None and tab.has_column(ref.column):
                ref.resolved_table = tab.name.lower()
                break
        else:
            raise ResolutionError(
                ref.column, f"column {ref.column!r} not found in scope"
            )


def parse_sql(text: str, catalog: SchemaCatalog) -> SqlAst:
    """Parse and resolve one full statement; fails rather than guessing."""
    tokens = lex(text)
    if not tokens:
        raise SqlSyntaxError("empty statement")
    outcome = Parser(tokens, prefix_mode=False).parse_statement()
    assert outcome.ast is not None and outcome.complete
    resolve_refs(outcome, catalog)
    return outcome.ast
