"""Incremental prefix-validity checking for beam-search gating.

A checker consumes arbitrary text fragments (which may split SQL lexemes)
and reports per-feed whether the accumulated prefix can still extend to a
valid query. Rejection is latched: once a prefix is judged dead, every
extension is dead too, which makes beam pruning trivially correct.

The state is deliberately tiny (the accumulated buffer plus a status
latch); each feed re-lexes and re-parses the buffer. Queries are short,
so the quadratic worst case is irrelevant and fragmentation invariance
and fork equivalence hold by construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .catalog import SchemaCatalog
from .errors import ConfigAfterFeed, ResolutionError, SqlSyntaxError
from .sql.lexer import KEYWORDS, SqlToken, lex_incremental
from .sql.parser import (
    ColumnRefRecord,
    ParseOutcome,
    Parser,
    Scope,
    _lookup_qualifier,
    _scope_tables,
    resolve_refs,
)

CHECK_LEVELS = ("lexical", "grammatical", "schema")


class Verdict(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    COMPLETE = "complete"


class Status(enum.Enum):
    OPEN = "open"
    COMPLETE = "complete"
    DEAD = "dead"


@dataclass
class CheckerState:
    catalog: SchemaCatalog
    level: str = "schema"
    buffer: str = ""
    status: Status = Status.OPEN
    fed: bool = False

    def fork(self) -> "CheckerState":
        """Independent copy; the catalog is immutable and stays shared."""
        return CheckerState(self.catalog, self.level, self.buffer, self.status, self.fed)


def new_checker(catalog: SchemaCatalog, level: str = "schema") -> CheckerState:
    if level not in CHECK_LEVELS:
        raise ValueError(f"unknown check level {level!r}")
    return CheckerState(catalog=catalog, level=level)


def check_level(state: CheckerState, level: str) -> CheckerState:
    """Set strictness; only allowed before the first feed."""
    if state.fed:
        raise ConfigAfterFeed("check level must be set before feeding")
    if level not in CHECK_LEVELS:
        raise ValueError(f"unknown check level {level!r}")
    state.level = level
    return state


def fork(state: CheckerState) -> CheckerState:
    return state.fork()


def feed(state: CheckerState, piece: str) -> Verdict:
    """Consume a fragment and judge the accumulated prefix."""
    state.fed = True
    if state.status is Status.DEAD:
        return Verdict.REJECT
    state.buffer += piece
    verdict = _judge(state.catalog, state.buffer, state.level)
    if verdict is Verdict.REJECT:
        state.status = Status.DEAD
    elif verdict is Verdict.COMPLETE:
        state.status = Status.COMPLETE
    else:
        state.status = Status.OPEN
    return verdict


def _judge(catalog: SchemaCatalog, buffer: str, level: str) -> Verdict:
    tokens, open_last = lex_incremental(buffer)
    if not tokens:
        return Verdict.ACCEPT

    if level == "lexical":
        unterminated = open_last and tokens[-1].lexeme[:1] in "'\""
        return Verdict.ACCEPT if unterminated else Verdict.COMPLETE

    # Read the buffer as final: if it already forms a whole valid query,
    # the verdict is Complete regardless of the trailing token being
    # extensible.
    full = Parser(list(tokens), prefix_mode=False)
    try:
        outcome = full.parse_statement()
        if level == "schema":
            resolve_refs(outcome, catalog)
        return Verdict.COMPLETE
    except (SqlSyntaxError, ResolutionError):
        pass

    # Otherwise judge viability of the settled part. The final token is
    # only settled once a delimiter follows it.
    settled = tokens[:-1] if open_last else tokens
    open_token = tokens[-1] if open_last else None

    outcome = _prefix_parse(settled)
    if outcome is None:
        return Verdict.REJECT
    last_settled = settled[-1] if (settled and open_token is None) else None
    if level == "schema" and not _refs_viable(
        catalog, outcome, open_token=None, last_token=last_settled
    ):
        return Verdict.REJECT

    if open_token is None:
        return Verdict.ACCEPT

    if open_token.lexeme[:1] in "'\"":
        return Verdict.ACCEPT  # unterminated string literal
    word = open_token.lexeme.lower()
    if any(kw.startswith(word) for kw in KEYWORDS):
        return Verdict.ACCEPT
    # Re-parse with the open token included; name checks for it switch to
    # prefix matching since more characters may arrive.
    outcome = _prefix_parse(list(tokens))
    if outcome is None:
        return Verdict.REJECT
    if level == "schema" and not _refs_viable(
        catalog, outcome, open_token=open_token, last_token=tokens[-1]
    ):
        return Verdict.REJECT
    return Verdict.ACCEPT


def _prefix_parse(tokens: list[SqlToken]) -> ParseOutcome | None:
    try:
        return Parser(tokens, prefix_mode=True).parse_statement()
    except (SqlSyntaxError, ResolutionError):
        return None


def _refs_viable(
    catalog: SchemaCatalog,
    outcome: ParseOutcome,
    open_token: SqlToken | None,
    last_token: SqlToken | None = None,
) -> bool:
    for rec in outcome.table_refs:
        if rec.token is open_token:
            low = rec.name.lower()
            if not any(t.name.lower().startswith(low) for t in catalog.tables):
                return False
        elif not catalog.has_table(rec.name):
            return False
    for rec in outcome.column_refs:
        # a bare identifier ending the buffer may yet turn into a
        # "qualifier." form: either its FROM is unsettled and the alias
        # comes later, or it already prefixes a visible alias or table
        if rec.token is last_token and rec.ref.qualifier is None:
            if not all(sc.from_complete for sc in rec.scope.chain()):
                continue
            if _qualifier_prefix(rec.scope, rec.ref.column):
                continue
        if not _column_viable(catalog, rec, prefix=rec.token is open_token):
            return False
    return True


def _qualifier_prefix(scope: Scope, word: str) -> bool:
    low = word.lower()
    for sc in scope.chain():
        names = list(sc.tables) + list(sc.aliases) + list(sc.subquery_tables)
        if any(n.lower().startswith(low) for n in names):
            return True
    return False


def _column_viable(catalog: SchemaCatalog, rec: ColumnRefRecord, prefix: bool) -> bool:
    ref = rec.ref
    if ref.is_star:
        return True

    def matches(table_name: str) -> bool:
        tab = catalog.table(table_name)
        if tab is None:
            return False
        if prefix:
            low = ref.column.lower()
            return any(c.name.lower().startswith(low) for c in tab.columns)
        return tab.has_column(ref.column)

    chain_settled = all(sc.from_complete for sc in rec.scope.chain())
    if ref.qualifier is not None:
        found = _lookup_qualifier(rec.scope, ref.qualifier)
        if found is not None:
            return any(matches(name) for name in found[1])
        if chain_settled:
            return False  # qualifier can no longer be bound by a later alias
        return _anywhere(catalog, ref.column, prefix)
    if chain_settled:
        return any(matches(name) for name in _scope_tables(rec.scope))
    # FROM not seen yet: the column must at least exist somewhere in the
    # catalog, the strongest check available before scope is known.
    return _anywhere(catalog, ref.column, prefix)


def _anywhere(catalog: SchemaCatalog, column: str, prefix: bool) -> bool:
    low = column.lower()
    if prefix:
        return any(
            c.name.lower().startswith(low) for t in catalog.tables for c in t.columns
        )
    return catalog.column_exists_anywhere(column)
