"""Orderless clause normalization used by exact set matching.

A ClauseSet is a frozen, hashable digest of a resolved AST: aliases are
substituted away, identifier case is folded, commutative collections
become multisets, and ORDER BY keeps its order because it is the one
semantically ordered clause.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .ast import (
    ColUnit,
    CondUnit,
    Literal,
    SqlAst,
    SubqueryRef,
    TableRef,
    ValUnit,
)

Multiset = frozenset  # of (item, count) pairs


def _ms(items) -> Multiset:
    return frozenset(Counter(items).items())


@dataclass(frozen=True)
class ClauseSet:
    select_distinct: bool
    select: Multiset
    from_tables: frozenset
    where: Multiset
    where_connectors: Multiset
    group_by: frozenset
    having: Multiset
    having_connectors: Multiset
    order_by: Optional[tuple]
    limit: Optional[int]
    set_op: Optional[tuple]  # (kind, ClauseSet)

    def clause_flags(self, other: "ClauseSet") -> dict[str, bool]:
        """Per-clause equality against ``other``, keyed by clause name."""
        return {
            "select": self.select == other.select
            and self.select_distinct == other.select_distinct,
            "from": self.from_tables == other.from_tables,
            "where": self.where == other.where
            and self.where_connectors == other.where_connectors,
            "group_by": self.group_by == other.group_by,
            "having": self.having == other.having
            and self.having_connectors == other.having_connectors,
            "order_by": self.order_by == other.order_by,
            "limit": self.limit == other.limit,
            "set_op": self.set_op == other.set_op,
        }


def _canon_col(cu: ColUnit) -> tuple:
    ref = cu.col
    if ref.is_star:
        name = "*"
    elif ref.resolved_table:
        name = f"{ref.resolved_table}.{ref.column.lower()}"
    elif ref.qualifier:
        name = f"{ref.qualifier.lower()}.{ref.column.lower()}"
    else:
        name = ref.column.lower()
    return ("col", cu.agg, cu.distinct, name)


def _canon_val_unit(vu: ValUnit) -> tuple:
    if vu.op == "none":
        return _canon_col(vu.left)
    return ("arith", vu.op, _canon_col(vu.left), _canon_col(vu.right))


def _canon_value(val) -> tuple:
    if val is None:
        return ("none",)
    if isinstance(val, Literal):
        if val.is_string:
            return ("str", str(val.value).lower())
        if isinstance(val.value, float):
            return ("num", val.value)
        return ("str", str(val.value).lower())
    if isinstance(val, ColUnit):
        return _canon_col(val)
    if isinstance(val, SqlAst):
        return ("sql", normalize(val))
    if isinstance(val, tuple):  # IN (v1, v2, ...) literal list
        return ("list", frozenset(_canon_value(v) for v in val))
    raise TypeError(f"unexpected value {val!r}")


_NEGATED_CMP = {"=": "!=", "!=": "=", ">": "<=", "<": ">=", ">=": "<", "<=": ">"}


def canon_cond(cond: CondUnit) -> tuple:
    not_op, op = cond.not_op, cond.op
    if not_op and op in _NEGATED_CMP:
        not_op, op = False, _NEGATED_CMP[op]
    return (
        not_op,
        op,
        _canon_val_unit(cond.val_unit),
        _canon_value(cond.val1),
        _canon_value(cond.val2),
    )


def _connectors(condition: list) -> list[str]:
    return [c for c in condition if isinstance(c, str)]


def normalize(ast: SqlAst) -> ClauseSet:
    """Fold a resolved AST into its orderless comparable form.

    JOIN ... ON conditions are merged into the WHERE conjunct multiset so
    explicit joins and comma-joins with WHERE equalities compare equal.
    """
    tables = []
    for item in ast.from_items:
        if isinstance(item, TableRef):
            tables.append(item.name.lower())
        elif isinstance(item, SubqueryRef):
            tables.append(("sql", normalize(item.query)))
    where_conds = [canon_cond(c) for c in ast.iter_conds("where")]
    where_conds += [canon_cond(c) for c in ast.iter_conds("join")]
    where_connectors = _connectors(ast.where) + _connectors(ast.join_conds)
    # folding ON conjuncts into WHERE implicitly joins the two groups, and
    # each extra ON conjunct, with 'and'; count those so an explicit join
    # and its comma-join rewrite compare equal
    n_join = sum(1 for _ in ast.iter_conds("join"))
    n_where = sum(1 for _ in ast.iter_conds("where"))
    if n_join:
        where_connectors = list(where_connectors) + ["and"] * (1 if n_where else 0)
    order_by = None
    if ast.order_by is not None:
        order_by = (
            ast.order_by.direction,
            tuple(_canon_val_unit(v) for v in ast.order_by.items),
        )
    set_op = None
    if ast.set_op is not None:
        set_op = (ast.set_op[0], normalize(ast.set_op[1]))
    return ClauseSet(
        select_distinct=ast.select_distinct,
        select=_ms((item.agg, _canon_val_unit(item.val)) for item in ast.select),
        from_tables=frozenset(tables),
        where=_ms(where_conds),
        where_connectors=_ms(where_connectors),
        group_by=frozenset(_canon_col(c) for c in ast.group_by),
        having=_ms(canon_cond(c) for c in ast.iter_conds("having")),
        having_connectors=_ms(_connectors(ast.having)),
        order_by=order_by,
        limit=ast.limit,
        set_op=set_op,
    )


# -- canonical renderer (debugging / round-trip checks) ---------------------


def _render_col(cu: ColUnit) -> str:
    ref = cu.col
    if ref.is_star:
        name = "*"
    else:
        owner = ref.resolved_table or (ref.qualifier.lower() if ref.qualifier else None)
        name = f"{owner}.{ref.column.lower()}" if owner else ref.column.lower()
    if cu.agg != "none":
        inner = f"distinct {name}" if cu.distinct else name
        return f"{cu.agg}({inner})"
    if cu.distinct:
        return f"distinct {name}"
    return name


def _render_val_unit(vu: ValUnit) -> str:
    if vu.op == "none":
        return _render_col(vu.left)
    return f"{_render_col(vu.left)} {vu.op} {_render_col(vu.right)}"


def _render_value(val) -> str:
    if isinstance(val, Literal):
        if val.is_string:
            return "'" + str(val.value) + "'"
        value = val.value
        if isinstance(value, float) and value == int(value):
            return str(int(value))
        return str(value)
    if isinstance(val, ColUnit):
        return _render_col(val)
    if isinstance(val, SqlAst):
        return "(" + render(val) + ")"
    if isinstance(val, tuple):
        return "(" + ", ".join(_render_value(v) for v in val) + ")"
    raise TypeError(f"unexpected value {val!r}")


def _render_cond_unit(cond: CondUnit) -> str:
    lhs = _render_val_unit(cond.val_unit)
    op = cond.op
    if op == "between":
        head = f"{lhs} not between" if cond.not_op else f"{lhs} between"
        return f"{head} {_render_value(cond.val1)} and {_render_value(cond.val2)}"
    if op == "is":
        return f"{lhs} is not null" if cond.not_op else f"{lhs} is null"
    if op == "exists":
        head = "not exists" if cond.not_op else "exists"
        return f"{head} {_render_value(cond.val1)}"
    if op in ("in", "like"):
        if isinstance(cond.val1, SqlAst) and op == "in":
            rhs = "(" + render(cond.val1) + ")"
        else:
            rhs = _render_value(cond.val1)
        head = f"{lhs} not {op}" if cond.not_op else f"{lhs} {op}"
        return f"{head} {rhs}"
    if cond.not_op:
        op = {"=": "!=", "!=": "=", ">": "<=", "<": ">=", ">=": "<", "<=": ">"}[op]
    return f"{lhs} {op} {_render_value(cond.val1)}"


def _render_condition(condition: list) -> str:
    parts = []
    for entry in condition:
        parts.append(entry if isinstance(entry, str) else _render_cond_unit(entry))
    return " ".join(parts)


def render(ast: SqlAst) -> str:
    """Emit normalized SQL text for an AST; parseable by this dialect."""
    items = []
    for item in ast.select:
        body = _render_val_unit(item.val)
        items.append(f"{item.agg}({body})" if item.agg != "none" else body)
    distinct = "distinct " if ast.select_distinct else ""
    sql = f"select {distinct}{', '.join(items)}"

    sources = []
    for item in ast.from_items:
        if isinstance(item, TableRef):
            name = item.name.lower()
            sources.append(f"{name} as {item.alias.lower()}" if item.alias else name)
        else:
            inner = "(" + render(item.query) + ")"
            sources.append(f"{inner} as {item.alias.lower()}" if item.alias else inner)
    sql += " from " + ", ".join(sources)

    where = ast.where
    if ast.join_conds:
        joined = list(ast.join_conds)
        if where:
            joined += ["and"] + list(where)
        where = joined
    if where:
        sql += " where " + _render_condition(where)
    if ast.group_by:
        sql += " group by " + ", ".join(_render_col(c) for c in ast.group_by)
    if ast.having:
        sql += " having " + _render_condition(ast.having)
    if ast.order_by is not None:
        cols = ", ".join(_render_val_unit(v) for v in ast.order_by.items)
        sql += f" order by {cols} {ast.order_by.direction}"
    if ast.limit is not None:
        sql += f" limit {ast.limit}"
    if ast.set_op is not None:
        sql += f" {ast.set_op[0]} " + render(ast.set_op[1])
    return sql
