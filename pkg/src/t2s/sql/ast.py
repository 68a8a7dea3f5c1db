"""AST node types for the Spider SQL dialect."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

AGG_OPS = ("none", "max", "min", "count", "sum", "avg")
ARITH_OPS = ("none", "-", "+", "*", "/")
COND_OPS = ("=", ">", "<", ">=", "<=", "!=", "between", "in", "like", "is", "exists")
SET_OPS = ("intersect", "union", "except")


@dataclass
class ColumnRef:
    qualifier: Optional[str]  # table name or alias as written, None if bare
    column: str  # original-cased column name, or "*"
    resolved_table: Optional[str] = None  # lowercase table name after resolution

    @property
    def is_star(self) -> bool:
        return self.column == "*"


@dataclass
class ColUnit:
    agg: str  # one of AGG_OPS
    distinct: bool
    col: ColumnRef


@dataclass
class ValUnit:
    op: str  # one of ARITH_OPS
    left: ColUnit
    right: Optional[ColUnit] = None


@dataclass
class SelectItem:
    agg: str  # outer aggregator, one of AGG_OPS
    val: ValUnit


@dataclass
class TableRef:
    name: str
    alias: Optional[str] = None


@dataclass
class SubqueryRef:
    query: "SqlAst"
    alias: Optional[str] = None


Value = Union["Literal", ColUnit, "SqlAst"]


@dataclass
class Literal:
    value: Union[str, float]
    is_string: bool


@dataclass
class CondUnit:
    not_op: bool
    op: str  # one of COND_OPS
    val_unit: ValUnit
    val1: Optional[Value] = None
    val2: Optional[Value] = None  # only for BETWEEN


# Flat condition list: CondUnit entries interleaved with "and"/"or".
Condition = list  # list[CondUnit | str]


@dataclass
class OrderBy:
    direction: str  # asc | desc
    items: list[ValUnit] = field(default_factory=list)


@dataclass
class SqlAst:
    select_distinct: bool = False
    select: list[SelectItem] = field(default_factory=list)
    from_items: list[Union[TableRef, SubqueryRef]] = field(default_factory=list)
    join_conds: Condition = field(default_factory=list)
    where: Condition = field(default_factory=list)
    group_by: list[ColUnit] = field(default_factory=list)
    having: Condition = field(default_factory=list)
    order_by: Optional[OrderBy] = None
    limit: Optional[int] = None
    set_op: Optional[tuple[str, "SqlAst"]] = None

    def iter_conds(self, which: str) -> list[CondUnit]:
        conds = {"where": self.where, "having": self.having, "join": self.join_conds}[
            which
        ]
        return [c for c in conds if isinstance(c, CondUnit)]
