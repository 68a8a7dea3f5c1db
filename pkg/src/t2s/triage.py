"""Heuristic failure-taxonomy classification for incorrect predictions.

Each failed (gold, pred) pair receives exactly one label, decided by a
fixed precedence: parse failures first, the mechanical false-negative
signal second, then structural differences by decreasing specificity,
with a residual complex bucket guaranteeing totality.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

from .catalog import SchemaCatalog
from .errors import NotAFailure, T2SError
from .evaluate import ExampleRecord, ExecutionResult, results_equivalent
from .sql.ast import SqlAst
from .sql.normalize import ClauseSet, normalize
from .sql.parser import parse_sql


class FailureCategory(enum.Enum):
    INCOMPLETE_SQL = "Incomplete SQL"
    POSSIBLE_FALSE_NEGATIVE = "False Negatives"
    FOREIGN_KEYS = "Foreign Keys"
    LOGICAL_ERROR = "Logical Errors"
    DK_AGGREGATION = "DK - Incorrect AGG"
    DK_TABLE = "DK - Incorrect Table"
    DK_COLUMN = "DK - Incorrect Column"
    DK_VALUE = "DK - Incorrect Value"
    DK_COMPLEX = "DK - Complex"


# Report row order; matches the published breakdown table.
CATEGORY_ORDER = (
    FailureCategory.INCOMPLETE_SQL,
    FailureCategory.POSSIBLE_FALSE_NEGATIVE,
    FailureCategory.FOREIGN_KEYS,
    FailureCategory.LOGICAL_ERROR,
    FailureCategory.DK_AGGREGATION,
    FailureCategory.DK_TABLE,
    FailureCategory.DK_COLUMN,
    FailureCategory.DK_VALUE,
    FailureCategory.DK_COMPLEX,
)


@dataclass(frozen=True)
class FailureLabel:
    category: FailureCategory
    evidence: str


def _join_pairs(ast: SqlAst, cs: ClauseSet) -> frozenset:
    """Column pairs equated by join conditions (ON or column=column WHERE)."""
    pairs = set()
    for canon, _count in cs.where:
        not_op, op, lhs, val1, _ = canon
        if not_op or op != "=":
            continue
        if (
            isinstance(lhs, tuple)
            and lhs[0] == "col"
            and isinstance(val1, tuple)
            and val1 and val1[0] == "col"
        ):
            pairs.add(frozenset((lhs[3], val1[3])))
    return frozenset(pairs)


def _agg_multiset(cs: ClauseSet) -> frozenset:
    aggs = []
    for (agg, val), count in cs.select:
        inner = val[1] if val and val[0] == "col" else "none"
        effective = agg if agg != "none" else inner
        aggs.extend([effective] * count)
    for (not_op, op, lhs, *_), count in cs.having:
        if lhs and lhs[0] == "col":
            aggs.extend([lhs[1]] * count)
    return frozenset(Counter(aggs).items())


def _plain_columns(cs: ClauseSet) -> frozenset:
    """Non-aggregated column names in SELECT, WHERE or ORDER BY."""
    cols = set()
    for (agg, val), _count in cs.select:
        if agg == "none" and val and val[0] == "col" and val[1] == "none":
            cols.add(val[3])
    for (not_op, op, lhs, val1, val2), _count in cs.where:
        if lhs and lhs[0] == "col" and lhs[1] == "none":
            cols.add(lhs[3])
        for val in (val1, val2):
            if isinstance(val, tuple) and val and val[0] == "col" and val[1] == "none":
                cols.add(val[3])
    if cs.order_by is not None:
        for val in cs.order_by[1]:
            if val and val[0] == "col" and val[1] == "none":
                cols.add(val[3])
    return frozenset(cols)


def _value_blind(cs: ClauseSet) -> tuple:
    """Condition structure with literal values masked out."""

    def mask(val):
        if isinstance(val, tuple) and val and val[0] in ("str", "num", "list"):
            return ("value",)
        return val

    def blind(conds):
        return frozenset(
            ((not_op, op, lhs, mask(v1), mask(v2)), count)
            for (not_op, op, lhs, v1, v2), count in conds
        )

    return (blind(cs.where), blind(cs.having))


def _literal_values(cs: ClauseSet) -> frozenset:
    values = set()
    for (not_op, op, lhs, v1, v2), _count in list(cs.where) + list(cs.having):
        for val in (v1, v2):
            if isinstance(val, tuple) and val and val[0] in ("str", "num"):
                values.add(val)
    return frozenset(values)


def _order_signature(cs: ClauseSet) -> tuple:
    return (cs.order_by, cs.limit)


def _comparison_ops(cs: ClauseSet) -> frozenset:
    # polarity counts: IN vs NOT IN is an operator-level difference
    ops = []
    for (not_op, op, *_), count in list(cs.where) + list(cs.having):
        ops.extend([(not_op, op)] * count)
    return frozenset(Counter(ops).items())


def classify(
    gold: str,
    pred: str,
    catalog: SchemaCatalog,
    gold_exec: ExecutionResult | None = None,
    pred_exec: ExecutionResult | None = None,
) -> FailureLabel:
    """Label one failed pair; raises NotAFailure if the pair is correct."""
    try:
        gold_ast = parse_sql(gold, catalog)
    except T2SError as exc:
        raise NotAFailure(f"gold query does not parse: {exc}") from exc
    gold_cs = normalize(gold_ast)

    try:
        pred_ast = parse_sql(pred, catalog)
    except T2SError as exc:
        return FailureLabel(
            FailureCategory.INCOMPLETE_SQL,
            f"prediction does not parse: {exc}",
        )
    pred_cs = normalize(pred_ast)

    em = 1 if gold_cs == pred_cs else 0
    ex: int | None = None
    if gold_exec is not None and pred_exec is not None:
        ex = 1 if results_equivalent(gold_exec, pred_exec) else 0

    if em == 1 and ex != 0:
        raise NotAFailure("prediction matches gold clause-for-clause")

    if em == 0 and ex == 1:
        return FailureLabel(
            FailureCategory.POSSIBLE_FALSE_NEGATIVE,
            "execution results match but clause sets differ; review by hand",
        )

    gold_joins, pred_joins = _join_pairs(gold_ast, gold_cs), _join_pairs(pred_ast, pred_cs)
    if gold_joins != pred_joins:
        return FailureLabel(
            FailureCategory.FOREIGN_KEYS,
            f"join column pairs differ: gold {sorted(map(sorted, gold_joins))} "
            f"vs pred {sorted(map(sorted, pred_joins))}",
        )

    gold_aggs, pred_aggs = _agg_multiset(gold_cs), _agg_multiset(pred_cs)
    if gold_aggs != pred_aggs:
        return FailureLabel(
            FailureCategory.DK_AGGREGATION,
            f"aggregator multisets differ: gold {sorted(gold_aggs)} vs pred {sorted(pred_aggs)}",
        )

    if gold_cs.from_tables != pred_cs.from_tables:
        return FailureLabel(
            FailureCategory.DK_TABLE,
            f"FROM tables differ: gold {sorted(map(str, gold_cs.from_tables))} "
            f"vs pred {sorted(map(str, pred_cs.from_tables))}",
        )

    gold_cols, pred_cols = _plain_columns(gold_cs), _plain_columns(pred_cs)
    if gold_cols != pred_cols:
        return FailureLabel(
            FailureCategory.DK_COLUMN,
            f"SELECT/WHERE columns differ: gold {sorted(gold_cols)} vs pred {sorted(pred_cols)}",
        )

    if _value_blind(gold_cs) == _value_blind(pred_cs) and _literal_values(
        gold_cs
    ) != _literal_values(pred_cs):
        return FailureLabel(
            FailureCategory.DK_VALUE,
            f"predicate structure equal, literals differ: gold {sorted(_literal_values(gold_cs))} "
            f"vs pred {sorted(_literal_values(pred_cs))}",
        )

    order_differs = _order_signature(gold_cs) != _order_signature(pred_cs)
    ops_differ = _comparison_ops(gold_cs) != _comparison_ops(pred_cs)
    rest_equal = (
        gold_cs.select == pred_cs.select
        and gold_cs.from_tables == pred_cs.from_tables
        and gold_cs.group_by == pred_cs.group_by
    )
    if (order_differs or ops_differ) and rest_equal:
        return FailureLabel(
            FailureCategory.LOGICAL_ERROR,
            "ordering direction or comparison polarity differs, all else equal",
        )

    return FailureLabel(
        FailureCategory.DK_COMPLEX,
        "no specific rule matched; structural mix of differences",
    )


@dataclass
class TriageReport:
    counts: dict[FailureCategory, int]
    total: int

    def percentages(self) -> dict[FailureCategory, float]:
        if self.total == 0:
            return {cat: 0.0 for cat in CATEGORY_ORDER}
        return {
            cat: round(100.0 * self.counts.get(cat, 0) / self.total, 1)
            for cat in CATEGORY_ORDER
        }

    def to_json(self) -> dict:
        pct = self.percentages()
        return {
            "total_failures": self.total,
            "categories": [
                {
                    "category": cat.value,
                    "count": self.counts.get(cat, 0),
                    "percentage": pct[cat],
                }
                for cat in CATEGORY_ORDER
            ],
        }

    def to_table(self) -> str:
        pct = self.percentages()
        width = max(len(cat.value) for cat in CATEGORY_ORDER)
        lines = [f"{'Failure Categories':<{width}}  Count  Percentage"]
        for cat in CATEGORY_ORDER:
            lines.append(
                f"{cat.value:<{width}}  {self.counts.get(cat, 0):5d}  {pct[cat]:9.1f}%"
            )
        lines.append(f"{'Total':<{width}}  {self.total:5d}")
        return "\n".join(lines)


def triage_corpus(
    failures: list[tuple[str, str]],
    catalog_for: dict[str, SchemaCatalog] | None = None,
    db_ids: list[str] | None = None,
    catalog: SchemaCatalog | None = None,
    exec_results: list[tuple[ExecutionResult, ExecutionResult]] | None = None,
) -> tuple[TriageReport, list[FailureLabel]]:
    """Classify every failed pair and aggregate the category distribution."""
    labels: list[FailureLabel] = []
    for idx, (gold, pred) in enumerate(failures):
        cat = catalog
        if cat is None:
            assert catalog_for is not None and db_ids is not None
            cat = catalog_for[db_ids[idx]]
        gold_exec = pred_exec = None
        if exec_results is not None:
            gold_exec, pred_exec = exec_results[idx]
        labels.append(classify(gold, pred, cat, gold_exec, pred_exec))
    counts = Counter(label.category for label in labels)
    return TriageReport(dict(counts), len(labels)), labels


def triage_records(
    records: list[ExampleRecord], catalogs: dict[str, SchemaCatalog]
) -> tuple[TriageReport, list[tuple[ExampleRecord, FailureLabel]]]:
    """Triage evaluator output records, keeping only failed examples."""
    annotated: list[tuple[ExampleRecord, FailureLabel]] = []
    for rec in records:
        if rec.em == 1 and rec.ex != 0:
            continue
        if rec.em == 0 and rec.ex == 1:
            label = FailureLabel(
                FailureCategory.POSSIBLE_FALSE_NEGATIVE,
                "execution results match but clause sets differ; review by hand",
            )
        else:
            try:
                label = classify(rec.gold, rec.pred, catalogs[rec.db_id])
            except NotAFailure:
                # EM=1 but EX=0: equal clause sets that execute differently
                # cannot be attributed mechanically.
                label = FailureLabel(
                    FailureCategory.DK_COMPLEX,
                    "clause sets equal yet execution differs",
                )
        annotated.append((rec, label))
    counts = Counter(label.category for _, label in annotated)
    return TriageReport(dict(counts), len(annotated)), annotated
