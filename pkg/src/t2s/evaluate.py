"""Exact Set Match and Execution Accuracy over (gold, predicted) pairs."""

from __future__ import annotations

import json
import sqlite3
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import SchemaCatalog
from .errors import AlignmentError, DbUnavailable, GoldParseError, T2SError
from .sql.lexer import lex
from .sql.normalize import normalize
from .sql.parser import parse_sql

CLAUSE_NAMES = ("select", "from", "where", "group_by", "having", "order_by", "limit", "set_op")

FLOAT_TOLERANCE = 1e-6
DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class EvalExample:
    question: str
    db_id: str
    gold_sql: str


@dataclass
class ExecutionResult:
    rows: list[tuple] | None = None
    ordered_rows: list[tuple] | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class EvalScore:
    em: int
    ex: int | None
    per_clause: dict[str, bool]


def exact_match(
    gold: str, pred: str, catalog: SchemaCatalog
) -> tuple[int, dict[str, bool]]:
    """Clause-wise orderless equality of normalized parses.

    An unparseable prediction scores 0 with every clause flagged false; a
    gold query that fails to parse is a corpus defect and raises.
    """
    try:
        gold_ast = parse_sql(gold, catalog)
    except T2SError as exc:
        raise GoldParseError(f"gold query does not parse: {exc}") from exc
    try:
        pred_ast = parse_sql(pred, catalog)
    except T2SError:
        return 0, {name: False for name in CLAUSE_NAMES}
    flags = normalize(gold_ast).clause_flags(normalize(pred_ast))
    return (1 if all(flags.values()) else 0), flags


def _canon_cell(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return round(value, 6)
    if isinstance(value, int):
        return float(value) if abs(value) < 2**52 else value
    return value


def _canon_row(row: tuple) -> tuple:
    return tuple(_canon_cell(v) for v in row)


def execute(
    sql: str, db_path: str | Path, timeout: float = DEFAULT_TIMEOUT
) -> ExecutionResult:
    """Run ``sql`` read-only; execution failures are captured, never thrown."""
    path = Path(db_path)
    if not path.exists():
        raise DbUnavailable(f"database file not found: {path}")
    try:
        conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
    except sqlite3.Error as exc:
        raise DbUnavailable(str(exc)) from exc
    conn.text_factory = lambda b: b.decode("utf-8", errors="replace")
    timer = threading.Timer(timeout, conn.interrupt)
    timer.start()
    try:
        cursor = conn.execute(sql)
        rows = [_canon_row(r) for r in cursor.fetchall()]
    except sqlite3.Error as exc:
        return ExecutionResult(error=str(exc))
    finally:
        timer.cancel()
        conn.close()
    result = ExecutionResult(rows=rows)
    if _has_top_level_order_by(sql):
        result.ordered_rows = rows
    return result


def _has_top_level_order_by(sql: str) -> bool:
    depth = 0
    for tok in lex(sql):
        if tok.lexeme == "(":
            depth += 1
        elif tok.lexeme == ")":
            depth -= 1
        elif depth == 0 and tok.kind == "keyword" and tok.lower == "order":
            return True
    return False


def _rows_equal_ordered(a: list[tuple], b: list[tuple]) -> bool:
    return len(a) == len(b) and all(_row_eq(x, y) for x, y in zip(a, b))


def _row_eq(x: tuple, y: tuple) -> bool:
    if len(x) != len(y):
        return False
    for u, v in zip(x, y):
        if isinstance(u, float) and isinstance(v, float):
            if abs(u - v) > FLOAT_TOLERANCE:
                return False
        elif u != v:
            return False
    return True


def results_equivalent(gold: ExecutionResult, pred: ExecutionResult) -> bool:
    """Bag equality, else ordered-list equality when gold carries ORDER BY."""
    if gold.failed or pred.failed:
        return False
    if gold.ordered_rows is not None:
        return _rows_equal_ordered(gold.ordered_rows, pred.rows or [])
    return Counter(gold.rows or []) == Counter(pred.rows or [])


def execution_match(
    gold: str, pred: str, db_path: str | Path, timeout: float = DEFAULT_TIMEOUT
) -> int:
    gold_res = execute(gold, db_path, timeout=timeout)
    pred_res = execute(pred, db_path, timeout=timeout)
    return 1 if results_equivalent(gold_res, pred_res) else 0


# -- corpus-level ------------------------------------------------------------


@dataclass
class ExampleRecord:
    index: int
    db_id: str
    question: str
    gold: str
    pred: str
    em: int
    ex: int | None
    per_clause: dict[str, bool]

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "db_id": self.db_id,
            "question": self.question,
            "gold": self.gold,
            "pred": self.pred,
            "em": self.em,
            "ex": self.ex,
            "per_clause": self.per_clause,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExampleRecord":
        return cls(**{k: data[k] for k in (
            "index", "db_id", "question", "gold", "pred", "em", "ex", "per_clause")})


@dataclass
class Report:
    total: int
    em_pct: float
    ex_pct: float | None
    records: list[ExampleRecord] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "em": self.em_pct,
            "ex": self.ex_pct,
            "records": [r.to_json() for r in self.records],
        }

    def to_table(self) -> str:
        lines = ["metric  value", "------  -----", f"EM      {self.em_pct:5.1f}"]
        if self.ex_pct is not None:
            lines.append(f"EX      {self.ex_pct:5.1f}")
        lines.append(f"total   {self.total:5d}")
        return "\n".join(lines)


def _pct(hits: int, total: int) -> float:
    return round(100.0 * hits / total, 1) if total else 0.0


def evaluate_corpus(
    examples: list[EvalExample],
    predictions: list[str],
    catalogs: dict[str, SchemaCatalog],
    db_paths: dict[str, Path] | None = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> Report:
    """Score aligned predictions; EX is skipped when no databases are given."""
    if len(examples) != len(predictions):
        raise AlignmentError(
            f"{len(predictions)} predictions for {len(examples)} examples"
        )
    records: list[ExampleRecord] = []
    em_hits = 0
    ex_hits = 0
    with_ex = db_paths is not None
    for idx, (example, pred) in enumerate(zip(examples, predictions)):
        catalog = catalogs.get(example.db_id)
        if catalog is None:
            raise AlignmentError(f"example {idx}: unknown db_id {example.db_id!r}")
        em, per_clause = exact_match(example.gold_sql, pred, catalog)
        ex: int | None = None
        if with_ex:
            db_path = db_paths.get(example.db_id)
            if db_path is None:
                raise DbUnavailable(f"no database for db_id {example.db_id!r}")
            ex = execution_match(example.gold_sql, pred, db_path, timeout=timeout)
            ex_hits += ex
        em_hits += em
        records.append(
            ExampleRecord(idx, example.db_id, example.question, example.gold_sql,
                          pred, em, ex, per_clause)
        )
    return Report(
        total=len(examples),
        em_pct=_pct(em_hits, len(examples)),
        ex_pct=_pct(ex_hits, len(examples)) if with_ex else None,
        records=records,
    )


def load_examples(path: str | Path) -> list[EvalExample]:
    """Read the Spider example file: JSON array of question/query/db_id."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [EvalExample(e["question"], e["db_id"], e["query"]) for e in data]


def load_predictions(path: str | Path) -> list[str]:
    """One SQL text per line, index-aligned with the examples file."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines
