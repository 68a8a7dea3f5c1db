"""Flat model-input serialization: baseline, FK markers, descriptions, anchors.

The layout follows the PICARD-style linearization:

    question | db_id | table : col, col, ... | table : ...

Schema identifiers are emitted lowercased (matching that preprocessing);
the question is preserved verbatim. FK markers insert ``foreign key
<table>`` directly after the qualifying column, descriptions follow a
bare ``description`` marker, and anchor values are appended after their
column in ``col ( value , value )`` form.
"""

from __future__ import annotations

import json
import re
import sqlite3
from dataclasses import dataclass
from pathlib import Path

from .catalog import RelationKind, SchemaCatalog
from .errors import DbUnavailable, EmptyQuestion, ParseError, UnknownEntity

SCHEMES = ("baseline", "fk", "sd")


@dataclass(frozen=True)
class Piece:
    kind: str  # question | db_id | table | column | fk_marker | description | anchor
    text: str
    sep: str  # separator preceding this piece ("" for the first)
    table: str | None = None
    column: str | None = None


@dataclass(frozen=True)
class Segment:
    kind: str
    start: int
    end: int


@dataclass(frozen=True)
class SerializedInput:
    scheme: str
    pieces: tuple[Piece, ...]

    @property
    def text(self) -> str:
        return "".join(p.sep + p.text for p in self.pieces)

    @property
    def segments(self) -> tuple[Segment, ...]:
        out = []
        offset = 0
        for p in self.pieces:
            offset += len(p.sep)
            out.append(Segment(p.kind, offset, offset + len(p.text)))
            offset += len(p.text)
        return tuple(out)


@dataclass(frozen=True)
class AnchorMatch:
    question_span: tuple[int, int]
    table: str
    column: str
    cell_value: str
    score: float


@dataclass(frozen=True)
class AnchorConfig:
    threshold: float = 0.85
    max_per_column: int = 2
    max_cells_per_column: int = 5000

    def __post_init__(self):
        if not 0 < self.threshold <= 1:
            raise ValueError("anchor threshold must lie in (0, 1]")


class DescriptionStore:
    """Human-authored table/column descriptions, keyed per database.

    File format: JSON mapping db_id -> {"tables": {table: text},
    "columns": {"table.column": text}}.
    """

    def __init__(self, data: dict[str, dict] | None = None):
        self._data = data or {}

    @classmethod
    def load(cls, path: str | Path) -> "DescriptionStore":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ParseError(f"{path}: expected an object keyed by db_id")
        return cls(data)

    def table_description(self, db_id: str, table: str) -> str | None:
        entry = self._data.get(db_id, {})
        for name, text in entry.get("tables", {}).items():
            if name.lower() == table.lower():
                return text
        return None

    def column_description(self, db_id: str, table: str, column: str) -> str | None:
        entry = self._data.get(db_id, {})
        want = f"{table}.{column}".lower()
        for key, text in entry.get("columns", {}).items():
            if key.lower() == want:
                return text
        return None

    def validate(self, db_id: str, catalog: SchemaCatalog) -> None:
        """Raise UnknownEntity for any described entity missing from the catalog."""
        entry = self._data.get(db_id, {})
        for name in entry.get("tables", {}):
            if not catalog.has_table(name):
                raise UnknownEntity(f"{db_id}: described table {name!r} not in catalog")
        for key in entry.get("columns", {}):
            table, _, column = key.partition(".")
            tab = catalog.table(table)
            if tab is None or not tab.has_column(column):
                raise UnknownEntity(f"{db_id}: described column {key!r} not in catalog")


def _check_question(question: str) -> None:
    if not question or not question.strip():
        raise EmptyQuestion("question must be non-empty")


def _fk_markers(catalog: SchemaCatalog) -> dict[tuple[str, str], list[str]]:
    """Map (table, column) -> referenced table names that earn a marker.

    One-to-many keys mark only the many-side column. One-to-one keys mark
    both columns when both ends are their tables' sole primary keys, and
    only the non-primary-key end otherwise.
    """
    markers: dict[tuple[str, str], list[str]] = {}

    def add(table: str, column: str, referenced: str) -> None:
        markers.setdefault((table.lower(), column.lower()), []).append(referenced.lower())

    for fk in catalog.foreign_keys:
        if fk.kind is RelationKind.ONE_TO_MANY:
            add(fk.from_table, fk.from_column, fk.to_table)
            continue
        to_tab = catalog.table(fk.to_table)
        if to_tab is not None and to_tab.is_sole_primary_key(fk.to_column):
            add(fk.from_table, fk.from_column, fk.to_table)
            add(fk.to_table, fk.to_column, fk.from_table)
        else:
            add(fk.to_table, fk.to_column, fk.from_table)
    return markers


def _schema_pieces(
    question: str,
    catalog: SchemaCatalog,
    markers: dict[tuple[str, str], list[str]] | None = None,
) -> list[Piece]:
    pieces = [Piece("question", question, "")]
    pieces.append(Piece("db_id", catalog.db_id.lower(), " | "))
    for tab in catalog.tables:
        tab_low = tab.name.lower()
        pieces.append(Piece("table", tab_low, " | ", table=tab_low))
        sep = " : "
        for col in tab.columns:
            col_low = col.name.lower()
            pieces.append(Piece("column", col_low, sep, table=tab_low, column=col_low))
            sep = ", "
            if markers:
                for referenced in markers.get((tab_low, col_low), ()):
                    pieces.append(
                        Piece(
                            "fk_marker",
                            f"foreign key {referenced}",
                            " ",
                            table=tab_low,
                            column=col_low,
                        )
                    )
    return pieces


def serialize_baseline(question: str, catalog: SchemaCatalog) -> SerializedInput:
    _check_question(question)
    return SerializedInput("baseline", tuple(_schema_pieces(question, catalog)))


def serialize_fk(question: str, catalog: SchemaCatalog) -> SerializedInput:
    _check_question(question)
    pieces = _schema_pieces(question, catalog, markers=_fk_markers(catalog))
    return SerializedInput("fk", tuple(pieces))


def serialize_sd(
    question: str, catalog: SchemaCatalog, store: DescriptionStore
) -> SerializedInput:
    _check_question(question)
    store.validate(catalog.db_id, catalog)
    pieces = _schema_pieces(question, catalog)
    # A bare marker is always emitted so the scheme stays recoverable from
    # the text alone, even when the store has nothing for this db.
    pieces.append(Piece("description", "description", " | "))
    for tab in catalog.tables:
        tab_low = tab.name.lower()
        tab_desc = store.table_description(catalog.db_id, tab.name)
        col_descs = [
            (col.name.lower(), store.column_description(catalog.db_id, tab.name, col.name))
            for col in tab.columns
        ]
        col_descs = [(name, text) for name, text in col_descs if text]
        if tab_desc is None and not col_descs:
            continue
        # Table header carries its description when there is one; otherwise
        # it just anchors the column descriptions that follow.
        head = f"{tab_low} : {tab_desc}" if tab_desc else tab_low
        pieces.append(Piece("description", head, " | ", table=tab_low))
        for name, text in col_descs:
            pieces.append(
                Piece("description", f"{name} : {text}", ", ", table=tab_low, column=name)
            )
    return SerializedInput("sd", tuple(pieces))


# -- anchor extraction -------------------------------------------------------


_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")


def _normalize_text(text: str) -> str:
    return " ".join(_TOKEN_RE.findall(text.lower()))


def _lcs_length(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ch_a in a:
        cur = [0]
        for j, ch_b in enumerate(b):
            cur.append(prev[j] + 1 if ch_a == ch_b else max(prev[j + 1], cur[-1]))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """Normalized LCS ratio over lowercased, punctuation-stripped text."""
    na, nb = _normalize_text(a), _normalize_text(b)
    if not na or not nb:
        return 0.0
    return 2.0 * _lcs_length(na, nb) / (len(na) + len(nb))


def _question_spans(question: str, max_words: int) -> list[tuple[int, int]]:
    words = [(m.start(), m.end()) for m in re.finditer(r"\S+", question)]
    spans = []
    for i in range(len(words)):
        for n in range(1, max_words + 1):
            if i + n > len(words):
                break
            spans.append((words[i][0], words[i + n - 1][1]))
    return spans


def extract_anchors(
    question: str,
    catalog: SchemaCatalog,
    db_path: str | Path,
    config: AnchorConfig = AnchorConfig(),
) -> list[AnchorMatch]:
    """Fuzzy-match question spans against text cells of the database.

    Only text-typed columns are scanned; numeric columns flood matches.
    Results are sorted by descending score then question position, capped
    at ``max_per_column`` matches per column.
    """
    path = Path(db_path)
    if not path.exists():
        raise DbUnavailable(f"database file not found: {path}")
    try:
        conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
    except sqlite3.Error as exc:
        raise DbUnavailable(str(exc)) from exc

    matches: list[AnchorMatch] = []
    try:
        for tab in catalog.tables:
            for col in tab.columns:
                if col.value_type != "text":
                    continue
                try:
                    cur = conn.execute(
                        f'SELECT DISTINCT "{col.name}" FROM "{tab.name}" LIMIT ?',
                        (config.max_cells_per_column,),
                    )
                    cells = [row[0] for row in cur.fetchall()]
                except sqlite3.Error:
                    continue  # table present in catalog but absent from the file
                best: list[AnchorMatch] = []
                for cell in cells:
                    if not isinstance(cell, str) or not cell.strip():
                        continue
                    cell_words = max(1, len(cell.split()))
                    top_score, top_span = 0.0, None
                    for span in _question_spans(question, cell_words + 1):
                        score = similarity(question[span[0] : span[1]], cell)
                        if score > top_score:
                            top_score, top_span = score, span
                    if top_span is not None and top_score >= config.threshold:
                        best.append(
                            AnchorMatch(
                                question_span=top_span,
                                table=tab.name.lower(),
                                column=col.name.lower(),
                                cell_value=cell,
                                score=round(top_score, 6),
                            )
                        )
                best.sort(key=lambda m: (-m.score, m.question_span))
                matches.extend(best[: config.max_per_column])
    finally:
        conn.close()
    matches.sort(key=lambda m: (-m.score, m.question_span))
    return matches


def attach_anchors(
    serialized: SerializedInput, anchors: list[AnchorMatch]
) -> SerializedInput:
    """Append matched cell values after their columns as ``( v1 , v2 )``."""
    if not anchors:
        return serialized
    by_column: dict[tuple[str, str], list[AnchorMatch]] = {}
    for anchor in sorted(anchors, key=lambda m: (-m.score, m.question_span)):
        by_column.setdefault((anchor.table, anchor.column), []).append(anchor)

    pieces: list[Piece] = []
    n = len(serialized.pieces)
    for i, piece in enumerate(serialized.pieces):
        pieces.append(piece)
        if piece.kind != "column":
            continue
        # Anchor text goes after the column's trailing FK markers, if any.
        j = i + 1
        while j < n and serialized.pieces[j].kind == "fk_marker":
            j += 1
        if j != i + 1:
            continue  # emit after the last marker instead
        key = (piece.table, piece.column)
        if key in by_column:
            values = " , ".join(m.cell_value for m in by_column[key])
            pieces.append(
                Piece("anchor", f"( {values} )", " ", table=piece.table, column=piece.column)
            )
    # Second pass handles marker-bearing columns: anchors follow markers.
    out: list[Piece] = []
    for i, piece in enumerate(pieces):
        out.append(piece)
        if piece.kind != "fk_marker":
            continue
        nxt = pieces[i + 1] if i + 1 < len(pieces) else None
        if nxt is not None and nxt.kind == "fk_marker":
            continue
        key = (piece.table, piece.column)
        if key in by_column:
            values = " , ".join(m.cell_value for m in by_column[key])
            out.append(
                Piece("anchor", f"( {values} )", " ", table=piece.table, column=piece.column)
            )
    return SerializedInput(serialized.scheme, tuple(out))
