"""Relational schema model and Spider-format catalog ingestion.

The catalog file is the Spider ``tables.json`` layout: a JSON array of
database entries carrying ``db_id``, ``table_names_original``,
``column_names_original`` (pairs of [table_index, column_name], index -1
for the synthetic ``*`` column), ``column_types``, ``primary_keys``
(column indices) and ``foreign_keys`` (pairs of column indices).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import IntegrityError, ParseError

VALUE_TYPES = frozenset({"text", "number", "time", "boolean", "others"})


class RelationKind(enum.Enum):
    ONE_TO_ONE = "one_to_one"
    ONE_TO_MANY = "one_to_many"


@dataclass(frozen=True)
class ColumnDef:
    name: str
    value_type: str

    def __post_init__(self):
        if self.value_type not in VALUE_TYPES:
            raise IntegrityError(
                f"column {self.name!r} has unsupported type {self.value_type!r}"
            )


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    primary_key: frozenset[str] = frozenset()

    def column(self, name: str) -> ColumnDef | None:
        lowered = name.lower()
        for col in self.columns:
            if col.name.lower() == lowered:
                return col
        return None

    def has_column(self, name: str) -> bool:
        return self.column(name) is not None

    def is_sole_primary_key(self, name: str) -> bool:
        return len(self.primary_key) == 1 and name.lower() in {
            c.lower() for c in self.primary_key
        }

    def is_primary_key(self, name: str) -> bool:
        return name.lower() in {c.lower() for c in self.primary_key}


@dataclass(frozen=True)
class ForeignKey:
    from_table: str
    from_column: str
    to_table: str
    to_column: str
    kind: RelationKind


@dataclass(frozen=True)
class IntegrityIssue:
    entity: str
    message: str

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        return f"{self.entity}: {self.message}"


@dataclass(frozen=True)
class SchemaCatalog:
    """Immutable schema of one database; safe to share across threads."""

    db_id: str
    tables: tuple[TableDef, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()
    db_path: Path | None = None

    def table(self, name: str) -> TableDef | None:
        lowered = name.lower()
        for tab in self.tables:
            if tab.name.lower() == lowered:
                return tab
        return None

    def has_table(self, name: str) -> bool:
        return self.table(name) is not None

    def tables_with_column(self, column: str) -> list[TableDef]:
        return [t for t in self.tables if t.has_column(column)]

    def column_exists_anywhere(self, column: str) -> bool:
        return any(t.has_column(column) for t in self.tables)


def _classify(from_table: TableDef, from_column: str) -> RelationKind:
    if from_table.is_sole_primary_key(from_column):
        return RelationKind.ONE_TO_ONE
    return RelationKind.ONE_TO_MANY


def classify_relation(fk: ForeignKey, catalog: SchemaCatalog) -> RelationKind:
    """Classify an FK edge by the child column's key role.

    One-to-one only when the child column is the sole primary key of its
    table; anything weaker (non-key, composite-key member) defaults to
    one-to-many, under which the marker rules degrade safely.
    """
    from_tab = catalog.table(fk.from_table)
    if from_tab is None:
        raise IntegrityError(f"unknown table {fk.from_table!r}")
    return _classify(from_tab, fk.from_column)


def _build_catalog(entry: dict) -> SchemaCatalog:
    try:
        db_id = entry["db_id"]
        table_names = entry["table_names_original"]
        column_pairs = entry["column_names_original"]
        column_types = entry["column_types"]
        primary_keys = entry.get("primary_keys", [])
        foreign_keys = entry.get("foreign_keys", [])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"catalog entry missing field: {exc}") from exc

    if len(column_pairs) != len(column_types):
        raise ParseError(
            f"{db_id}: column_names_original and column_types lengths differ"
        )

    seen_tables: set[str] = set()
    for name in table_names:
        if name.lower() in seen_tables:
            raise IntegrityError(f"{db_id}: duplicate table name {name!r}")
        seen_tables.add(name.lower())

    # Columns per table, keeping file order; index -1 is the synthetic '*'.
    per_table: list[list[ColumnDef]] = [[] for _ in table_names]
    col_owner: list[int] = []
    col_name: list[str] = []
    for (tab_idx, name), ctype in zip(column_pairs, column_types):
        col_owner.append(tab_idx)
        col_name.append(name)
        if tab_idx == -1:
            continue
        if not 0 <= tab_idx < len(table_names):
            raise IntegrityError(f"{db_id}: column {name!r} has bad table index {tab_idx}")
        if ctype not in VALUE_TYPES:
            raise ParseError(f"{db_id}: unknown column type {ctype!r}")
        if any(c.name.lower() == name.lower() for c in per_table[tab_idx]):
            raise IntegrityError(
                f"{db_id}: duplicate column {name!r} in table {table_names[tab_idx]!r}"
            )
        per_table[tab_idx].append(ColumnDef(name, ctype))

    pk_names: list[set[str]] = [set() for _ in table_names]
    for idx in primary_keys:
        if not 0 <= idx < len(col_owner) or col_owner[idx] == -1:
            raise IntegrityError(f"{db_id}: primary key index {idx} out of range")
        pk_names[col_owner[idx]].add(col_name[idx])

    tables = tuple(
        TableDef(name, tuple(cols), frozenset(pks))
        for name, cols, pks in zip(table_names, per_table, pk_names)
    )
    catalog = SchemaCatalog(db_id, tables)

    fks: list[ForeignKey] = []
    for pair in foreign_keys:
        try:
            from_idx, to_idx = pair
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{db_id}: malformed foreign key entry {pair!r}") from exc
        for idx in (from_idx, to_idx):
            if not 0 <= idx < len(col_owner) or col_owner[idx] == -1:
                raise IntegrityError(f"{db_id}: foreign key index {idx} out of range")
        from_tab = tables[col_owner[from_idx]]
        to_tab = tables[col_owner[to_idx]]
        kind = _classify(from_tab, col_name[from_idx])
        fks.append(
            ForeignKey(
                from_table=from_tab.name,
                from_column=col_name[from_idx],
                to_table=to_tab.name,
                to_column=col_name[to_idx],
                kind=kind,
            )
        )

    db_path = Path(entry["db_path"]) if entry.get("db_path") else None
    return SchemaCatalog(db_id, tables, tuple(fks), db_path)


def load_catalog(path: str | Path) -> list[SchemaCatalog]:
    """Load every database entry from a Spider-format catalog file."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a JSON array of database entries")
    return [_build_catalog(entry) for entry in data]


def load_catalog_map(path: str | Path) -> dict[str, SchemaCatalog]:
    out: dict[str, SchemaCatalog] = {}
    for cat in load_catalog(path):
        if cat.db_id in out:
            raise IntegrityError(f"duplicate db_id {cat.db_id!r}")
        out[cat.db_id] = cat
    return out


def validate_catalog(catalog: SchemaCatalog) -> list[IntegrityIssue]:
    """Return one issue per invariant violation; empty means well-formed."""
    issues: list[IntegrityIssue] = []
    seen: set[str] = set()
    for tab in catalog.tables:
        if tab.name.lower() in seen:
            issues.append(IntegrityIssue(tab.name, "duplicate table name"))
        seen.add(tab.name.lower())
        cols: set[str] = set()
        for col in tab.columns:
            if col.name.lower() in cols:
                issues.append(
                    IntegrityIssue(f"{tab.name}.{col.name}", "duplicate column name")
                )
            cols.add(col.name.lower())
        for pk in tab.primary_key:
            if not tab.has_column(pk):
                issues.append(
                    IntegrityIssue(f"{tab.name}.{pk}", "primary key column missing")
                )
    for fk in catalog.foreign_keys:
        label = f"{fk.from_table}.{fk.from_column} -> {fk.to_table}.{fk.to_column}"
        from_tab = catalog.table(fk.from_table)
        to_tab = catalog.table(fk.to_table)
        if from_tab is None or not from_tab.has_column(fk.from_column):
            issues.append(IntegrityIssue(label, "foreign key source missing"))
            continue
        if to_tab is None or not to_tab.has_column(fk.to_column):
            issues.append(IntegrityIssue(label, "foreign key target missing"))
            continue
        if fk.kind is not _classify(from_tab, fk.from_column):
            issues.append(IntegrityIssue(label, "relation kind inconsistent"))
    return issues
