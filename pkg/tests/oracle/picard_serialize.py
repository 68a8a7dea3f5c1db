"""Independent reference for the flat schema serialization format.

Works straight off the raw schema-file JSON so it shares no code with the
package under test. Produces the widely used seq2seq input layout:

    question | db_id | table : col, col, ... | table : ...

with schema identifiers lowercased and the question left untouched.
"""

from __future__ import annotations

import json


def reference_serialize(question: str, entry: dict) -> str:
    parts = [question, entry["db_id"].lower()]
    names = entry["table_names_original"]
    cols_by_table: dict[int, list[str]] = {i: [] for i in range(len(names))}
    for tbl_idx, col_name in entry["column_names_original"]:
        if tbl_idx < 0:
            continue
        cols_by_table[tbl_idx].append(col_name.lower())
    for i, table in enumerate(names):
        parts.append(table.lower() + " : " + ", ".join(cols_by_table[i]))
    return " | ".join(parts)


def load_entries(path: str) -> dict[str, dict]:
    with open(path, encoding="utf-8") as fh:
        return {e["db_id"]: e for e in json.load(fh)}
