"""Command-line entry point: serialize, check, evaluate, triage.

Every flag can also be supplied through an environment variable with the
``T2S_`` prefix followed by the subcommand name (e.g. ``T2S_CHECK_TABLES``).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import checker as checker_mod
from .catalog import load_catalog_map
from .errors import AlignmentError, T2SError
from .evaluate import (
    ExampleRecord,
    evaluate_corpus,
    load_examples,
    load_predictions,
)
from .serialize import (
    AnchorConfig,
    DescriptionStore,
    attach_anchors,
    extract_anchors,
    serialize_baseline,
    serialize_fk,
    serialize_sd,
)
from .triage import triage_records

CONTEXT_SETTINGS = {"auto_envvar_prefix": "T2S", "help_option_names": ["-h", "--help"]}

EXIT_ALIGNMENT = 3


@click.group(context_settings=CONTEXT_SETTINGS)
def main() -> None:
    """Text-to-SQL toolkit: schema serialization, incremental SQL validity
    checking, EM/EX evaluation, and failure triage."""


def _out_stream(out: str | None):
    return open(out, "w", encoding="utf-8") if out else sys.stdout


def _discover_db(db_root: Path, db_id: str) -> Path | None:
    candidate = db_root / db_id / f"{db_id}.sqlite"
    if candidate.exists():
        return candidate
    candidate = db_root / f"{db_id}.sqlite"
    return candidate if candidate.exists() else None


@main.command()
@click.option("--tables", required=True, type=click.Path(exists=True), help="Schema catalog file (Spider tables.json format).")
@click.option("--examples", "examples_path", required=True, type=click.Path(exists=True), help="Examples file (JSON array with question/query/db_id).")
@click.option("--scheme", type=click.Choice(["baseline", "fk", "sd"]), default="baseline", show_default=True)
@click.option("--descriptions", "descriptions_path", type=click.Path(exists=True), help="Description store (required for --scheme sd).")
@click.option("--db-root", type=click.Path(exists=True), help="Database root; enables anchor extraction.")
@click.option("--with-anchors", is_flag=True, help="Append fuzzy-matched database values (needs --db-root).")
@click.option("--anchor-threshold", type=float, default=0.85, show_default=True)
@click.option("--anchor-max-per-column", type=int, default=2, show_default=True)
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
def serialize(tables, examples_path, scheme, descriptions_path, db_root,
              with_anchors, anchor_threshold, anchor_max_per_column, out):
    """Write one serialized model input per example, index-aligned."""
    if scheme == "sd" and not descriptions_path:
        raise click.UsageError("--scheme sd requires --descriptions")
    if with_anchors and not db_root:
        raise click.UsageError("--with-anchors requires --db-root")
    catalogs = load_catalog_map(tables)
    examples = load_examples(examples_path)
    store = DescriptionStore.load(descriptions_path) if descriptions_path else None
    config = AnchorConfig(threshold=anchor_threshold, max_per_column=anchor_max_per_column)
    stream = _out_stream(out)
    try:
        for example in examples:
            catalog = catalogs.get(example.db_id)
            if catalog is None:
                raise click.ClickException(f"unknown db_id {example.db_id!r}")
            if scheme == "baseline":
                serialized = serialize_baseline(example.question, catalog)
            elif scheme == "fk":
                serialized = serialize_fk(example.question, catalog)
            else:
                serialized = serialize_sd(example.question, catalog, store)
            if with_anchors:
                db_path = _discover_db(Path(db_root), example.db_id)
                if db_path is not None:
                    anchors = extract_anchors(example.question, catalog, db_path, config)
                    serialized = attach_anchors(serialized, anchors)
            stream.write(serialized.text + "\n")
    except T2SError as exc:
        raise click.ClickException(str(exc))
    finally:
        if stream is not sys.stdout:
            stream.close()


@main.command()
@click.option("--tables", required=True, type=click.Path(exists=True))
@click.option("--db-id", required=True, help="Database the candidates target.")
@click.option("--candidates", type=click.Path(exists=True), help="Candidate SQL, one per line (default stdin).")
@click.option("--check-level", type=click.Choice(["lexical", "grammatical", "schema"]), default="schema", show_default=True)
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
def check(tables, db_id, candidates, check_level, out):
    """Judge candidate SQL lines; emits TSV: index, verdict, reject offset."""
    catalogs = load_catalog_map(tables)
    catalog = catalogs.get(db_id)
    if catalog is None:
        raise click.ClickException(f"unknown db_id {db_id!r}")
    if candidates:
        lines = Path(candidates).read_text(encoding="utf-8").splitlines()
    else:
        lines = [line.rstrip("\n") for line in sys.stdin]
    stream = _out_stream(out)
    try:
        for idx, line in enumerate(lines):
            state = checker_mod.new_checker(catalog, level=check_level)
            verdict = checker_mod.Verdict.ACCEPT
            reject_offset = ""
            for pos, char in enumerate(line):
                verdict = checker_mod.feed(state, char)
                if verdict is checker_mod.Verdict.REJECT:
                    reject_offset = str(pos)
                    break
            stream.write(f"{idx}\t{verdict.value}\t{reject_offset}\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


@main.command()
@click.option("--tables", required=True, type=click.Path(exists=True))
@click.option("--examples", "examples_path", required=True, type=click.Path(exists=True))
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True))
@click.option("--db-root", type=click.Path(exists=True), help="Database root; enables EX scoring.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table", show_default=True)
@click.option("--records-out", type=click.Path(), help="Write per-example records (JSON) for triage.")
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
def evaluate(tables, examples_path, predictions_path, db_root, fmt, records_out, out):
    """Score predictions with Exact Set Match and Execution Accuracy."""
    catalogs = load_catalog_map(tables)
    examples = load_examples(examples_path)
    predictions = load_predictions(predictions_path)
    db_paths = None
    if db_root:
        db_paths = {}
        for example in examples:
            if example.db_id not in db_paths:
                found = _discover_db(Path(db_root), example.db_id)
                if found is None:
                    raise click.ClickException(f"no database found for {example.db_id!r}")
                db_paths[example.db_id] = found
    try:
        report = evaluate_corpus(examples, predictions, catalogs, db_paths)
    except AlignmentError as exc:
        click.echo(f"alignment error: {exc}", err=True)
        sys.exit(EXIT_ALIGNMENT)
    except T2SError as exc:
        raise click.ClickException(str(exc))
    if records_out:
        Path(records_out).write_text(
            json.dumps([r.to_json() for r in report.records], indent=2),
            encoding="utf-8",
        )
    stream = _out_stream(out)
    try:
        if fmt == "json":
            stream.write(json.dumps(report.to_json(), indent=2) + "\n")
        else:
            stream.write(report.to_table() + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


@main.command()
@click.option("--tables", required=True, type=click.Path(exists=True))
@click.option("--records", "records_path", required=True, type=click.Path(exists=True), help="Per-example records emitted by `evaluate --records-out`.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table", show_default=True)
@click.option("--dump-evidence", type=click.Path(), help="Write one annotated record per failure.")
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
def triage(tables, records_path, fmt, dump_evidence, out):
    """Classify failed pairs into the failure taxonomy and report shares."""
    catalogs = load_catalog_map(tables)
    raw = json.loads(Path(records_path).read_text(encoding="utf-8"))
    records = [ExampleRecord.from_json(entry) for entry in raw]
    try:
        report, annotated = triage_records(records, catalogs)
    except T2SError as exc:
        raise click.ClickException(str(exc))
    if dump_evidence:
        payload = [
            {**rec.to_json(), "category": label.category.value, "evidence": label.evidence}
            for rec, label in annotated
        ]
        Path(dump_evidence).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    stream = _out_stream(out)
    try:
        if fmt == "json":
            stream.write(json.dumps(report.to_json(), indent=2) + "\n")
        else:
            stream.write(report.to_table() + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


if __name__ == "__main__":  # pragma: no cover
    main()
