"""Text-to-SQL toolkit: schema serialization with foreign-key markers and
schema descriptions, incremental SQL validity checking for constrained
decoding, exact-set-match / execution-accuracy evaluation, and failure
triage."""

from .catalog import (
    ColumnDef,
    ForeignKey,
    IntegrityIssue,
    RelationKind,
    SchemaCatalog,
    TableDef,
    classify_relation,
    load_catalog,
    load_catalog_map,
    validate_catalog,
)
from .checker import CheckerState, Verdict, check_level, feed, fork, new_checker
from .evaluate import (
    EvalExample,
    ExecutionResult,
    Report,
    evaluate_corpus,
    exact_match,
    execute,
    execution_match,
)
from .serialize import (
    AnchorConfig,
    AnchorMatch,
    DescriptionStore,
    SerializedInput,
    attach_anchors,
    extract_anchors,
    serialize_baseline,
    serialize_fk,
    serialize_sd,
)
from .sql import ClauseSet, lex, normalize, parse_sql, render
from .triage import FailureCategory, FailureLabel, TriageReport, classify, triage_corpus

__version__ = "0.1.0"
