import json
import os

import pytest

from t2s.errors import NotAFailure
from t2s.evaluate import ExecutionResult
from t2s.triage import (
    CATEGORY_ORDER,
    FailureCategory,
    classify,
    triage_corpus,
)

SUITE = os.path.join(os.path.dirname(__file__), "fixtures", "triage_suite.json")


@pytest.fixture(scope="module")
def suite():
    with open(SUITE) as fh:
        return json.load(fh)


def _exec_kwargs(case):
    if not case.get("executes_equal"):
        return {}
    rows = (("x",),)
    return {
        "gold_exec": ExecutionResult(rows=rows, ordered_rows=None, error=None),
        "pred_exec": ExecutionResult(rows=rows, ordered_rows=None, error=None),
    }


def test_suite_has_three_per_category(suite):
    counts = {}
    for case in suite:
        counts[case["category"]] = counts.get(case["category"], 0) + 1
    assert set(counts) == {cat.value for cat in CATEGORY_ORDER}
    assert all(v >= 3 for v in counts.values())


def test_every_case_classified_correctly(suite, catalogs):
    for case in suite:
        label = classify(
            case["gold"], case["pred"], catalogs[case["db_id"]], **_exec_kwargs(case)
        )
        assert label.category.value == case["category"], (case["gold"], case["pred"])
        assert label.evidence


def test_matching_pair_is_not_a_failure(catalogs):
    with pytest.raises(NotAFailure):
        classify(
            "SELECT name FROM singer",
            "SELECT name FROM singer",
            catalogs["concert_singer"],
        )


def _run_corpus(suite, catalogs):
    failures = [(c["gold"], c["pred"]) for c in suite]
    db_ids = [c["db_id"] for c in suite]
    execs = []
    for c in suite:
        kw = _exec_kwargs(c)
        execs.append((kw.get("gold_exec"), kw.get("pred_exec")))
    return triage_corpus(failures, catalog_for=catalogs, db_ids=db_ids, exec_results=execs)


def test_report_row_order(suite, catalogs):
    report, labels = _run_corpus(suite, catalogs)
    rows = report.to_json()["categories"]
    assert [r["category"] for r in rows] == [cat.value for cat in CATEGORY_ORDER]
    assert len(labels) == len(suite)


def test_percentages_sum_to_hundred(suite, catalogs):
    report, _ = _run_corpus(suite, catalogs)
    total_pct = sum(report.percentages().values())
    assert abs(total_pct - 100.0) <= 0.5


def test_counts_match_suite(suite, catalogs):
    report, _ = _run_corpus(suite, catalogs)
    for cat in CATEGORY_ORDER:
        want = sum(1 for c in suite if c["category"] == cat.value)
        assert report.counts.get(cat, 0) == want, cat


def test_table_render_contains_all_rows(suite, catalogs):
    report, _ = _run_corpus(suite, catalogs)
    table = report.to_table()
    for cat in CATEGORY_ORDER:
        assert cat.value in table


def test_incomplete_beats_everything(catalogs):
    label = classify(
        "SELECT name FROM singer WHERE age > 20",
        "SELECT count( FROM concert WHERE",
        catalogs["concert_singer"],
    )
    assert label.category is FailureCategory.INCOMPLETE_SQL
