"""Differential suite: the bridge must agree with the command-line interface
byte for byte (serializer) and verdict for verdict (checker) on a shared set
of well over 100 cases."""

import json
import random
import subprocess

import pytest

from t2s_bridge import (
    BridgeError,
    ClosedSession,
    UnknownDbId,
    bridge_close,
    bridge_feed,
    bridge_fork,
    bridge_init,
    bridge_new_session,
    bridge_serialize,
)


def run_cli(args, stdin=None):
    proc = subprocess.run(
        ["t2s", *args], input=stdin, capture_output=True, text=True, check=True
    )
    return proc.stdout


@pytest.fixture(scope="module")
def handle(tables_path, descriptions_path):
    return bridge_init(tables_path, descriptions_path)


def chunks(text, rng):
    pieces = []
    pos = 0
    while pos < len(text):
        step = rng.randint(1, 7)
        pieces.append(text[pos:pos + step])
        pos += step
    return pieces


def corrupt(query, rng):
    words = query.split(" ")
    idx = rng.randrange(len(words))
    words[idx] = "zz_" + words[idx].strip("(),")
    return " ".join(words)


@pytest.mark.parametrize("scheme", ["baseline", "fk"])
def test_serializer_matches_cli(handle, tables_path, dev_examples, scheme, tmp_path):
    examples_file = tmp_path / "examples.json"
    examples_file.write_text(json.dumps(dev_examples), encoding="utf-8")
    cli_lines = run_cli(
        ["serialize", "--tables", tables_path, "--examples", str(examples_file),
         "--scheme", scheme]
    ).splitlines()
    assert len(cli_lines) == len(dev_examples)
    for example, cli_line in zip(dev_examples, cli_lines):
        ours = bridge_serialize(handle, example["question"], example["db_id"], scheme)
        assert ours == cli_line


def test_serializer_sd_matches_cli(handle, tables_path, descriptions_path,
                                   dev_examples, tmp_path):
    described = [e for e in dev_examples if e["db_id"] in ("sakila_1", "world_1")]
    assert described
    examples_file = tmp_path / "examples.json"
    examples_file.write_text(json.dumps(described), encoding="utf-8")
    cli_lines = run_cli(
        ["serialize", "--tables", tables_path, "--examples", str(examples_file),
         "--scheme", "sd", "--descriptions", descriptions_path]
    ).splitlines()
    for example, cli_line in zip(described, cli_lines):
        ours = bridge_serialize(handle, example["question"], example["db_id"], "sd")
        assert ours == cli_line


def test_checker_verdicts_match_cli(handle, tables_path, dev_examples, tmp_path):
    rng = random.Random(4242)
    by_db = {}
    for example in dev_examples:
        by_db.setdefault(example["db_id"], []).append(example["query"])
        by_db[example["db_id"]].append(corrupt(example["query"], rng))

    compared = 0
    for db_id, queries in by_db.items():
        cand = tmp_path / f"{db_id}.sql"
        cand.write_text("\n".join(queries) + "\n", encoding="utf-8")
        cli_rows = run_cli(
            ["check", "--tables", tables_path, "--db-id", db_id,
             "--candidates", str(cand)]
        ).splitlines()
        for query, row in zip(queries, cli_rows):
            _, cli_verdict, _ = row.split("\t")
            session = bridge_new_session(handle, db_id)
            verdict = "accept"
            for piece in chunks(query, rng):
                verdict = bridge_feed(session, piece)
                if verdict == "reject":
                    break
            assert verdict == cli_verdict, (db_id, query)
            compared += 1
    assert compared >= 100


def test_fork_matches_fresh_replay(handle):
    query = "SELECT name FROM singer WHERE age > 20"
    stem = bridge_new_session(handle, "concert_singer")
    bridge_feed(stem, query[:14])
    branch = bridge_fork(stem)

    fresh = bridge_new_session(handle, "concert_singer")
    bridge_feed(fresh, query[:14])

    for piece in (query[14:25], query[25:]):
        assert bridge_feed(branch, piece) == bridge_feed(fresh, piece)
    assert bridge_feed(stem, query[14:]) == "complete"


def test_interleaved_sessions_are_independent(handle):
    a_query = "SELECT count(*) FROM stadium"
    b_query = "SELECT zz_nope, name FROM singer"
    serial = []
    session = bridge_new_session(handle, "concert_singer")
    for piece in (a_query[:10], a_query[10:]):
        serial.append(bridge_feed(session, piece))
    session = bridge_new_session(handle, "concert_singer")
    for piece in (b_query[:16], b_query[16:]):
        serial.append(bridge_feed(session, piece))

    interleaved = [None] * 4
    sess_a = bridge_new_session(handle, "concert_singer")
    sess_b = bridge_new_session(handle, "concert_singer")
    interleaved[0] = bridge_feed(sess_a, a_query[:10])
    interleaved[2] = bridge_feed(sess_b, b_query[:16])
    interleaved[1] = bridge_feed(sess_a, a_query[10:])
    interleaved[3] = bridge_feed(sess_b, b_query[16:])
    assert interleaved == serial


def test_unknown_db_id(handle):
    with pytest.raises(UnknownDbId):
        bridge_serialize(handle, "hi", "no_such_db")
    with pytest.raises(UnknownDbId):
        bridge_new_session(handle, "no_such_db")


def test_sd_without_descriptions(tables_path):
    bare = bridge_init(tables_path)
    with pytest.raises(BridgeError):
        bridge_serialize(bare, "hi", "concert_singer", "sd")


def test_closed_session_fails_fast(handle):
    session = bridge_new_session(handle, "concert_singer")
    bridge_feed(session, "SELECT")
    bridge_close(session)
    with pytest.raises(ClosedSession):
        bridge_feed(session, " name")
    with pytest.raises(ClosedSession):
        bridge_fork(session)
