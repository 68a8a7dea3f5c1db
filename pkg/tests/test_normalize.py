from hypothesis import given, settings
from hypothesis import strategies as st

from t2s.sql.normalize import normalize, render
from t2s.sql.parser import parse_sql


def canon(text, cat):
    return normalize(parse_sql(text, cat))


def test_alias_invariance(catalogs):
    cat = catalogs["concert_singer"]
    a = canon("SELECT T1.name FROM stadium AS T1 JOIN concert AS T2 ON T1.stadium_id = T2.stadium_id", cat)
    b = canon("SELECT x.name FROM stadium AS x JOIN concert AS y ON x.stadium_id = y.stadium_id", cat)
    assert a == b


def test_select_order_invariance(catalogs):
    cat = catalogs["concert_singer"]
    assert canon("SELECT name, age FROM singer", cat) == canon("SELECT age, name FROM singer", cat)


def test_where_order_invariance(catalogs):
    cat = catalogs["concert_singer"]
    a = canon("SELECT name FROM singer WHERE age > 20 AND country = 'France'", cat)
    b = canon("SELECT name FROM singer WHERE country = 'France' AND age > 20", cat)
    assert a == b


def test_join_cond_folds_into_where(catalogs):
    cat = catalogs["concert_singer"]
    a = canon("SELECT T1.name FROM stadium AS T1 JOIN concert AS T2 ON T1.stadium_id = T2.stadium_id", cat)
    b = canon("SELECT stadium.name FROM stadium JOIN concert ON stadium.stadium_id = concert.stadium_id", cat)
    assert a == b


def test_duplicate_conditions_are_multiset(catalogs):
    cat = catalogs["concert_singer"]
    a = canon("SELECT name FROM singer WHERE age > 20 AND age > 20", cat)
    b = canon("SELECT name FROM singer WHERE age > 20", cat)
    assert a != b


def test_values_compared_numerically(catalogs):
    cat = catalogs["concert_singer"]
    assert canon("SELECT name FROM singer WHERE age > 20", cat) == canon(
        "SELECT name FROM singer WHERE age > 20.0", cat
    )


def test_string_values_case_insensitive(catalogs):
    cat = catalogs["concert_singer"]
    assert canon("SELECT name FROM singer WHERE country = 'France'", cat) == canon(
        "SELECT name FROM singer WHERE country = 'FRANCE'", cat
    )


def test_value_difference_distinguishes(catalogs):
    cat = catalogs["concert_singer"]
    assert canon("SELECT name FROM singer WHERE age > 20", cat) != canon(
        "SELECT name FROM singer WHERE age > 21", cat
    )


def test_not_equals_canonical_with_flipped_operator(catalogs):
    cat = catalogs["concert_singer"]
    assert canon("SELECT name FROM singer WHERE NOT age = 20", cat) == canon(
        "SELECT name FROM singer WHERE age != 20", cat
    )


def test_order_by_is_ordered(catalogs):
    cat = catalogs["concert_singer"]
    assert canon("SELECT name FROM singer ORDER BY age, name", cat) != canon(
        "SELECT name FROM singer ORDER BY name, age", cat
    )


def test_distinct_distinguishes(catalogs):
    cat = catalogs["concert_singer"]
    assert canon("SELECT country FROM singer", cat) != canon(
        "SELECT DISTINCT country FROM singer", cat
    )


def test_clause_flags_localize_difference(catalogs):
    cat = catalogs["concert_singer"]
    a = canon("SELECT name FROM singer WHERE age > 20", cat)
    b = canon("SELECT name FROM singer WHERE age > 30 ORDER BY age", cat)
    flags = a.clause_flags(b)
    assert flags["where"] is False
    assert flags["order_by"] is False
    assert flags["select"] is True
    assert flags["from"] is True


def test_render_round_trip_on_dev_corpus(dev_examples, catalogs):
    for ex in dev_examples:
        cat = catalogs[ex["db_id"]]
        ast = parse_sql(ex["query"], cat)
        again = parse_sql(render(ast), cat)
        assert normalize(ast) == normalize(again), ex["query"]


@settings(max_examples=200)
@given(
    col=st.sampled_from(["name", "age", "country"]),
    op=st.sampled_from([">", "<", "=", "!="]),
    val=st.integers(min_value=0, max_value=99),
    dup=st.booleans(),
)
def test_canonical_form_stable_under_rerender(catalogs, col, op, val, dup):
    cat = catalogs["concert_singer"]
    cond = f"{col} {op} {val}"
    sql = f"SELECT name FROM singer WHERE {cond}"
    if dup:
        sql += f" AND {cond}"
    ast = parse_sql(sql, cat)
    assert normalize(ast) == normalize(parse_sql(render(ast), cat))
