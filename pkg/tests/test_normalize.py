import pytest

from corpus import CORPUS
from etm import ResolutionError, load_schema, normalize, parse
from etm.ast_nodes import NamedTable, Paren, walk

SCHEMA = load_schema("""
CREATE TABLE t1 (c1 INTEGER PRIMARY KEY, c2 TEXT, c3 INTEGER);
CREATE TABLE t2 (c2 INTEGER PRIMARY KEY, x TEXT);
CREATE TABLE t3 (c3 INTEGER, c1 INTEGER);
""")


def norm(sql, schema=SCHEMA):
    return normalize(parse(sql), schema)


def same(a, b, schema=SCHEMA):
    return norm(a, schema).tree == norm(b, schema).tree


def test_case_insensitivity():
    assert same("SELECT C1 FROM T1", "SELECT c1 FROM t1")


def test_alias_resolution():
    assert same("SELECT t.c1 FROM t1 AS t", "SELECT t1.c1 FROM t1")
    assert same("SELECT t.c1 FROM t1 t", "SELECT c1 FROM t1")


def test_projection_order_insensitive():
    assert same("SELECT c1, c2 FROM t1", "SELECT c2, c1 FROM t1")


def test_where_operand_order():
    assert same("SELECT c1 FROM t1 WHERE c2 = 'x' AND c1 = 5",
                "SELECT c1 FROM t1 WHERE c1 = 5 AND c2 = 'x'")
    assert same("SELECT c1 FROM t1 WHERE 5 < c1",
                "SELECT c1 FROM t1 WHERE c1 > 5")


def test_join_operand_order():
    assert same("SELECT t1.c1 FROM t1 JOIN t2 ON t1.c1 = t2.c2",
                "SELECT t1.c1 FROM t2 JOIN t1 ON t2.c2 = t1.c1")


def test_scoped_aliases_not_conflated():
    # the inner alias binds the subquery's table, the outer one its own
    scoped = ("SELECT c1 FROM t1 AS t JOIN t2 ON t.c1 = t2.c2 "
              "WHERE c1 IN (SELECT c3 FROM t3 AS t)")
    explicit = ("SELECT t1.c1 FROM t1 JOIN t2 ON t1.c1 = t2.c2 "
                "WHERE t1.c1 IN (SELECT t3.c3 FROM t3)")
    wrong = ("SELECT t1.c1 FROM t1 JOIN t2 ON t1.c1 = t2.c2 "
             "WHERE t1.c1 IN (SELECT t3.c1 FROM t3)")
    assert same(scoped, explicit)
    assert not same(scoped, wrong)


def test_quote_resolution():
    assert same('SELECT "t1"."c1" FROM "t1"', "SELECT t1.c1 FROM t1")
    # an unresolvable quoted name is data, not an identifier
    assert same('SELECT "x" FROM t1', "SELECT 'x' FROM t1")
    assert not same('SELECT "c1" FROM t1', "SELECT 'c1' FROM t1")


def test_projection_alias_resolution():
    assert same("SELECT c2 AS n FROM t1 ORDER BY n",
                "SELECT c2 FROM t1 ORDER BY c2")
    assert same("SELECT c2 FROM t1 ORDER BY 1",
                "SELECT c2 FROM t1 ORDER BY c2")


def test_near_identity():
    tree = norm("SELECT c1 FROM t1").tree
    assert tree.sql() == "SELECT t1.c1 FROM t1"


def test_derived_table_binding():
    assert same("SELECT c1 FROM (SELECT * FROM t1)",
                "SELECT d.c1 FROM (SELECT * FROM t1) AS d")
    assert same("SELECT x FROM (SELECT c1 AS x FROM t1)",
                "SELECT c1 FROM (SELECT c1 FROM t1)")


def test_no_aliases_survive():
    queries = [
        "SELECT t.c1 FROM t1 AS t",
        "SELECT a.c1 AS z FROM t1 a JOIN t2 b ON a.c1 = b.c2 ORDER BY z",
    ]
    for sql in queries:
        tree = norm(sql).tree
        for node in walk(tree):
            if isinstance(node, NamedTable):
                assert node.alias is None
            assert not isinstance(node, Paren)


def test_ambiguous_column_rejected():
    with pytest.raises(ResolutionError):
        norm("SELECT c1 FROM t1 JOIN t3 ON t1.c3 = t3.c3")
    with pytest.raises(ResolutionError):
        norm("SELECT missing FROM t1")
    with pytest.raises(ResolutionError):
        norm("SELECT c1 FROM nope")


def test_provenance_records_applied_steps():
    res = norm("SELECT T.C1 FROM t1 AS t")
    assert "P0" in res.provenance
    assert "P3" in res.provenance


def test_compound_operand_columns_stay_positional():
    a = norm("SELECT c1, c2 FROM t1 UNION SELECT c2, c1 FROM t1")
    b = norm("SELECT c1, c2 FROM t1 UNION SELECT c1, c2 FROM t1")
    assert a.tree != b.tree


def test_compound_children_sorted():
    assert same("SELECT c1 FROM t1 UNION SELECT c2 FROM t1",
                "SELECT c2 FROM t1 UNION SELECT c1 FROM t1")
    # EXCEPT children are positional
    assert not same("SELECT c1 FROM t1 EXCEPT SELECT c2 FROM t1",
                    "SELECT c2 FROM t1 EXCEPT SELECT c1 FROM t1")


@pytest.mark.parametrize("sql", CORPUS)
def test_idempotence_over_corpus(sql, fixture_schema):
    # queries that resolve against the fixture schema must normalize to a
    # fixpoint; the rest must fail identically both times
    try:
        first = normalize(parse(sql), fixture_schema)
    except ResolutionError:
        return
    second = normalize(first.tree, fixture_schema)
    assert first.tree == second.tree
