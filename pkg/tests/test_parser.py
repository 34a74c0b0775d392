import pytest

from corpus import CORPUS
from etm import ParseError, parse, serialize
from etm.ast_nodes import (Binary, ColumnRef, InList, Literal, Paren,
                           SelectCore, Star, Subquery)


def test_minimal_select():
    ast = parse("SELECT name FROM dogs;")
    core = ast.body
    assert isinstance(core, SelectCore)
    assert core.projections[0].expr == ColumnRef(None, "name")
    assert core.from_.base.name == "dogs"


def test_in_value_list():
    ast = parse("SELECT c1 FROM t1 WHERE c1 IN (1, 2, 3);")
    cond = ast.body.where
    assert isinstance(cond, InList)
    assert [i.value for i in cond.items] == [1, 2, 3]
    assert all(i.kind == "number" for i in cond.items)


def test_parens_shape_preserved():
    with_parens = parse("SELECT c1 FROM t1 WHERE c1 = 4 AND (c2 = 5 OR c1 = 6)")
    cond = with_parens.body.where
    assert isinstance(cond, Binary) and cond.op == "AND"
    assert isinstance(cond.right, Paren)
    assert isinstance(cond.right.operand, Binary)
    assert cond.right.operand.op == "OR"
    flat = parse("SELECT c1 FROM t1 WHERE c1 = 4 AND c2 = 5 OR c1 = 6")
    assert flat.body.where.op == "OR"
    assert with_parens != flat


def test_derived_table_source():
    ast = parse("SELECT c1 FROM (SELECT * FROM t1)")
    src = ast.body.from_.base
    assert isinstance(src.query.body.projections[0].expr, Star)


def test_quote_types():
    literal = parse("SELECT 'x' FROM t1").body.projections[0].expr
    assert isinstance(literal, Literal) and literal.kind == "string"
    ref = parse('SELECT "t1"."c1" FROM "t1"').body.projections[0].expr
    assert isinstance(ref, ColumnRef)
    assert ref.table_quoted and ref.column_quoted
    assert parse('SELECT "t1"."c1" FROM "t1"').body.from_.base.quoted


def test_number_keeps_source_text():
    lit = parse("SELECT c FROM t WHERE c = '012'").body.where.right
    assert lit.kind == "string" and lit.text == "012"
    num = parse("SELECT 150 FROM t").body.projections[0].expr
    assert num.value == 150 and num.text == "150"
    assert num == Literal("number", 150.0, "150.0")  # numeric equality


def test_limit_forms():
    assert parse("SELECT a FROM t LIMIT 3").limit.count == 3
    spec = parse("SELECT a FROM t LIMIT 3 OFFSET 2").limit
    assert (spec.count, spec.offset) == (3, 2)
    spec = parse("SELECT a FROM t LIMIT 2, 3").limit
    assert (spec.count, spec.offset) == (3, 2)  # sqlite offset-first form
    with pytest.raises(ParseError):
        parse("SELECT a FROM t LIMIT -1")


def test_compound_left_associative():
    ast = parse("SELECT a FROM t1 UNION SELECT b FROM t2 EXCEPT SELECT c FROM t3")
    assert ast.body.op == "EXCEPT"
    assert ast.body.left.op == "UNION"


def test_subquery_expression():
    ast = parse("SELECT a FROM t WHERE a = (SELECT MAX(a) FROM t)")
    assert isinstance(ast.body.where.right, Subquery)


def test_duplicate_cte_rejected():
    with pytest.raises(ParseError):
        parse("WITH q AS (SELECT 1), q AS (SELECT 2) SELECT * FROM q")


@pytest.mark.parametrize("bad", [
    "",
    "INSERT INTO t VALUES (1)",
    "SELECT FROM t",
    "SELECT a FROM t WHERE",
    "UPDATE t SET a = 1",
    "SELECT a FROM t GROUP",
    "SELECT a FROM t;; SELECT b FROM t",
    "SELECT a FROM t OUTER JOIN s",
])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse(bad)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse("SELECT a FROM t WHERE ???")
    assert err.value.position >= 0


@pytest.mark.parametrize("sql", CORPUS)
def test_round_trip(sql):
    first = parse(sql)
    text = serialize(first)
    second = parse(text)
    assert first == second
    assert serialize(second) == text
