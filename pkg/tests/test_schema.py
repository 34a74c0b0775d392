import json

import pytest

from etm import SchemaError, UnknownColumn, UnknownTable, load_schema
from etm.schema import build_ddl

DDL = """
CREATE TABLE breeds (breed_code TEXT PRIMARY KEY, breed_name TEXT);
CREATE TABLE dogs (
  dog_id INTEGER PRIMARY KEY,
  name TEXT,
  age INTEGER,
  breed_code TEXT NOT NULL REFERENCES breeds(breed_code),
  license_no TEXT UNIQUE
);
CREATE TABLE tags (dog_id INTEGER, tag TEXT, PRIMARY KEY (dog_id, tag));
"""

# Spider-style metadata for the same database
SPIDER_DOC = {
    "db_id": "dog_kennels",
    "table_names_original": ["breeds", "dogs"],
    "column_names_original": [
        [-1, "*"], [0, "breed_code"], [0, "breed_name"],
        [1, "dog_id"], [1, "name"], [1, "age"], [1, "breed_code"],
    ],
    "column_types": ["text", "text", "text", "number", "text", "number", "text"],
    "primary_keys": [1, 3],
    "foreign_keys": [[6, 1]],
}


@pytest.fixture
def schema():
    return load_schema(DDL)


def test_pk_implies_unique_and_not_null(schema):
    assert schema.is_unique("dogs", "dog_id")
    assert schema.is_non_null("dogs", "dog_id")


def test_unconstrained_defaults_false(schema):
    assert not schema.is_unique("dogs", "name")
    assert not schema.is_non_null("dogs", "name")


def test_explicit_constraints(schema):
    assert schema.is_unique("dogs", "license_no")
    assert schema.is_non_null("dogs", "breed_code")
    assert not schema.is_unique("dogs", "breed_code")


def test_composite_pk_members(schema):
    # members are not-null but not individually unique, and not sole PKs
    assert schema.is_non_null("tags", "dog_id")
    assert not schema.is_unique("tags", "dog_id")
    assert not schema.is_sole_primary_key("tags", "dog_id")
    assert schema.is_sole_primary_key("dogs", "dog_id")


def test_lookup_errors(schema):
    with pytest.raises(UnknownColumn):
        schema.is_unique("dogs", "nope")
    with pytest.raises(UnknownTable):
        schema.all_columns("cats")


def test_pk_fk_link_direction(schema):
    link = schema.pk_fk_link(("dogs", "breed_code"), ("breeds", "breed_code"))
    assert link == (("breeds", "breed_code"), ("dogs", "breed_code"))
    # unrelated and self pairs are absent
    assert schema.pk_fk_link(("dogs", "name"), ("breeds", "breed_name")) is None
    assert schema.pk_fk_link(("dogs", "name"), ("dogs", "name")) is None


def test_all_columns_declaration_order(schema):
    assert schema.all_columns("dogs") == [
        "dog_id", "name", "age", "breed_code", "license_no"]
    assert schema.all_columns("breeds")[0] == "breed_code"


def test_spider_metadata_loading():
    sp = load_schema(SPIDER_DOC)
    assert sp.db_id == "dog_kennels"
    assert sp.is_unique("dogs", "dog_id")
    link = sp.pk_fk_link(("breeds", "breed_code"), ("dogs", "breed_code"))
    assert link == (("breeds", "breed_code"), ("dogs", "breed_code"))
    # Spider metadata carries no UNIQUE/NOT NULL info beyond the keys
    assert not sp.is_non_null("dogs", "name")


def test_ddl_and_json_agree(schema):
    doc = {
        "db_id": "x",
        "tables": [
            {"name": t.name, "columns": [
                {"name": c.name, "type": c.declared_type,
                 "primary_key": c.is_primary_key
                 or c.name in [p.lower() for p in t.primary_key],
                 "unique": c.is_unique, "not_null": c.is_not_null}
                for c in t.columns]}
            for t in schema.tables],
        "foreign_keys": [
            {"from": [f.from_table, f.from_column],
             "to": [f.to_table, f.to_column]}
            for f in schema.foreign_keys],
    }
    other = load_schema(json.loads(json.dumps(doc)))
    for t in schema.tables:
        for c in t.columns:
            assert schema.is_unique(t.name, c.name) == other.is_unique(t.name, c.name)
            assert schema.is_non_null(t.name, c.name) == other.is_non_null(t.name, c.name)


def test_pk_invariant_over_all_columns(schema):
    for t in schema.tables:
        for c in t.columns:
            if c.is_primary_key:
                assert c.is_unique and c.is_not_null


def test_schema_errors():
    with pytest.raises(SchemaError):
        load_schema("CREATE TABLE t ()")
    with pytest.raises(SchemaError):
        load_schema("CREATE TABLE t (a INT); CREATE TABLE t (b INT);")
    with pytest.raises(SchemaError):
        load_schema({"db_id": "x", "tables": [
            {"name": "t", "columns": [{"name": "a", "type": "INT"}]}],
            "foreign_keys": [{"from": ["t", "a"], "to": ["missing", "b"]}]})
    with pytest.raises(SchemaError):
        load_schema(42)


def test_build_ddl_round_trips(schema):
    rebuilt = load_schema(";\n".join(build_ddl(schema)))
    for t in schema.tables:
        for c in t.columns:
            assert schema.is_unique(t.name, c.name) == rebuilt.is_unique(t.name, c.name)
            assert schema.is_non_null(t.name, c.name) == rebuilt.is_non_null(t.name, c.name)
    assert rebuilt.pk_fk_link(("dogs", "breed_code"),
                              ("breeds", "breed_code")) is not None


def test_numeric_affinity(schema):
    assert schema.numeric_affinity("dogs", "age")
    assert not schema.numeric_affinity("dogs", "name")
