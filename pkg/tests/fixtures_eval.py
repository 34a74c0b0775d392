"""The labeled evaluation fixture: 60 (gold, pred) pairs over one database.

Composition (fixed by construction, asserted by the acceptance suite):
  * 6 pairs labeled distinct that the planted instance cannot distinguish,
    so strict execution matching confirms them (planted EXE false positives);
  * 8 pairs labeled equivalent that the legacy set matcher rejects
    (planted ESM false negatives), all repaired by tree matching;
  * 1 pair labeled equivalent whose equivalence (boolean distribution) has
    no rewrite rule: the single tolerated tree-matching false negative;
  * 25 equivalent pairs all three metrics accept;
  * 20 distinct pairs execution distinguishes on the planted instance.
"""

import json
import os
import sqlite3
from dataclasses import dataclass

from etm import load_schema

DB_ID = "dog_kennels"

FIXTURE_DDL = """
CREATE TABLE breeds (breed_code TEXT PRIMARY KEY, breed_name TEXT);
CREATE TABLE owners (owner_id INTEGER PRIMARY KEY, owner_name TEXT);
CREATE TABLE dogs (dog_id INTEGER PRIMARY KEY, name TEXT, age INTEGER,
  weight REAL, owner_id INTEGER NOT NULL REFERENCES owners(owner_id),
  breed_code TEXT NOT NULL REFERENCES breeds(breed_code));
CREATE TABLE transcripts (transcript_id INTEGER PRIMARY KEY,
  transcript_date DATE);
"""

FIXTURE_SCHEMA = load_schema(FIXTURE_DDL)

# Planted instance invariants the pairs below rely on:
#   every age < 10; no weight in (50, 60]; breed_code order == breed_name
#   order; no name extends 'rex'; the first-inserted dog has the minimum
#   weight; the maximum weight and all ages are unique; 'bo' is duplicated;
#   one breed ('bq') has no dogs; transcripts has >= 2 rows.
FIXTURE_ROWS = {
    "breeds": [("ba", "ant"), ("bm", "cat"), ("bq", "elk"), ("bz", "fox")],
    "owners": [(1, "amy"), (2, "ben"), (3, "cal")],
    "dogs": [
        (1, "rex", 3, 8.0, 1, "ba"),
        (2, "ada", 9, 20.5, 1, "bm"),
        (3, "bo", 5, 33.0, 2, "bz"),
        (4, "bo", 7, 70.0, 2, "bm"),
        (5, "ivy", 2, 61.5, 3, "ba"),
    ],
    "transcripts": [(1, "2019-01-03"), (2, "2019-02-14"), (3, "2019-03-27")],
}

SCHEMA_JSON = {
    "db_id": DB_ID,
    "tables": [
        {"name": "breeds", "columns": [
            {"name": "breed_code", "type": "TEXT", "primary_key": True},
            {"name": "breed_name", "type": "TEXT"}]},
        {"name": "owners", "columns": [
            {"name": "owner_id", "type": "INTEGER", "primary_key": True},
            {"name": "owner_name", "type": "TEXT"}]},
        {"name": "dogs", "columns": [
            {"name": "dog_id", "type": "INTEGER", "primary_key": True},
            {"name": "name", "type": "TEXT"},
            {"name": "age", "type": "INTEGER"},
            {"name": "weight", "type": "REAL"},
            {"name": "owner_id", "type": "INTEGER", "not_null": True},
            {"name": "breed_code", "type": "TEXT", "not_null": True}]},
        {"name": "transcripts", "columns": [
            {"name": "transcript_id", "type": "INTEGER", "primary_key": True},
            {"name": "transcript_date", "type": "DATE"}]},
    ],
    "foreign_keys": [
        {"from": ["dogs", "owner_id"], "to": ["owners", "owner_id"]},
        {"from": ["dogs", "breed_code"], "to": ["breeds", "breed_code"]},
    ],
}


@dataclass(frozen=True)
class Example:
    gold: str
    pred: str
    label: str       # 'equivalent' | 'distinct'
    kind: str        # planting category, used by assertions


PLANTED_EXE_FP = [
    Example("SELECT name FROM dogs",
            "SELECT name FROM dogs WHERE age < 10",
            "distinct", "exe_fp"),
    Example("SELECT name FROM dogs WHERE weight > 50",
            "SELECT name FROM dogs WHERE weight > 60",
            "distinct", "exe_fp"),
    Example("SELECT COUNT(*) FROM dogs WHERE age > 90",
            "SELECT COUNT(*) FROM dogs WHERE age > 95",
            "distinct", "exe_fp"),
    Example("SELECT breed_name FROM breeds ORDER BY breed_name",
            "SELECT breed_name FROM breeds ORDER BY breed_code",
            "distinct", "exe_fp"),
    Example("SELECT owner_id FROM dogs WHERE name = 'rex'",
            "SELECT owner_id FROM dogs WHERE name LIKE 'rex%'",
            "distinct", "exe_fp"),
    Example("SELECT MIN(weight) FROM dogs",
            "SELECT weight FROM dogs LIMIT 1",
            "distinct", "exe_fp"),
]

PLANTED_ESM_FN = [
    Example("SELECT MAX(weight) FROM dogs",
            "SELECT weight FROM dogs ORDER BY weight DESC LIMIT 1",
            "equivalent", "esm_fn_rule10"),
    Example("SELECT COUNT(*) FROM dogs",
            "SELECT COUNT(dog_id) FROM dogs",
            "equivalent", "esm_fn_rule6"),
    Example("SELECT name FROM dogs WHERE age BETWEEN 2 AND 5",
            "SELECT name FROM dogs WHERE age >= 2 AND age <= 5",
            "equivalent", "esm_fn_rule22"),
    Example("SELECT name FROM dogs WHERE age = 2 OR age = 3 OR age = 5",
            "SELECT name FROM dogs WHERE age IN (2, 3, 5)",
            "equivalent", "esm_fn_rule18"),
    Example("SELECT transcript_date FROM transcripts ORDER BY transcript_date",
            "SELECT transcript_date FROM transcripts "
            "ORDER BY JULIANDAY(transcript_date)",
            "equivalent", "esm_fn_rule17"),
    Example("SELECT dogs.name FROM dogs JOIN owners "
            "ON dogs.owner_id = owners.owner_id "
            "WHERE dogs.name IN (SELECT owner_name FROM owners)",
            "SELECT t.name FROM dogs AS t JOIN owners "
            "ON t.owner_id = owners.owner_id "
            "WHERE t.name IN (SELECT owner_name FROM owners AS t)",
            "equivalent", "esm_fn_alias"),
    Example("SELECT dogs.name FROM dogs JOIN breeds "
            "ON dogs.breed_code = breeds.breed_code",
            "SELECT name FROM dogs",
            "equivalent", "esm_fn_rule14"),
    Example("SELECT name FROM dogs",
            'SELECT "dogs"."name" FROM "dogs"',
            "equivalent", "esm_fn_quotes"),
]

ETM_FN = [
    Example("SELECT name FROM dogs WHERE age = 2 AND (name = 'bo' OR age = 5)",
            "SELECT name FROM dogs "
            "WHERE (age = 2 AND name = 'bo') OR (age = 2 AND age = 5)",
            "equivalent", "etm_fn_distribution"),
]

ALL_MATCH = [
    Example("SELECT name FROM dogs", "SELECT name FROM dogs",
            "equivalent", "identity"),
    Example("SELECT name FROM dogs WHERE age > 5",
            "select NAME from DOGS where AGE > 5",
            "equivalent", "case"),
    Example("SELECT owner_name FROM owners",
            "SELECT owner_name  FROM owners ;",
            "equivalent", "whitespace"),
    Example("SELECT breed_name FROM breeds",
            "SELECT breed_name FROM breeds -- trailing note",
            "equivalent", "comment"),
    Example("SELECT dogs.name FROM dogs",
            "SELECT d.name FROM dogs AS d",
            "equivalent", "table_alias"),
    Example("SELECT name FROM dogs WHERE age = 2",
            "SELECT dogs.name FROM dogs WHERE dogs.age = 2",
            "equivalent", "qualification"),
    Example("SELECT name FROM dogs WHERE age = 2 AND weight > 5",
            "SELECT name FROM dogs WHERE weight > 5 AND age = 2",
            "equivalent", "conjunct_order"),
    Example("SELECT name FROM dogs WHERE (age = 2) AND (weight > 5)",
            "SELECT name FROM dogs WHERE age = 2 AND weight > 5",
            "equivalent", "parens"),
    Example("SELECT name FROM dogs ORDER BY age",
            "SELECT name FROM dogs ORDER BY age ASC",
            "equivalent", "explicit_asc"),
    Example("SELECT dogs.name FROM dogs INNER JOIN owners "
            "ON dogs.owner_id = owners.owner_id",
            "SELECT dogs.name FROM dogs JOIN owners "
            "ON dogs.owner_id = owners.owner_id",
            "equivalent", "inner_kw"),
    Example("SELECT name FROM dogs WHERE age <> 3",
            "SELECT name FROM dogs WHERE age != 3",
            "equivalent", "neq_spelling"),
    Example("SELECT name FROM dogs WHERE age == 3",
            "SELECT name FROM dogs WHERE age = 3",
            "equivalent", "eq_spelling"),
    Example("SELECT dogs.name FROM dogs JOIN breeds "
            "ON dogs.breed_code = breeds.breed_code "
            "WHERE breeds.breed_name = 'cat'",
            "SELECT dogs.name FROM breeds JOIN dogs "
            "ON breeds.breed_code = dogs.breed_code "
            "WHERE breeds.breed_name = 'cat'",
            "equivalent", "join_order"),
    Example("SELECT dogs.name FROM dogs JOIN breeds "
            "ON dogs.breed_code = breeds.breed_code "
            "WHERE breeds.breed_name = 'ant'",
            "SELECT dogs.name FROM dogs JOIN breeds "
            "ON breeds.breed_code = dogs.breed_code "
            "WHERE breeds.breed_name = 'ant'",
            "equivalent", "on_operand_order"),
    Example("SELECT name FROM dogs WHERE weight > 20",
            "SELECT name FROM dogs WHERE weight > 20.0",
            "equivalent", "number_format"),
    Example("SELECT COUNT(*) FROM dogs",
            "SELECT count(*) FROM dogs",
            "equivalent", "fn_case"),
    Example("SELECT breed_code, COUNT(*) FROM dogs GROUP BY breed_code "
            "HAVING COUNT(*) > 1",
            "SELECT breed_code, count(*) FROM dogs GROUP BY breed_code "
            "HAVING count(*) > 1",
            "equivalent", "group_having"),
    Example("SELECT name FROM dogs WHERE owner_id IN "
            "(SELECT owner_id FROM owners WHERE owner_name = 'amy')",
            "SELECT name FROM dogs WHERE owner_id IN "
            "(SELECT o.owner_id FROM owners AS o WHERE o.owner_name = 'amy')",
            "equivalent", "subquery_alias"),
    Example("SELECT name FROM dogs ORDER BY age DESC LIMIT 2",
            "SELECT name FROM dogs ORDER BY age DESC LIMIT 2",
            "equivalent", "limit_same"),
    Example("SELECT DISTINCT breed_code FROM dogs",
            "SELECT DISTINCT breed_code FROM dogs",
            "equivalent", "distinct_same"),
    Example("SELECT name FROM dogs WHERE weight IS NULL",
            "SELECT name FROM dogs WHERE WEIGHT IS NULL",
            "equivalent", "is_null_same"),
    Example("SELECT weight FROM dogs WHERE weight > 60",
            "SELECT dogs.weight FROM dogs WHERE dogs.weight > 60",
            "equivalent", "qualified_projection"),
    Example("SELECT breed_code FROM breeds UNION SELECT breed_code FROM dogs",
            "select breed_code from breeds union select breed_code from dogs",
            "equivalent", "union_case"),
    Example("SELECT MIN(age), MAX(age) FROM dogs",
            "SELECT min(age), max(AGE) FROM dogs",
            "equivalent", "agg_case"),
    Example("SELECT name FROM dogs ORDER BY age ASC, weight DESC",
            "SELECT name FROM dogs ORDER BY age, weight DESC",
            "equivalent", "order_two_keys"),
]

ALL_MISMATCH = [
    Example("SELECT dogs.name FROM dogs JOIN breeds "
            "ON dogs.breed_code = breeds.breed_code",
            "SELECT dogs.name FROM dogs JOIN breeds "
            "ON dogs.breed_code = breeds.breed_name",
            "distinct", "join_condition"),
    Example("SELECT DISTINCT name FROM dogs",
            "SELECT name FROM dogs",
            "distinct", "distinct_dropped"),
    Example("SELECT transcript_date FROM transcripts "
            "ORDER BY transcript_date DESC LIMIT 2",
            "SELECT transcript_date FROM transcripts "
            "ORDER BY transcript_date DESC LIMIT 1",
            "distinct", "limit_value"),
    Example("SELECT name FROM dogs WHERE age > 2",
            "SELECT name FROM dogs WHERE age > 3",
            "distinct", "constant"),
    Example("SELECT name FROM dogs",
            "SELECT breed_code FROM dogs",
            "distinct", "column"),
    Example("SELECT MIN(age) FROM dogs",
            "SELECT MAX(age) FROM dogs",
            "distinct", "aggregate"),
    Example("SELECT name FROM dogs WHERE age > 5",
            "SELECT name FROM dogs",
            "distinct", "missing_where"),
    Example("SELECT name FROM dogs ORDER BY age ASC",
            "SELECT name FROM dogs ORDER BY age DESC",
            "distinct", "direction"),
    Example("SELECT COUNT(name) FROM dogs",
            "SELECT COUNT(DISTINCT name) FROM dogs",
            "distinct", "count_distinct"),
    Example("SELECT owner_name FROM owners",
            "SELECT breed_name FROM breeds",
            "distinct", "table"),
    Example("SELECT name FROM dogs WHERE age > 3",
            "SELECT name FROM dogs WHERE age >= 3",
            "distinct", "strictness"),
    Example("SELECT name FROM dogs WHERE age > 3 AND weight > 50",
            "SELECT name FROM dogs WHERE age > 3 OR weight > 50",
            "distinct", "connective"),
    Example("SELECT name FROM dogs WHERE name LIKE 'b%'",
            "SELECT name FROM dogs WHERE name = 'b'",
            "distinct", "like_vs_eq"),
    Example("SELECT dogs.name FROM dogs",
            "SELECT dogs.name FROM dogs JOIN transcripts "
            "ON dogs.dog_id = transcripts.transcript_id",
            "distinct", "extra_join"),
    Example("SELECT COUNT(*) FROM dogs GROUP BY name",
            "SELECT COUNT(*) FROM dogs GROUP BY breed_code",
            "distinct", "group_key"),
    Example("SELECT breed_code FROM dogs GROUP BY breed_code "
            "HAVING COUNT(*) > 1",
            "SELECT breed_code FROM dogs GROUP BY breed_code "
            "HAVING COUNT(*) > 2",
            "distinct", "having"),
    Example("SELECT breed_code FROM breeds UNION SELECT breed_code FROM dogs",
            "SELECT breed_code FROM breeds INTERSECT "
            "SELECT breed_code FROM dogs",
            "distinct", "setop"),
    Example("SELECT name FROM dogs ORDER BY age LIMIT 3",
            "SELECT name FROM dogs ORDER BY age",
            "distinct", "limit_presence"),
    Example("SELECT name FROM dogs ORDER BY age LIMIT 2 OFFSET 1",
            "SELECT name FROM dogs ORDER BY age LIMIT 2",
            "distinct", "offset"),
    Example("SELECT dog_id FROM dogs WHERE name = 'rex'",
            "SELECT dog_id FROM dogs WHERE name = 'ada'",
            "distinct", "string_literal"),
]

EXAMPLES = PLANTED_EXE_FP + PLANTED_ESM_FN + ETM_FN + ALL_MATCH + ALL_MISMATCH

# 20-pair subset with exactly 12 tree-matching matches (accuracy 60.0)
MINI_EXAMPLES = ALL_MATCH[:12] + ALL_MISMATCH[:8]


def build_instance_db(path: str):
    """Write the planted instance as a SQLite file."""
    conn = sqlite3.connect(path)
    conn.executescript(FIXTURE_DDL)
    for table, rows in FIXTURE_ROWS.items():
        marks = ", ".join("?" for _ in rows[0])
        conn.executemany(f"INSERT INTO {table} VALUES ({marks})", rows)
    conn.commit()
    conn.close()


def write_dataset(root: str, examples=None):
    """Materialize gold/pred/label files plus schema and db directories.

    Returns a dict of paths keyed by role.
    """
    examples = examples if examples is not None else EXAMPLES
    os.makedirs(root, exist_ok=True)
    gold_path = os.path.join(root, "gold.txt")
    pred_path = os.path.join(root, "pred.txt")
    labels_path = os.path.join(root, "labels.txt")
    schema_dir = os.path.join(root, "schemas")
    db_dir = os.path.join(root, "databases", DB_ID)
    os.makedirs(schema_dir, exist_ok=True)
    os.makedirs(db_dir, exist_ok=True)
    with open(gold_path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(f"{ex.gold}\t{DB_ID}\n")
    with open(pred_path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(ex.pred + "\n")
    with open(labels_path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(ex.label + "\n")
    with open(os.path.join(schema_dir, f"{DB_ID}.json"), "w",
              encoding="utf-8") as fh:
        json.dump(SCHEMA_JSON, fh, indent=2)
    db_file = os.path.join(db_dir, f"{DB_ID}.sqlite")
    if not os.path.exists(db_file):
        build_instance_db(db_file)
    return {
        "gold": gold_path, "pred": pred_path, "labels": labels_path,
        "schemas": schema_dir, "dbs": os.path.join(root, "databases"),
        "db_file": db_file,
    }
