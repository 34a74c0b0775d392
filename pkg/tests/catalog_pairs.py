"""Golden pairs for every preprocessing step and rewrite rule.

Each entry gives the two query forms of one rule, a schema under which the
rule's assumption holds, and (for the gated rules 1..16) a way to violate
the assumption: usually a mutated schema, for the syntactic assumptions
(12, 15, 16) a mutated query pair, and for rule 10 an empty instance.
"""

from dataclasses import dataclass

from etm import load_schema

# shared fixture schemas; single objects so generated-instance caching works
SCHEMA_UNIQUE = load_schema("""
CREATE TABLE t1 (c1 INTEGER UNIQUE NOT NULL, c2 TEXT, c3 INTEGER);
""")
SCHEMA_PLAIN = load_schema("""
CREATE TABLE t1 (c1 INTEGER, c2 TEXT, c3 INTEGER);
""")
SCHEMA_NOTNULL = load_schema("""
CREATE TABLE t1 (c1 INTEGER NOT NULL, c2 TEXT, c3 INTEGER);
""")
SCHEMA_WIDE = load_schema("""
CREATE TABLE t1 (c1 INTEGER, c2 TEXT, c3 INTEGER, c4 TEXT);
""")
SCHEMA_TWO = load_schema("""
CREATE TABLE t1 (c1 INTEGER, c2 TEXT, c3 INTEGER);
CREATE TABLE t2 (c3 INTEGER, d2 TEXT);
""")
SCHEMA_KEYS = load_schema("""
CREATE TABLE parent (p_id INTEGER PRIMARY KEY, label TEXT);
CREATE TABLE child (x_id INTEGER PRIMARY KEY, note TEXT,
                    p_id INTEGER NOT NULL REFERENCES parent(p_id));
""")
SCHEMA_KEYS_NO_FK = load_schema("""
CREATE TABLE parent (p_id INTEGER PRIMARY KEY, label TEXT);
CREATE TABLE child (x_id INTEGER PRIMARY KEY, note TEXT,
                    p_id INTEGER NOT NULL);
""")
SCHEMA_ANTI = load_schema("""
CREATE TABLE ta (a INTEGER PRIMARY KEY, x TEXT);
CREATE TABLE tb (b INTEGER PRIMARY KEY, y TEXT);
""")
SCHEMA_DATE = load_schema("""
CREATE TABLE t1 (c1 INTEGER, c2 DATE, c3 INTEGER);
""")


@dataclass(frozen=True)
class CatalogPair:
    rule: str                    # 'P0'..'P8' or '1'..'26'
    gold: str
    pred: str
    schema: object               # schema making the assumption hold
    violated_schema: object = None   # schema breaking the assumption
    violated_pair: tuple = None      # (gold, pred) breaking a syntactic one
    needs_db: bool = False           # rule 10: pass a non-empty instance
    empty_db_violates: bool = False  # rule 10: empty table breaks it


PREPROCESSING_PAIRS = [
    CatalogPair("P0", "SELECT c1 FROM t1", "SELECT C1 FROM T1", SCHEMA_PLAIN),
    CatalogPair("P1", "SELECT c1 FROM t1", "SELECT t1.c1 FROM t1", SCHEMA_PLAIN),
    CatalogPair("P2", "SELECT c1, c2 FROM t1", "SELECT c2, c1 FROM t1", SCHEMA_PLAIN),
    CatalogPair("P3", "SELECT t1.c1 FROM t1", "SELECT t.c1 FROM t1 AS t", SCHEMA_PLAIN),
    CatalogPair("P4",
                "SELECT t1.c1 FROM t1 JOIN t2 ON t1.c3 = t2.c3",
                "SELECT t1.c1 FROM t2 JOIN t1 ON t2.c3 = t1.c3", SCHEMA_TWO),
    CatalogPair("P5",
                "SELECT c1 FROM t1 WHERE c1 = 5 AND c2 = 'cat'",
                "SELECT c1 FROM t1 WHERE 'cat' = c2 AND 5 = c1", SCHEMA_PLAIN),
    CatalogPair("P6",
                "SELECT c1 AS alpha FROM t1 ORDER BY alpha",
                "SELECT c1 FROM t1 ORDER BY c1", SCHEMA_PLAIN),
    CatalogPair("P7",
                "SELECT c1 FROM t1 WHERE c1 = 5",
                "SELECT c1 FROM t1 WHERE (c1 = 5)", SCHEMA_PLAIN),
    CatalogPair("P8",
                'SELECT "t1"."c1" FROM "t1"',
                "SELECT t1.c1 FROM t1", SCHEMA_PLAIN),
]

REWRITE_PAIRS = [
    CatalogPair("1",
                "SELECT c2 FROM t1 WHERE c1 = (SELECT MAX(c1) FROM t1)",
                "SELECT c2 FROM t1 ORDER BY c1 DESC LIMIT 1",
                SCHEMA_UNIQUE, violated_schema=SCHEMA_PLAIN),
    CatalogPair("2",
                "SELECT DISTINCT c1 FROM t1",
                "SELECT c1 FROM t1",
                SCHEMA_UNIQUE, violated_schema=SCHEMA_PLAIN),
    CatalogPair("3",
                "SELECT c1 FROM t1 WHERE c2 = 'cat' INTERSECT "
                "SELECT c1 FROM t1 WHERE c3 > 5",
                "SELECT c1 FROM t1 WHERE c2 = 'cat' AND c3 > 5",
                SCHEMA_UNIQUE, violated_schema=SCHEMA_PLAIN),
    CatalogPair("4",
                "SELECT count(*) FROM t1 GROUP BY c1",
                "SELECT count(*) FROM t1 GROUP BY c1, c2",
                SCHEMA_UNIQUE, violated_schema=SCHEMA_PLAIN),
    CatalogPair("5",
                "SELECT c1 FROM t1 EXCEPT (SELECT c1 FROM t1 WHERE c2 = 'cat')",
                "SELECT c1 FROM t1 WHERE c1 NOT IN "
                "(SELECT c1 FROM t1 WHERE c2 = 'cat')",
                SCHEMA_UNIQUE, violated_schema=SCHEMA_PLAIN),
    CatalogPair("6",
                "SELECT count(*) FROM t1",
                "SELECT count(c1) FROM t1",
                SCHEMA_NOTNULL, violated_schema=SCHEMA_PLAIN),
    CatalogPair("7",
                "SELECT c2 FROM t1 WHERE c1 IS NOT NULL",
                "SELECT c2 FROM t1",
                SCHEMA_NOTNULL, violated_schema=SCHEMA_PLAIN),
    CatalogPair("8",
                "SELECT CAST(SUM(c1) AS FLOAT) / COUNT(*) FROM t1",
                "SELECT AVG(c1) FROM t1",
                SCHEMA_NOTNULL, violated_schema=SCHEMA_PLAIN),
    CatalogPair("9",
                "SELECT COUNT(CASE WHEN c3 > 5 THEN c1 ELSE NULL END) FROM t1",
                "SELECT SUM(CASE WHEN c3 > 5 THEN 1 ELSE 0 END) FROM t1",
                SCHEMA_NOTNULL, violated_schema=SCHEMA_PLAIN),
    CatalogPair("10",
                "SELECT MAX(c1) FROM t1",
                "SELECT c1 FROM t1 ORDER BY c1 DESC LIMIT 1",
                SCHEMA_PLAIN, needs_db=True, empty_db_violates=True),
    CatalogPair("11",
                "SELECT * FROM t1",
                "SELECT c1, c2, c3 FROM t1",
                SCHEMA_PLAIN, violated_schema=SCHEMA_WIDE),
    CatalogPair("12",
                "SELECT c2 FROM t1 WHERE c1 = 15",
                "SELECT c2 FROM t1 WHERE c1 = '15'",
                SCHEMA_PLAIN,
                violated_pair=("SELECT c2 FROM t1 WHERE c1 = 15",
                               "SELECT c2 FROM t1 WHERE c1 = '015'")),
    CatalogPair("13",
                "SELECT child.note FROM parent JOIN child "
                "ON parent.p_id = child.p_id WHERE parent.label = 'cat'",
                "SELECT note FROM child WHERE p_id IN "
                "(SELECT p_id FROM parent WHERE label = 'cat')",
                SCHEMA_KEYS, violated_schema=SCHEMA_KEYS_NO_FK),
    CatalogPair("14",
                "SELECT child.note FROM child JOIN parent "
                "ON parent.p_id = child.p_id",
                "SELECT note FROM child",
                SCHEMA_KEYS, violated_schema=SCHEMA_KEYS_NO_FK),
    CatalogPair("15",
                "SELECT c1 FROM t1 WHERE SUBSTR(c2, 1, 4) = 'wolf' "
                "AND SUBSTR(c2, 5, 2) >= 'ag'",
                "SELECT c1 FROM t1 WHERE c2 >= 'wolfag'",
                SCHEMA_PLAIN,
                violated_pair=(
                    "SELECT c1 FROM t1 WHERE SUBSTR(c2, 1, 4) = 'wolf' "
                    "AND SUBSTR(c2, 6, 2) >= 'ag'",
                    "SELECT c1 FROM t1 WHERE c2 >= 'wolfag'")),
    CatalogPair("16",
                "SELECT c1 FROM t1 WHERE c2 LIKE 'wol%'",
                "SELECT c1 FROM t1 WHERE SUBSTR(c2, 1, 3) = 'wol'",
                SCHEMA_PLAIN,
                violated_pair=("SELECT c1 FROM t1 WHERE c2 LIKE 'wol%'",
                               "SELECT c1 FROM t1 WHERE SUBSTR(c2, 1, 2) = 'wol'")),
    CatalogPair("17",
                "SELECT c1 FROM t1 ORDER BY c2",
                "SELECT c1 FROM t1 ORDER BY JULIANDAY(c2)",
                SCHEMA_DATE),
    CatalogPair("18",
                "SELECT c1 FROM t1 WHERE c3 IN (1, 2, 3)",
                "SELECT c1 FROM t1 WHERE c3 = 3 OR c3 = 1 OR c3 = 2",
                SCHEMA_PLAIN),
    CatalogPair("19",
                "SELECT ta.a FROM ta JOIN tb ON ta.a = tb.b",
                "SELECT tb.b FROM ta JOIN tb ON ta.a = tb.b",
                load_schema("CREATE TABLE ta (a INTEGER, x TEXT); "
                            "CREATE TABLE tb (b INTEGER, y TEXT);")),
    CatalogPair("20",
                "SELECT c2 FROM t1 WHERE c1 IN "
                "(SELECT c1 FROM t1 WHERE c1 > 5)",
                "SELECT c2 FROM t1 WHERE c1 > 5",
                SCHEMA_PLAIN),
    CatalogPair("21",
                "SELECT c1 FROM t1",
                "SELECT c1 FROM t1 UNION SELECT c1 FROM t1",
                SCHEMA_UNIQUE),
    CatalogPair("22",
                "SELECT c1 FROM t1 WHERE c3 BETWEEN 1 AND 8",
                "SELECT c1 FROM t1 WHERE c3 >= 1 AND c3 <= 8",
                SCHEMA_PLAIN),
    CatalogPair("23",
                "SELECT c1 FROM t1 WHERE c3 != 7",
                "SELECT c1 FROM t1 WHERE NOT c3 = 7",
                SCHEMA_PLAIN),
    CatalogPair("24",
                "SELECT CASE WHEN c3 > 5 THEN 'hi' ELSE 'lo' END FROM t1",
                "SELECT IIF(c3 > 5, 'hi', 'lo') FROM t1",
                SCHEMA_PLAIN),
    CatalogPair("25",
                "SELECT ta.x FROM ta LEFT JOIN tb ON ta.a = tb.b "
                "WHERE tb.b IS NULL",
                "SELECT x FROM ta WHERE a NOT IN (SELECT b FROM tb)",
                SCHEMA_ANTI),
    CatalogPair("26",
                "WITH q AS (SELECT c1, c3 FROM t1 WHERE c3 > 2) "
                "SELECT c1 FROM q",
                "SELECT c1 FROM (SELECT c1, c3 FROM t1 WHERE c3 > 2)",
                SCHEMA_PLAIN),
]

ALL_PAIRS = PREPROCESSING_PAIRS + REWRITE_PAIRS
