"""Hand-written parse corpus used by round-trip and property tests."""

from fixtures_eval import EXAMPLES

EXTRA_QUERIES = [
    "SELECT name FROM dogs;",
    "SELECT c1 FROM t1 WHERE c1 IN (1, 2, 3);",
    "SELECT c1 FROM t1 WHERE c1 = 4 AND (c2 = 'y' OR c1 = 6);",
    "SELECT c1 FROM (SELECT * FROM t1)",
    "SELECT t.c1 FROM t1 AS t JOIN t2 ON t.c1 = t2.c2 "
    "WHERE c1 IN (SELECT c3 FROM t3 AS t)",
    'SELECT "t1"."c1" FROM "t1"',
    "SELECT COUNT(DISTINCT name), MAX(weight) FROM dogs GROUP BY breed_code "
    "HAVING COUNT(*) > 2 ORDER BY 2 DESC LIMIT 3 OFFSET 1",
    "WITH q AS (SELECT c1 FROM t1) SELECT * FROM q",
    "WITH a AS (SELECT c1 FROM t1), b AS (SELECT c1 FROM a) SELECT c1 FROM b",
    "SELECT a FROM t WHERE x BETWEEN 1 AND 5 OR y NOT IN (SELECT z FROM s) "
    "AND w IS NOT NULL",
    "SELECT CASE WHEN a > 1 THEN 'x' ELSE 'y' END FROM t",
    "SELECT CASE a WHEN 1 THEN 'x' WHEN 2 THEN 'y' END FROM t",
    "SELECT CAST(SUM(c1) AS FLOAT) / COUNT(*) FROM t1",
    "SELECT IIF(a = 1, 2, 3) FROM t",
    "SELECT weight FROM dogs ORDER BY weight DESC LIMIT 1",
    "SELECT a FROM t1 UNION SELECT b FROM t2 INTERSECT SELECT c FROM t3",
    "SELECT a FROM t1 EXCEPT (SELECT b FROM t2)",
    "SELECT a FROM t1 UNION ALL SELECT a FROM t1",
    "SELECT 1 + 2 * 3, -4, 'it''s' FROM t",
    "SELECT a FROM t1, t2 LEFT OUTER JOIN t3 ON t1.x = t3.y",
    "SELECT a FROM t1 CROSS JOIN t2",
    "SELECT julianday(d) FROM t ORDER BY julianday(d)",
    "SELECT substr(c, 1, 4) FROM t WHERE c LIKE 'wolf%'",
    "SELECT a FROM t WHERE NOT a = 3",
    "SELECT a FROM t WHERE a NOT LIKE 'x%' AND b NOT BETWEEN 1 AND 2",
    "SELECT a, a + 1 b FROM t",
    "SELECT t1.* FROM t1",
    "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM s WHERE s.x = t.a)",
    "SELECT a || 'suffix' FROM t",
    "SELECT a FROM t WHERE b IS NULL OR b IS NOT NULL",
    "SELECT a FROM t LIMIT 5, 10",
    "SELECT avg(a), total(b) FROM t WHERE c % 2 = 0",
    "SELECT `a` FROM `t`",
    "SELECT [a] FROM [t]",
    "SELECT a FROM t WHERE x = -1.5e2",
]

# every query appearing in the evaluation fixture, plus grammar exercises
CORPUS = sorted({ex.gold for ex in EXAMPLES}
                | {ex.pred for ex in EXAMPLES}
                | set(EXTRA_QUERIES))
