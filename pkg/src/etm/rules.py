"""Rewrite-rule catalog: metadata, rule selection, and assumption checking.

Rules 1..16 are gated on verifiable assumptions (schema constraints, or for
rule 10 a live instance); rules 17..26 hold unconditionally. The check here
implements the assumption column verbatim; individual rule matchers add
stricter structural guards where needed for soundness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownColumn, UnknownRule, UnknownTable
from .normalize import P_ALL
from .schema import Schema

HOLDS = "holds"
FAILS = "fails"
UNVERIFIABLE = "unverifiable"

ALL_RULES = frozenset(range(1, 27))


@dataclass(frozen=True)
class RuleInfo:
    id: int
    summary: str
    assumption: str | None


CATALOG: dict[int, RuleInfo] = {r.id: r for r in [
    RuleInfo(1, "ORDER BY c LIMIT 1 becomes WHERE c = (SELECT MIN/MAX(c) ...)",
             "c1 is UNIQUE"),
    RuleInfo(2, "drop DISTINCT when a projected column is unique",
             "c1 is UNIQUE"),
    RuleInfo(3, "merge INTERSECT/UNION of one table into AND/OR conditions",
             "c1 is UNIQUE"),
    RuleInfo(4, "drop extra GROUP BY keys next to a unique key",
             "c1 is UNIQUE"),
    RuleInfo(5, "EXCEPT becomes WHERE c NOT IN (subquery)",
             "c1 is UNIQUE and NOT NULL"),
    RuleInfo(6, "COUNT(c) becomes COUNT(*)", "c1 is NOT NULL"),
    RuleInfo(7, "drop WHERE c IS NOT NULL", "c1 is NOT NULL"),
    RuleInfo(8, "CAST(SUM(c) AS FLOAT) / COUNT(*) becomes AVG(c)",
             "c1 is NOT NULL"),
    RuleInfo(9, "COUNT(CASE WHEN d THEN 1 ELSE NULL END) becomes "
                "SUM(CASE WHEN d THEN 1 ELSE 0 END)", "c1 is NOT NULL"),
    RuleInfo(10, "ORDER BY c LIMIT 1 becomes MIN/MAX(c) projection",
             "t1 is not empty"),
    RuleInfo(11, "expand * to the explicit column list",
             "t1 consists of only the listed columns"),
    RuleInfo(12, "quoted number literal becomes a bare number",
             "x is a number not starting with zero"),
    RuleInfo(13, "IN (SELECT pk ...) becomes a JOIN on the key equality",
             "t1.c1 is a primary key referenced by foreign key t2.c2"),
    RuleInfo(14, "drop a JOIN used only for its key equality",
             "t1.c1 is a non-composite primary key referenced by t2.c2; "
             "selected columns come from t2"),
    RuleInfo(15, "prefix SUBSTR equality plus SUBSTR compare merges into one "
                 "string compare", "a + 1 = b"),
    RuleInfo(16, "LIKE 'x%' becomes SUBSTR(c, 1, n) = 'x'", "len(x) = n"),
    RuleInfo(17, "strip JULIANDAY in ORDER BY", None),
    RuleInfo(18, "chains of =/!= on one column become IN/NOT IN lists "
                 "(items sorted)", None),
    RuleInfo(19, "join-equal columns collapse to one canonical side", None),
    RuleInfo(20, "drop a self-table IN-subquery wrapper", None),
    RuleInfo(21, "drop an idempotent UNION/INTERSECT duplicate", None),
    RuleInfo(22, "BETWEEN becomes >= AND <=", None),
    RuleInfo(23, "push NOT through a comparison", None),
    RuleInfo(24, "IIF becomes CASE", None),
    RuleInfo(25, "LEFT JOIN ... IS NULL anti-join becomes NOT IN", None),
    RuleInfo(26, "inline a single-use CTE as a derived table", None),
]}


@dataclass(frozen=True)
class RuleSelection:
    """Which preprocessing steps and rewrite rules are enabled."""
    p_rules: frozenset = P_ALL
    rules: frozenset = ALL_RULES

    @staticmethod
    def full() -> "RuleSelection":
        return RuleSelection()

    @staticmethod
    def prefix(n: int) -> "RuleSelection":
        """All preprocessing steps plus rewrite rules 1..n (cumulative)."""
        return RuleSelection(P_ALL, frozenset(range(1, n + 1)))

    @staticmethod
    def p_prefix(k: int) -> "RuleSelection":
        """Preprocessing steps P0..Pk only, no rewrite rules."""
        return RuleSelection(frozenset(range(k + 1)), frozenset())

    @staticmethod
    def parse(text: str) -> "RuleSelection":
        """CLI rule-selection grammar: 'all' | 'P' | 'P<k>' | '<n>'."""
        text = text.strip()
        if text.lower() == "all":
            return RuleSelection.full()
        if text.upper() == "P":
            return RuleSelection.p_prefix(8)
        if text.upper().startswith("P") and text[1:].isdigit():
            return RuleSelection.p_prefix(int(text[1:]))
        if text.isdigit():
            n = int(text)
            if not 0 <= n <= 26:
                raise ValueError(f"rule prefix out of range: {text}")
            return RuleSelection.prefix(n)
        raise ValueError(f"cannot parse rule selection {text!r}")


@dataclass
class RuleBinding:
    """One matched rule instance: what was bound where, and the verdict."""
    rule_id: int
    bindings: dict = field(default_factory=dict)
    verdict: str = HOLDS
    path: str = ""

    def to_json(self) -> dict:
        return {"rule": self.rule_id, "bindings": dict(self.bindings),
                "verdict": self.verdict, "path": self.path}


def _col_verdict(schema: Schema, bindings: dict, predicate) -> str:
    table = bindings.get("t1")
    column = bindings.get("c1")
    if not table or not column:
        return UNVERIFIABLE
    try:
        return HOLDS if predicate(table, column) else FAILS
    except (UnknownTable, UnknownColumn):
        return UNVERIFIABLE


def check_assumption(rule_id: int, bindings: dict, schema: Schema,
                     db=None) -> str:
    """Verdict for a rule's assumption given its variable bindings."""
    if rule_id in (1, 2, 3, 4):
        return _col_verdict(schema, bindings, schema.is_unique)
    if rule_id == 5:
        return _col_verdict(
            schema, bindings,
            lambda t, c: schema.is_unique(t, c) and schema.is_non_null(t, c))
    if rule_id in (6, 7, 8):
        return _col_verdict(schema, bindings, schema.is_non_null)
    if rule_id == 9:
        if "c1" not in bindings:
            return HOLDS  # the THEN branch is a literal, nothing to verify
        return _col_verdict(schema, bindings, schema.is_non_null)
    if rule_id == 10:
        if db is None:
            return UNVERIFIABLE
        table = bindings.get("t1")
        if not table:
            return UNVERIFIABLE
        try:
            return HOLDS if db.table_row_count(table) > 0 else FAILS
        except Exception:
            return UNVERIFIABLE
    if rule_id == 11:
        table = bindings.get("t1")
        columns = bindings.get("columns")
        if not table or columns is None:
            return UNVERIFIABLE
        try:
            declared = {c.lower() for c in schema.all_columns(table)}
        except UnknownTable:
            return UNVERIFIABLE
        listed = {c.lower() for c in columns}
        return HOLDS if listed == declared else FAILS
    if rule_id == 12:
        text = str(bindings.get("x", ""))
        try:
            float(text)
        except ValueError:
            return FAILS
        return FAILS if text.startswith("0") else HOLDS
    if rule_id in (13, 14):
        a = (bindings.get("t1"), bindings.get("c1"))
        b = (bindings.get("t2"), bindings.get("c2"))
        if not all(a) or not all(b):
            return UNVERIFIABLE
        try:
            link = schema.pk_fk_link(a, b)
        except (UnknownTable, UnknownColumn):
            return UNVERIFIABLE
        if link is None:
            return FAILS
        pk, _ = link
        if pk != (a[0].lower(), a[1].lower()):
            return FAILS
        if rule_id == 14:
            t2 = b[0].lower()
            allowed = (f"{a[0].lower()}.{a[1].lower()}",)
            for ref in bindings.get("X", ()):
                ref = ref.lower()
                if not ref.startswith(t2 + ".") and ref not in allowed:
                    return FAILS
        return HOLDS
    if rule_id == 15:
        a, b = bindings.get("a"), bindings.get("b")
        if a is None or b is None:
            return UNVERIFIABLE
        return HOLDS if a + 1 == b else FAILS
    if rule_id == 16:
        x, n = bindings.get("x"), bindings.get("n")
        if x is None or n is None:
            return UNVERIFIABLE
        return HOLDS if len(str(x)) == n else FAILS
    if 17 <= rule_id <= 26:
        return HOLDS
    raise UnknownRule(f"no rule {rule_id} in the catalog")
