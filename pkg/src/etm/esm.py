"""Legacy exact-set-matching re-implementation, blind spots included.

This matcher reproduces the behavior of the classic set-based evaluation
script so comparison studies can quantify its failure modes. The documented
quirks are deliberate and asserted by tests:

  * JOIN conditions are parsed but never compared.
  * A top-level SELECT DISTINCT is parsed but never compared; DISTINCT is
    only compared inside aggregate calls, and only when distinct_check is on.
  * LIMIT values are never compared (presence only), even with value_check.
  * Aliases live in one global table for the whole query, so an alias
    redefined in a subquery silently rebinds the outer one.
  * All quoting is treated the same: any quoted token is a string literal.
  * Parentheses in conditions are flattened away.
  * Rejected as unparsable: IN followed by a value list, more than one
    subquery or set operator, FROM-subqueries, aliases without AS, column
    aliases, and expression syntax outside the legacy grammar (CASE, CAST,
    IIF, arbitrary functions).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EsmParseError
from .parser import Token, tokenize
from .schema import Schema

_AGGS = {"max", "min", "count", "sum", "avg"}
_CLAUSE_BOUNDARY = {"FROM", "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT",
                    "UNION", "INTERSECT", "EXCEPT"}
_CMP_OPS = {"=", "!=", "<", ">", "<=", ">="}


@dataclass(frozen=True)
class EsmFlags:
    value_check: bool = True
    distinct_check: bool = True


@dataclass(frozen=True)
class EsmQuery:
    select: frozenset
    tables: frozenset
    where: frozenset
    group: frozenset
    having: frozenset
    order: frozenset
    has_limit: bool
    compound: tuple | None  # (op, EsmQuery)


def parse_esm(sql: str, schema: Schema, flags: EsmFlags) -> EsmQuery:
    """Parse with the legacy grammar into comparable component sets."""
    tokens = [t for t in tokenize(sql) if not (t.type == "OP" and t.value == ";")]
    aliases = _global_aliases(tokens)
    budget = {"subqueries": 0}
    parser = _EsmParser(tokens, schema, flags, aliases, budget)
    query = parser.parse_query(nested=False)
    if parser.peek().type != "EOF":
        raise EsmParseError(f"unparsed trailing input {parser.peek().value!r}")
    return query


def esm_structurally_equal(gold: EsmQuery, pred: EsmQuery) -> bool:
    return gold == pred


def _global_aliases(tokens: list[Token]) -> dict:
    """One alias table for the entire query; later definitions win. This is
    the scoping flaw under test, kept on purpose."""
    out = {}
    for i in range(len(tokens) - 2):
        a, kw, b = tokens[i], tokens[i + 1], tokens[i + 2]
        if (kw.type == "KW" and kw.value == "AS"
                and a.type in ("ID", "QID") and b.type in ("ID", "QID")):
            out[b.value.lower()] = a.value.lower()
    return out


class _EsmParser:
    def __init__(self, tokens, schema: Schema, flags: EsmFlags,
                 aliases: dict, budget: dict):
        self.tokens = tokens
        self.i = 0
        self.schema = schema
        self.flags = flags
        self.aliases = aliases
        self.budget = budget

    # --- token helpers ---

    def peek(self, ahead=0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.type != "EOF":
            self.i += 1
        return t

    def at_kw(self, *names) -> bool:
        t = self.peek()
        return t.type == "KW" and t.value in names

    def take_kw(self, *names) -> bool:
        if self.at_kw(*names):
            self.advance()
            return True
        return False

    def at_op(self, *ops) -> bool:
        t = self.peek()
        return t.type == "OP" and t.value in ops

    def take_op(self, *ops) -> bool:
        if self.at_op(*ops):
            self.advance()
            return True
        return False

    def fail(self, message: str):
        raise EsmParseError(message)

    # --- query ---

    def parse_query(self, nested: bool) -> EsmQuery:
        if not self.take_kw("SELECT"):
            self.fail("expected SELECT")
        self.take_kw("DISTINCT") or self.take_kw("ALL")  # parsed, not compared
        select = frozenset(self.parse_select_items())
        tables = frozenset(self.parse_from()) if self.take_kw("FROM") else frozenset()
        where = frozenset(self.parse_conditions(nested)) if self.take_kw("WHERE") else frozenset()
        group = frozenset()
        if self.take_kw("GROUP"):
            if not self.take_kw("BY"):
                self.fail("expected BY")
            group = frozenset(self.parse_unit_list())
        having = frozenset(self.parse_conditions(nested)) if self.take_kw("HAVING") else frozenset()
        order = frozenset()
        if self.take_kw("ORDER"):
            if not self.take_kw("BY"):
                self.fail("expected BY")
            order = frozenset(self.parse_order_items())
        has_limit = False
        if self.take_kw("LIMIT"):
            has_limit = True
            self.advance()  # the value is disregarded
            if self.take_kw("OFFSET") or self.take_op(","):
                self.advance()
        compound = None
        for op in ("UNION", "INTERSECT", "EXCEPT"):
            if self.take_kw(op):
                self.take_kw("ALL")
                self.use_subquery_budget()
                compound = (op.lower(), self.parse_query(nested))
                break
        return EsmQuery(select, tables, where, group, having, order,
                        has_limit, compound)

    def use_subquery_budget(self):
        self.budget["subqueries"] += 1
        if self.budget["subqueries"] > 1:
            self.fail("only a single subquery, intersection, or union "
                      "operator is supported")

    # --- SELECT items ---

    def parse_select_items(self):
        items = [("none",) + self.parse_unit()]
        if self.take_kw("AS") or self.peek().type == "ID":
            self.fail("only table names can have aliases")
        while self.take_op(","):
            items.append(("none",) + self.parse_unit())
            if self.take_kw("AS") or self.peek().type == "ID":
                self.fail("only table names can have aliases")
        return items

    def parse_unit(self):
        """(representation, agg_distinct) for a column/aggregate/literal."""
        t = self.peek()
        if t.type == "KW" and t.value in ("CASE", "CAST", "EXISTS"):
            self.fail(f"unsupported keyword {t.value}")
        if t.type == "ID" and t.value.lower() in _AGGS \
                and self.peek(1).type == "OP" and self.peek(1).value == "(":
            agg = self.advance().value.lower()
            self.advance()  # (
            distinct = bool(self.take_kw("DISTINCT"))
            inner = self.parse_column_or_star()
            if not self.take_op(")"):
                self.fail("expected ) after aggregate")
            if not self.flags.distinct_check:
                distinct = False
            return (f"{agg}({inner})", distinct)
        if t.type == "ID" and self.peek(1).type == "OP" \
                and self.peek(1).value == "(":
            self.fail(f"unsupported function {t.value!r}")
        if t.type in ("NUMBER", "STRING", "QID"):
            self.advance()
            return (self.mask_value(t), False)
        if t.type == "KW" and t.value == "NULL":
            self.advance()
            return ("null", False)
        return (self.parse_column_or_star(), False)

    def parse_column_or_star(self) -> str:
        if self.take_op("*"):
            return "*"
        t = self.peek()
        if t.type != "ID":
            self.fail(f"expected column, got {t.value!r}")
        self.advance()
        first = t.value.lower()
        if self.take_op("."):
            if self.take_op("*"):
                return f"{self.resolve_table(first)}.*"
            col = self.peek()
            if col.type not in ("ID", "QID"):
                self.fail("expected column after '.'")
            self.advance()
            return f"{self.resolve_table(first)}.{col.value.lower()}"
        return self.resolve_bare_column(first)

    def resolve_table(self, name: str) -> str:
        return self.aliases.get(name, name)

    def resolve_bare_column(self, column: str) -> str:
        for table in self.schema.tables:
            if self.schema.has_column(table.name, column):
                return f"{table.name.lower()}.{column}"
        return column

    def mask_value(self, token: Token) -> str:
        if not self.flags.value_check:
            return "__value__"
        if token.type == "NUMBER":
            return str(float(token.value))
        return str(token.value).lower()

    # --- FROM ---

    def parse_from(self):
        tables = [self.parse_table_ref()]
        while True:
            if self.take_op(","):
                tables.append(self.parse_table_ref())
                continue
            took_kind = (self.take_kw("LEFT") or self.take_kw("RIGHT")
                         or self.take_kw("FULL") or self.take_kw("INNER")
                         or self.take_kw("CROSS"))
            if took_kind:
                self.take_kw("OUTER")  # join kinds are not distinguished
            if self.take_kw("JOIN"):
                tables.append(self.parse_table_ref())
                if self.take_kw("ON"):
                    self.discard_join_condition()
                continue
            if took_kind:
                self.fail("expected JOIN")
            break
        return tables

    def parse_table_ref(self) -> str:
        if self.at_op("("):
            self.fail("cannot retrieve columns from a subquery in FROM")
        t = self.peek()
        if t.type not in ("ID", "QID"):
            self.fail(f"expected table name, got {t.value!r}")
        self.advance()
        name = t.value.lower()
        if self.take_kw("AS"):
            alias = self.advance()
            if alias.type not in ("ID", "QID"):
                self.fail("expected alias name")
        elif self.peek().type in ("ID", "QID"):
            self.fail("table aliases must be defined with AS")
        return name

    def discard_join_condition(self):
        # parsed for syntax, never compared: the flaw behind bogus ON clauses
        depth = 0
        while True:
            t = self.peek()
            if t.type == "EOF":
                return
            if t.type == "KW" and t.value in _CLAUSE_BOUNDARY and depth == 0:
                return
            if t.type == "KW" and t.value in ("JOIN", "LEFT", "RIGHT", "FULL",
                                              "INNER", "CROSS") and depth == 0:
                return
            if t.type == "OP" and t.value == "(":
                depth += 1
            elif t.type == "OP" and t.value == ")":
                if depth == 0:
                    return
                depth -= 1
            elif t.type == "OP" and t.value == "," and depth == 0:
                return
            self.advance()

    # --- conditions ---

    def parse_conditions(self, nested: bool):
        atoms = []
        depth = 0
        while True:
            t = self.peek()
            if t.type == "EOF":
                break
            if t.type == "KW" and t.value in _CLAUSE_BOUNDARY:
                break
            if t.type == "KW" and t.value in ("AND", "OR"):
                self.advance()
                continue
            if t.type == "OP" and t.value == "(":
                depth += 1  # parentheses are flattened away
                self.advance()
                continue
            if t.type == "OP" and t.value == ")":
                if depth == 0:
                    break
                depth -= 1
                self.advance()
                continue
            atoms.append(self.parse_atom())
        return atoms

    def parse_atom(self):
        negated = self.take_kw("NOT")
        left = self.parse_value_operand()
        if self.take_kw("IS"):
            if self.take_kw("NOT"):
                negated = True
            if not self.take_kw("NULL"):
                self.fail("expected NULL after IS")
            return (left, "is not" if negated else "is", "null")
        if self.take_kw("NOT"):
            negated = True
        if self.take_kw("LIKE"):
            right = self.parse_value_operand()
            return (left, "not like" if negated else "like", right)
        if self.take_kw("BETWEEN"):
            low = self.parse_value_operand()
            if not self.take_kw("AND"):
                self.fail("expected AND in BETWEEN")
            high = self.parse_value_operand()
            return (left, "not between" if negated else "between", low, high)
        if self.take_kw("IN"):
            right = self.parse_in_operand()
            return (left, "not in" if negated else "in", right)
        t = self.peek()
        if t.type == "OP" and t.value in _CMP_OPS:
            self.advance()
            right = self.parse_value_operand()
            op = t.value
            if negated:
                op = f"not {op}"
            return (left, op, right)
        self.fail(f"unsupported condition near {t.value!r}")

    def parse_value_operand(self):
        t = self.peek()
        if t.type in ("NUMBER", "STRING", "QID"):
            self.advance()
            return self.mask_value(t)
        if t.type == "KW" and t.value == "NULL":
            self.advance()
            return "null"
        if t.type == "OP" and t.value == "(":
            if self.peek(1).type == "KW" and self.peek(1).value in ("SELECT", "WITH"):
                return self.parse_subquery_operand()
            self.fail("cannot parse a list of values")
        return self.parse_column_or_star()

    def parse_in_operand(self):
        if not self.at_op("("):
            return self.parse_value_operand()
        if self.peek(1).type == "KW" and self.peek(1).value in ("SELECT", "WITH"):
            return self.parse_subquery_operand()
        self.fail("cannot parse a list of values")

    def parse_subquery_operand(self):
        self.advance()  # (
        self.use_subquery_budget()
        sub = self.parse_query(nested=True)
        if not self.take_op(")"):
            self.fail("expected ) after subquery")
        return sub

    # --- GROUP BY / ORDER BY ---

    def parse_unit_list(self):
        units = [self.parse_unit()[0]]
        while self.take_op(","):
            units.append(self.parse_unit()[0])
        return units

    def parse_order_items(self):
        items = []
        while True:
            unit = self.parse_unit()[0]
            direction = "desc" if self.take_kw("DESC") else "asc"
            self.take_kw("ASC")
            items.append((unit, direction))
            if not self.take_op(","):
                break
        return items
