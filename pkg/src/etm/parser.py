"""Recursive-descent parser for the SELECT subset used by Spider/BIRD SQLite.

Accepts a single SELECT statement (optionally WITH-prefixed). Comments,
trailing semicolons and redundant whitespace are stripped during lexing.
Unsupported syntax raises ParseError; there is never a silent partial parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast_nodes import (Between, Binary, Case, Cast, ColumnRef, Compound, Cte,
                        DerivedTable, FnCall, FromClause, InList, JoinItem,
                        LimitSpec, Literal, NamedTable, OrderItem, Paren,
                        Projection, QueryAst, SelectCore, Star, Subquery,
                        Unary)
from .errors import ParseError

KEYWORDS = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "LIMIT",
    "OFFSET", "DISTINCT", "ALL", "AS", "ON", "JOIN", "LEFT", "RIGHT", "FULL",
    "OUTER", "INNER", "CROSS", "UNION", "INTERSECT", "EXCEPT", "AND", "OR",
    "NOT", "IN", "IS", "NULL", "LIKE", "BETWEEN", "CASE", "WHEN", "THEN",
    "ELSE", "END", "CAST", "WITH", "ASC", "DESC", "EXISTS",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|--[^\n]*|/\*.*?\*/)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<string>'(?:[^']|'')*')
  | (?P<dquote>"(?:[^"]|"")*")
  | (?P<backtick>`[^`]*`)
  | (?P<bracket>\[[^\]]*\])
  | (?P<word>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><>|!=|<=|>=|==|\|\||[=<>+\-*/%(),.;])
""", re.VERBOSE | re.DOTALL)


@dataclass(frozen=True)
class Token:
    type: str     # 'KW' | 'ID' | 'QID' | 'NUMBER' | 'STRING' | 'OP' | 'EOF'
    value: str
    pos: int


def tokenize(sql: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(sql)
    while pos < n:
        m = _TOKEN_RE.match(sql, pos)
        if m is None:
            raise ParseError(pos, f"unexpected character {sql[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            pass
        elif kind == "number":
            tokens.append(Token("NUMBER", text, pos))
        elif kind == "string":
            tokens.append(Token("STRING", text[1:-1].replace("''", "'"), pos))
        elif kind == "dquote":
            tokens.append(Token("QID", text[1:-1].replace('""', '"'), pos))
        elif kind in ("backtick", "bracket"):
            tokens.append(Token("QID", text[1:-1], pos))
        elif kind == "word":
            upper = text.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KW", upper, pos))
            else:
                tokens.append(Token("ID", text, pos))
        else:
            op = {"<>": "!=", "==": "="}.get(text, text)
            tokens.append(Token("OP", op, pos))
        pos = m.end()
    tokens.append(Token("EOF", "", n))
    return tokens


def parse(sql: str) -> QueryAst:
    """Parse one SELECT statement into a QueryAst."""
    parser = _Parser(tokenize(sql))
    query = parser.parse_query()
    parser.skip_semicolons()
    parser.expect_eof()
    return query


_CMP_OPS = {"=", "!=", "<", ">", "<=", ">="}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # --- token helpers ---

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.type != "EOF":
            self.i += 1
        return tok

    def at_kw(self, *names: str) -> bool:
        t = self.peek()
        return t.type == "KW" and t.value in names

    def take_kw(self, *names: str) -> bool:
        if self.at_kw(*names):
            self.advance()
            return True
        return False

    def expect_kw(self, name: str) -> None:
        if not self.take_kw(name):
            self.error(f"expected {name}")

    def at_op(self, *ops: str) -> bool:
        t = self.peek()
        return t.type == "OP" and t.value in ops

    def take_op(self, *ops: str) -> bool:
        if self.at_op(*ops):
            self.advance()
            return True
        return False

    def expect_op(self, op: str) -> None:
        if not self.take_op(op):
            self.error(f"expected {op!r}")

    def error(self, message: str):
        t = self.peek()
        got = t.value or "end of input"
        raise ParseError(t.pos, f"{message}, got {got!r}")

    def skip_semicolons(self) -> None:
        while self.take_op(";"):
            pass

    def expect_eof(self) -> None:
        if self.peek().type != "EOF":
            self.error("unexpected trailing input")

    # --- query level ---

    def parse_query(self) -> QueryAst:
        ctes: list[Cte] = []
        if self.take_kw("WITH"):
            ctes.append(self.parse_cte())
            while self.take_op(","):
                ctes.append(self.parse_cte())
            seen = set()
            for c in ctes:
                key = c.name.lower()
                if key in seen:
                    self.error(f"duplicate CTE name {c.name!r}")
                seen.add(key)
        body = self.parse_set_expr()
        order_by: list[OrderItem] = []
        if self.take_kw("ORDER"):
            self.expect_kw("BY")
            order_by.append(self.parse_order_item())
            while self.take_op(","):
                order_by.append(self.parse_order_item())
        limit = None
        if self.take_kw("LIMIT"):
            limit = self.parse_limit()
        return QueryAst(body=body, order_by=tuple(order_by), limit=limit,
                        ctes=tuple(ctes))

    def parse_cte(self) -> Cte:
        name = self.expect_name("CTE name")
        self.expect_kw("AS")
        self.expect_op("(")
        query = self.parse_query()
        self.expect_op(")")
        return Cte(name, query)

    def parse_limit(self) -> LimitSpec:
        first = self.parse_limit_number()
        if self.take_kw("OFFSET"):
            return LimitSpec(count=first, offset=self.parse_limit_number())
        if self.take_op(","):
            # SQLite's LIMIT <offset>, <count>
            return LimitSpec(count=self.parse_limit_number(), offset=first)
        return LimitSpec(count=first)

    def parse_limit_number(self) -> int:
        t = self.peek()
        if t.type != "NUMBER" or not t.value.isdigit():
            self.error("expected a non-negative integer")
        self.advance()
        return int(t.value)

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        direction = "ASC"
        if self.take_kw("DESC"):
            direction = "DESC"
        elif self.take_kw("ASC"):
            direction = "ASC"
        return OrderItem(expr, direction)

    # --- set expressions ---

    def parse_set_expr(self):
        left = self.parse_set_operand()
        while True:
            if self.take_kw("UNION"):
                op = "UNION ALL" if self.take_kw("ALL") else "UNION"
            elif self.take_kw("INTERSECT"):
                op = "INTERSECT"
            elif self.take_kw("EXCEPT"):
                op = "EXCEPT"
            else:
                return left
            right = self.parse_set_operand()
            left = Compound(op, left, right)

    def parse_set_operand(self):
        if self.take_op("("):
            inner = self.parse_set_expr()
            self.expect_op(")")
            return inner
        if self.at_kw("SELECT"):
            return self.parse_select_core()
        self.error("expected SELECT")

    def parse_select_core(self) -> SelectCore:
        self.expect_kw("SELECT")
        distinct = False
        if self.take_kw("DISTINCT"):
            distinct = True
        else:
            self.take_kw("ALL")
        projections = [self.parse_projection()]
        while self.take_op(","):
            projections.append(self.parse_projection())
        from_ = None
        if self.take_kw("FROM"):
            from_ = self.parse_from()
        where = self.parse_expr() if self.take_kw("WHERE") else None
        group_by: list = []
        if self.take_kw("GROUP"):
            self.expect_kw("BY")
            group_by.append(self.parse_expr())
            while self.take_op(","):
                group_by.append(self.parse_expr())
        having = self.parse_expr() if self.take_kw("HAVING") else None
        return SelectCore(projections=tuple(projections), distinct=distinct,
                          from_=from_, where=where, group_by=tuple(group_by),
                          having=having)

    def parse_projection(self) -> Projection:
        expr = self.parse_expr()
        alias = None
        if self.take_kw("AS"):
            alias = self.expect_name("alias")
        elif self.peek().type in ("ID", "QID"):
            alias = self.advance().value
        return Projection(expr, alias)

    # --- FROM ---

    def parse_from(self) -> FromClause:
        base = self.parse_table_source()
        joins: list[JoinItem] = []
        while True:
            if self.take_op(","):
                joins.append(JoinItem("INNER", self.parse_table_source()))
                continue
            kind = self.parse_join_kind()
            if kind is None:
                break
            source = self.parse_table_source()
            on = self.parse_expr() if self.take_kw("ON") else None
            joins.append(JoinItem(kind, source, on))
        return FromClause(base, tuple(joins))

    def parse_join_kind(self):
        # CROSS JOIN and bare JOIN are synonyms of INNER JOIN in this dialect.
        if self.take_kw("JOIN"):
            return "INNER"
        if self.take_kw("INNER"):
            self.expect_kw("JOIN")
            return "INNER"
        if self.take_kw("CROSS"):
            self.expect_kw("JOIN")
            return "INNER"
        if self.take_kw("LEFT"):
            self.take_kw("OUTER")
            self.expect_kw("JOIN")
            return "LEFT"
        if self.take_kw("RIGHT"):
            self.take_kw("OUTER")
            self.expect_kw("JOIN")
            return "RIGHT"
        if self.take_kw("FULL"):
            self.take_kw("OUTER")
            self.expect_kw("JOIN")
            return "OUTER"
        if self.at_kw("OUTER"):
            self.error("OUTER JOIN requires LEFT, RIGHT or FULL")
        return None

    def parse_table_source(self):
        if self.take_op("("):
            if not self.at_kw("SELECT", "WITH"):
                self.error("expected a subquery")
            query = self.parse_query()
            self.expect_op(")")
            alias = self.parse_optional_alias()
            return DerivedTable(query, alias)
        t = self.peek()
        if t.type in ("ID", "QID"):
            self.advance()
            alias = self.parse_optional_alias()
            return NamedTable(t.value, alias, quoted=(t.type == "QID"))
        self.error("expected table name or subquery")

    def parse_optional_alias(self):
        if self.take_kw("AS"):
            return self.expect_name("alias")
        if self.peek().type in ("ID", "QID"):
            return self.advance().value
        return None

    def expect_name(self, what: str) -> str:
        t = self.peek()
        if t.type not in ("ID", "QID"):
            self.error(f"expected {what}")
        self.advance()
        return t.value

    # --- expressions (precedence climbing) ---

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.take_kw("OR"):
            left = Binary("OR", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.take_kw("AND"):
            left = Binary("AND", left, self.parse_not())
        return left

    def parse_not(self):
        if self.take_kw("NOT"):
            return Unary("NOT", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        while True:
            if self.peek().type == "OP" and self.peek().value in _CMP_OPS:
                op = self.advance().value
                left = Binary(op, left, self.parse_additive())
            elif self.at_kw("IS"):
                self.advance()
                negated = self.take_kw("NOT")
                right = self.parse_additive()
                left = Binary("IS NOT" if negated else "IS", left, right)
            elif self.at_kw("LIKE"):
                self.advance()
                left = Binary("LIKE", left, self.parse_additive())
            elif self.at_kw("BETWEEN"):
                self.advance()
                low = self.parse_additive()
                self.expect_kw("AND")
                high = self.parse_additive()
                left = Between(left, low, high)
            elif self.at_kw("IN"):
                self.advance()
                left = self.parse_in_rhs(left, negated=False)
            elif self.at_kw("NOT"):
                # postfix NOT LIKE / NOT IN / NOT BETWEEN
                if self.peek(1).type == "KW" and self.peek(1).value in ("LIKE", "IN", "BETWEEN"):
                    self.advance()
                    if self.take_kw("LIKE"):
                        left = Binary("NOT LIKE", left, self.parse_additive())
                    elif self.take_kw("IN"):
                        left = self.parse_in_rhs(left, negated=True)
                    else:
                        self.expect_kw("BETWEEN")
                        low = self.parse_additive()
                        self.expect_kw("AND")
                        high = self.parse_additive()
                        left = Between(left, low, high, negated=True)
                else:
                    return left
            else:
                return left

    def parse_in_rhs(self, target, negated: bool):
        self.expect_op("(")
        if self.at_kw("SELECT", "WITH"):
            query = self.parse_query()
            self.expect_op(")")
            return Binary("NOT IN" if negated else "IN", target, Subquery(query))
        items = [self.parse_expr()]
        while self.take_op(","):
            items.append(self.parse_expr())
        self.expect_op(")")
        return InList(target, tuple(items), negated=negated)

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.at_op("+", "-"):
            op = self.advance().value
            left = Binary(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self):
        left = self.parse_concat()
        while self.at_op("*", "/", "%"):
            op = self.advance().value
            left = Binary(op, left, self.parse_concat())
        return left

    def parse_concat(self):
        left = self.parse_unary()
        while self.at_op("||"):
            self.advance()
            left = Binary("||", left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.at_op("-", "+"):
            op = self.advance().value
            operand = self.parse_unary()
            if op == "-" and isinstance(operand, Literal) and operand.kind == "number":
                return Literal("number", -operand.value, "-" + operand.text)
            if op == "+":
                return operand
            return Unary(op, operand)
        return self.parse_primary()

    def parse_primary(self):
        t = self.peek()
        if t.type == "NUMBER":
            self.advance()
            value = int(t.value) if t.value.isdigit() else float(t.value)
            return Literal("number", value, t.value)
        if t.type == "STRING":
            self.advance()
            return Literal("string", t.value, t.value)
        if self.take_kw("NULL"):
            return Literal("null", None, "NULL")
        if self.at_kw("CASE"):
            return self.parse_case()
        if self.at_kw("CAST"):
            return self.parse_cast()
        if self.take_kw("EXISTS"):
            self.expect_op("(")
            query = self.parse_query()
            self.expect_op(")")
            return Unary("EXISTS", Subquery(query))
        if self.take_op("("):
            if self.at_kw("SELECT", "WITH"):
                query = self.parse_query()
                self.expect_op(")")
                return Subquery(query)
            inner = self.parse_expr()
            self.expect_op(")")
            return Paren(inner)
        if self.take_op("*"):
            return Star(None)
        if t.type in ("ID", "QID"):
            return self.parse_name_or_call()
        self.error("expected an expression")

    def parse_name_or_call(self):
        t = self.advance()
        quoted = t.type == "QID"
        if not quoted and self.at_op("("):
            return self.parse_fncall(t.value)
        if self.take_op("."):
            nxt = self.peek()
            if nxt.type == "OP" and nxt.value == "*":
                self.advance()
                return Star(t.value)
            if nxt.type in ("ID", "QID"):
                self.advance()
                return ColumnRef(t.value, nxt.value, table_quoted=quoted,
                                 column_quoted=(nxt.type == "QID"))
            self.error("expected column name after '.'")
        return ColumnRef(None, t.value, column_quoted=quoted)

    def parse_fncall(self, name: str):
        self.expect_op("(")
        distinct = bool(self.take_kw("DISTINCT"))
        args: list = []
        if not self.at_op(")"):
            if self.take_op("*"):
                args.append(Star(None))
            else:
                args.append(self.parse_expr())
                while self.take_op(","):
                    args.append(self.parse_expr())
        self.expect_op(")")
        return FnCall(name.lower(), tuple(args), distinct=distinct)

    def parse_case(self):
        self.expect_kw("CASE")
        operand = None
        if not self.at_kw("WHEN"):
            operand = self.parse_expr()
        branches = []
        while self.take_kw("WHEN"):
            cond = self.parse_expr()
            self.expect_kw("THEN")
            result = self.parse_expr()
            if operand is not None:
                # CASE x WHEN v ... desugars to CASE WHEN x = v ...
                cond = Binary("=", operand, cond)
            branches.append((cond, result))
        if not branches:
            self.error("CASE requires at least one WHEN branch")
        else_ = None
        if self.take_kw("ELSE"):
            else_ = self.parse_expr()
        self.expect_kw("END")
        return Case(tuple(branches), else_)

    def parse_cast(self):
        self.expect_kw("CAST")
        self.expect_op("(")
        operand = self.parse_expr()
        self.expect_kw("AS")
        words = [self.expect_name("type name")]
        while self.peek().type == "ID":
            words.append(self.advance().value)
        if self.take_op("("):
            self.parse_limit_number()
            if self.take_op(","):
                self.parse_limit_number()
            self.expect_op(")")
        self.expect_op(")")
        return Cast(operand, " ".join(w.lower() for w in words))
