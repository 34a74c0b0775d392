"""Typed AST for the SQLite-flavored SELECT subset, plus a deterministic writer.

Trees are immutable (frozen dataclasses with tuple-valued children) so parsed
queries can be shared freely across workers. `sql()` produces deterministic
text that re-parses to a structurally equal tree; it is also the canonical
ordering key used by the normalizer.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Optional, Union


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    kind: str                 # 'number' | 'string' | 'null'
    value: object             # int | float | str | None
    text: str = ""            # source spelling; lets rules inspect e.g. leading zeros

    def __eq__(self, other):
        if not isinstance(other, Literal):
            return NotImplemented
        if self.kind != other.kind:
            return False
        if self.kind == "number":
            return self.value == other.value  # 150 == 150.0
        return self.value == other.value

    def __hash__(self):
        return hash((self.kind, self.value))

    def sql(self) -> str:
        if self.kind == "null":
            return "NULL"
        if self.kind == "string":
            return "'" + str(self.value).replace("'", "''") + "'"
        v = self.value
        if isinstance(v, float) and v == int(v):
            return str(int(v))
        return str(v)


@dataclass(frozen=True)
class ColumnRef:
    table: Optional[str]
    column: str
    table_quoted: bool = False
    column_quoted: bool = False

    def sql(self) -> str:
        col = f'"{self.column}"' if self.column_quoted else self.column
        if self.table is None:
            return col
        tab = f'"{self.table}"' if self.table_quoted else self.table
        return f"{tab}.{col}"


@dataclass(frozen=True)
class Star:
    table: Optional[str] = None

    def sql(self) -> str:
        return f"{self.table}.*" if self.table else "*"


@dataclass(frozen=True)
class Unary:
    op: str                   # '-' | '+' | 'NOT' | 'EXISTS'
    operand: "Expr"

    def sql(self) -> str:
        inner = _wrap(self.operand, _prec_of(self))
        if self.op in ("-", "+"):
            return f"{self.op}{inner}"
        return f"{self.op} {inner}"


@dataclass(frozen=True)
class Binary:
    op: str                   # =,!=,<,>,<=,>=,AND,OR,+,-,*,/,%,||,LIKE,NOT LIKE,IS,IS NOT,IN,NOT IN
    left: "Expr"
    right: "Expr"

    def sql(self) -> str:
        p = _prec_of(self)
        return f"{_wrap(self.left, p)} {self.op} {_wrap(self.right, p, right=True)}"


@dataclass(frozen=True)
class FnCall:
    name: str                 # stored lowercase by the parser
    args: tuple
    distinct: bool = False

    def sql(self) -> str:
        inner = ", ".join(a.sql() for a in self.args)
        if self.distinct:
            inner = "DISTINCT " + inner
        return f"{self.name}({inner})"


@dataclass(frozen=True)
class Cast:
    operand: "Expr"
    to_type: str              # lowercase type name, e.g. 'float'

    def sql(self) -> str:
        return f"CAST({self.operand.sql()} AS {self.to_type.upper()})"


@dataclass(frozen=True)
class Case:
    branches: tuple           # tuple of (cond: Expr, result: Expr)
    else_: Optional["Expr"] = None

    def sql(self) -> str:
        parts = ["CASE"]
        for cond, res in self.branches:
            parts.append(f"WHEN {cond.sql()} THEN {res.sql()}")
        if self.else_ is not None:
            parts.append(f"ELSE {self.else_.sql()}")
        parts.append("END")
        return " ".join(parts)


@dataclass(frozen=True)
class InList:
    target: "Expr"
    items: tuple
    negated: bool = False

    def sql(self) -> str:
        kw = "NOT IN" if self.negated else "IN"
        items = ", ".join(i.sql() for i in self.items)
        return f"{_wrap(self.target, 7)} {kw} ({items})"


@dataclass(frozen=True)
class Between:
    target: "Expr"
    low: "Expr"
    high: "Expr"
    negated: bool = False

    def sql(self) -> str:
        kw = "NOT BETWEEN" if self.negated else "BETWEEN"
        return (f"{_wrap(self.target, 7)} {kw} "
                f"{_wrap(self.low, 7)} AND {_wrap(self.high, 7)}")


@dataclass(frozen=True)
class Subquery:
    query: "QueryAst"

    def sql(self) -> str:
        return f"({self.query.sql()})"


@dataclass(frozen=True)
class Paren:
    operand: "Expr"

    def sql(self) -> str:
        return f"({self.operand.sql()})"


Expr = Union[Literal, ColumnRef, Star, Unary, Binary, FnCall, Cast, Case,
             InList, Between, Subquery, Paren]


# --- query structure -------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    expr: Expr
    alias: Optional[str] = None

    def sql(self) -> str:
        if self.alias:
            return f"{self.expr.sql()} AS {self.alias}"
        return self.expr.sql()


@dataclass(frozen=True)
class NamedTable:
    name: str
    alias: Optional[str] = None
    quoted: bool = False

    def sql(self) -> str:
        base = f'"{self.name}"' if self.quoted else self.name
        return f"{base} AS {self.alias}" if self.alias else base


@dataclass(frozen=True)
class DerivedTable:
    query: "QueryAst"
    alias: Optional[str] = None

    def sql(self) -> str:
        base = f"({self.query.sql()})"
        return f"{base} AS {self.alias}" if self.alias else base


TableSource = Union[NamedTable, DerivedTable]

JOIN_KINDS = ("INNER", "LEFT", "RIGHT", "OUTER", "CROSS")


@dataclass(frozen=True)
class JoinItem:
    kind: str                 # one of JOIN_KINDS ('OUTER' means FULL OUTER)
    source: TableSource
    on: Optional[Expr] = None

    def sql(self) -> str:
        kw = {"INNER": "JOIN", "LEFT": "LEFT JOIN", "RIGHT": "RIGHT JOIN",
              "OUTER": "FULL JOIN", "CROSS": "CROSS JOIN"}[self.kind]
        s = f"{kw} {self.source.sql()}"
        if self.on is not None:
            s += f" ON {self.on.sql()}"
        return s


@dataclass(frozen=True)
class FromClause:
    base: TableSource
    joins: tuple = ()

    def sql(self) -> str:
        return " ".join([self.base.sql()] + [j.sql() for j in self.joins])


@dataclass(frozen=True)
class SelectCore:
    projections: tuple        # non-empty tuple of Projection
    distinct: bool = False
    from_: Optional[FromClause] = None
    where: Optional[Expr] = None
    group_by: tuple = ()
    having: Optional[Expr] = None

    def sql(self) -> str:
        parts = ["SELECT"]
        if self.distinct:
            parts.append("DISTINCT")
        parts.append(", ".join(p.sql() for p in self.projections))
        if self.from_ is not None:
            parts.append("FROM " + self.from_.sql())
        if self.where is not None:
            parts.append("WHERE " + self.where.sql())
        if self.group_by:
            parts.append("GROUP BY " + ", ".join(e.sql() for e in self.group_by))
        if self.having is not None:
            parts.append("HAVING " + self.having.sql())
        return " ".join(parts)


@dataclass(frozen=True)
class Compound:
    op: str                   # 'UNION' | 'UNION ALL' | 'INTERSECT' | 'EXCEPT'
    left: "SetExpr"
    right: "SetExpr"

    def sql(self) -> str:
        # Left-deep chains need no parentheses (set ops are left-associative);
        # a compound right child does, to preserve the tree shape on re-parse.
        left = self.left.sql()
        right = self.right.sql()
        if isinstance(self.right, Compound):
            right = f"({right})"
        return f"{left} {self.op} {right}"


SetExpr = Union[SelectCore, Compound]


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    direction: str = "ASC"    # 'ASC' | 'DESC'

    def sql(self) -> str:
        return f"{self.expr.sql()} {self.direction}"


@dataclass(frozen=True)
class LimitSpec:
    count: int
    offset: Optional[int] = None

    def sql(self) -> str:
        s = f"LIMIT {self.count}"
        if self.offset is not None:
            s += f" OFFSET {self.offset}"
        return s


@dataclass(frozen=True)
class Cte:
    name: str
    query: "QueryAst"

    def sql(self) -> str:
        return f"{self.name} AS ({self.query.sql()})"


@dataclass(frozen=True)
class QueryAst:
    body: SetExpr
    order_by: tuple = ()
    limit: Optional[LimitSpec] = None
    ctes: tuple = ()

    def sql(self) -> str:
        parts = []
        if self.ctes:
            parts.append("WITH " + ", ".join(c.sql() for c in self.ctes))
        parts.append(self.body.sql())
        if self.order_by:
            parts.append("ORDER BY " + ", ".join(o.sql() for o in self.order_by))
        if self.limit is not None:
            parts.append(self.limit.sql())
        return " ".join(parts)


def serialize(ast: QueryAst) -> str:
    """Deterministic SQL text for a query tree."""
    return ast.sql()


# --- serializer precedence -------------------------------------------------

_BINARY_PREC = {
    "OR": 1, "AND": 2,
    "=": 4, "!=": 4, "<": 4, ">": 4, "<=": 4, ">=": 4,
    "IS": 4, "IS NOT": 4, "LIKE": 4, "NOT LIKE": 4, "IN": 4, "NOT IN": 4,
    "+": 7, "-": 7,
    "*": 8, "/": 8, "%": 8,
    "||": 9,
}


def _prec_of(node) -> int:
    if isinstance(node, Binary):
        return _BINARY_PREC[node.op]
    if isinstance(node, (Between, InList)):
        return 4
    if isinstance(node, Unary):
        return 3 if node.op == "NOT" else 11
    return 100


def _wrap(node, parent_prec: int, right: bool = False) -> str:
    """Parenthesize a child whose shape would not survive re-parsing.

    Raw parse trees never trigger this (explicit parens become Paren nodes);
    rewritten trees may.
    """
    p = _prec_of(node)
    if p < parent_prec or (p == parent_prec and right and p < 100):
        return f"({node.sql()})"
    return node.sql()


# --- tree utilities --------------------------------------------------------

AST_NODES = (Literal, ColumnRef, Star, Unary, Binary, FnCall, Cast, Case,
             InList, Between, Subquery, Paren, Projection, NamedTable,
             DerivedTable, JoinItem, FromClause, SelectCore, Compound,
             OrderItem, LimitSpec, Cte, QueryAst)


def is_node(x) -> bool:
    return isinstance(x, AST_NODES)


def transform(node, fn, descend=None):
    """Post-order rebuild: apply fn to every node, children first.

    fn(node) returns a replacement node (or the node itself). descend(node)
    may return False to leave a subtree untouched (fn still runs on its root).
    """
    if isinstance(node, tuple):
        return tuple(transform(x, fn, descend) for x in node)
    if not is_node(node):
        return node
    if descend is None or descend(node):
        changes = {}
        for f in fields(node):
            old = getattr(node, f.name)
            new = transform(old, fn, descend)
            if new is not old:
                changes[f.name] = new
        if changes:
            node = dataclasses.replace(node, **changes)
    return fn(node)


def walk(node, descend=None):
    """Yield every AST node in the subtree, parents before children."""
    if isinstance(node, tuple):
        for x in node:
            yield from walk(x, descend)
        return
    if not is_node(node):
        return
    yield node
    if descend is not None and not descend(node):
        return
    for f in fields(node):
        yield from walk(getattr(node, f.name), descend)


def expr_scope(node) -> bool:
    """descend predicate that stays inside one query scope (does not enter
    subqueries or derived tables)."""
    return not isinstance(node, (Subquery, DerivedTable, QueryAst))


def flatten_chain(expr, op: str):
    """Flatten a left/right-nested Binary chain of one operator into a list."""
    if isinstance(expr, Binary) and expr.op == op:
        return flatten_chain(expr.left, op) + flatten_chain(expr.right, op)
    return [expr]


def build_chain(items, op: str):
    """Rebuild a left-deep Binary chain from a non-empty list."""
    out = items[0]
    for item in items[1:]:
        out = Binary(op, out, item)
    return out
