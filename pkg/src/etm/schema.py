"""Database schema model and the constraint predicates that gate rewrites.

A schema can be loaded from three document shapes: the native JSON format
(see README), the Spider/BIRD tables-metadata JSON, or a SQLite CREATE TABLE
script. Constraint information that a source does not carry defaults to
False, so the corresponding assumptions are unverifiable and the gated
rewrites stay off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import SchemaError, UnknownColumn, UnknownTable
from .parser import tokenize


@dataclass(frozen=True)
class Column:
    name: str
    declared_type: str = ""
    is_primary_key: bool = False   # true only for a sole (non-composite) PK column
    is_unique: bool = False
    is_not_null: bool = False


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple
    primary_key: tuple = ()        # all PK member columns, composite included


@dataclass(frozen=True)
class FkLink:
    from_table: str
    from_column: str
    to_table: str
    to_column: str


_NUMERIC_TYPE_HINTS = ("int", "real", "floa", "doub", "num", "dec", "bool")


class Schema:
    """Immutable constraint model for one database."""

    def __init__(self, db_id: str, tables: list[Table], foreign_keys: list[FkLink]):
        self.db_id = db_id
        self.tables = tuple(tables)
        self.foreign_keys = tuple(foreign_keys)
        self._by_table: dict[str, Table] = {}
        self._by_column: dict[tuple, Column] = {}
        for t in self.tables:
            key = t.name.lower()
            if key in self._by_table:
                raise SchemaError(f"duplicate table {t.name!r}")
            if not t.columns:
                raise SchemaError(f"table {t.name!r} has no columns")
            self._by_table[key] = t
            for c in t.columns:
                ckey = (key, c.name.lower())
                if ckey in self._by_column:
                    raise SchemaError(f"duplicate column {t.name}.{c.name}")
                self._by_column[ckey] = c
        for fk in self.foreign_keys:
            for t, c in ((fk.from_table, fk.from_column), (fk.to_table, fk.to_column)):
                if (t.lower(), c.lower()) not in self._by_column:
                    raise SchemaError(f"foreign key references unknown column {t}.{c}")

    # --- lookup ---

    def has_table(self, name: str) -> bool:
        return name.lower() in self._by_table

    def table(self, name: str) -> Table:
        t = self._by_table.get(name.lower())
        if t is None:
            raise UnknownTable(f"unknown table {name!r}")
        return t

    def has_column(self, table: str, column: str) -> bool:
        return (table.lower(), column.lower()) in self._by_column

    def column(self, table: str, column: str) -> Column:
        self.table(table)
        c = self._by_column.get((table.lower(), column.lower()))
        if c is None:
            raise UnknownColumn(f"unknown column {table}.{column}")
        return c

    def all_columns(self, table: str) -> list[str]:
        """Column names in declaration order (drives star expansion)."""
        return [c.name for c in self.table(table).columns]

    # --- constraint predicates ---

    def is_unique(self, table: str, column: str) -> bool:
        c = self.column(table, column)
        return c.is_unique or c.is_primary_key

    def is_non_null(self, table: str, column: str) -> bool:
        c = self.column(table, column)
        return c.is_not_null or c.is_primary_key

    def is_sole_primary_key(self, table: str, column: str) -> bool:
        """True when the column is the entire, non-composite primary key."""
        self.column(table, column)
        pk = self.table(table).primary_key
        return len(pk) == 1 and pk[0].lower() == column.lower()

    def pk_fk_link(self, a: tuple, b: tuple) -> Optional[tuple]:
        """Return ((pk_table, pk_column), (fk_table, fk_column)) when a recorded
        foreign key connects a and b with a sole-primary-key target; None
        otherwise. a and b are (table, column) pairs in either order."""
        (ta, ca), (tb, cb) = a, b
        self.column(ta, ca)
        self.column(tb, cb)
        ka = (ta.lower(), ca.lower())
        kb = (tb.lower(), cb.lower())
        if ka == kb:
            return None
        for fk in self.foreign_keys:
            src = (fk.from_table.lower(), fk.from_column.lower())
            dst = (fk.to_table.lower(), fk.to_column.lower())
            if {src, dst} == {ka, kb} and self.is_sole_primary_key(*dst):
                return (fk.to_table.lower(), fk.to_column.lower()), src
        return None

    def numeric_affinity(self, table: str, column: str) -> bool:
        t = self.column(table, column).declared_type.lower()
        return any(h in t for h in _NUMERIC_TYPE_HINTS)


def load_schema(document) -> Schema:
    """Build a Schema from a native JSON dict, a Spider-style metadata dict,
    or a CREATE TABLE script."""
    if isinstance(document, str):
        return _load_ddl(document)
    if isinstance(document, dict):
        if "tables" in document:
            return _load_native(document)
        if "column_names_original" in document or "column_names" in document:
            return _load_spider(document)
    raise SchemaError("unrecognized schema document")


def _pk_flags(members: list[str]):
    sole = len(members) == 1
    return {m.lower(): sole for m in members}


def _load_native(doc: dict) -> Schema:
    tables = []
    for t in doc.get("tables", []):
        pk_members = [c["name"] for c in t.get("columns", []) if c.get("primary_key")]
        sole = len(pk_members) == 1
        cols = []
        for c in t.get("columns", []):
            is_pk_member = bool(c.get("primary_key"))
            cols.append(Column(
                name=c["name"],
                declared_type=c.get("type", ""),
                is_primary_key=is_pk_member and sole,
                is_unique=bool(c.get("unique")) or (is_pk_member and sole),
                is_not_null=bool(c.get("not_null")) or is_pk_member,
            ))
        tables.append(Table(t["name"], tuple(cols), tuple(pk_members)))
    fks = [FkLink(f["from"][0], f["from"][1], f["to"][0], f["to"][1])
           for f in doc.get("foreign_keys", [])]
    return Schema(doc.get("db_id", ""), tables, fks)


def _load_spider(doc: dict) -> Schema:
    table_names = doc.get("table_names_original") or doc.get("table_names") or []
    col_pairs = doc.get("column_names_original") or doc.get("column_names") or []
    col_types = doc.get("column_types") or [""] * len(col_pairs)
    pk_entries = doc.get("primary_keys") or []
    fk_pairs = doc.get("foreign_keys") or []

    pk_idx: set[int] = set()
    for entry in pk_entries:
        if isinstance(entry, list):
            pk_idx.update(entry)
        else:
            pk_idx.add(entry)

    per_table: dict[int, list[tuple[int, str, str]]] = {}
    for idx, (t_idx, col_name) in enumerate(col_pairs):
        if t_idx < 0:
            continue  # the synthetic "*" column
        per_table.setdefault(t_idx, []).append((idx, col_name, col_types[idx]))

    tables = []
    col_lookup: dict[int, tuple[str, str]] = {}
    for t_idx, name in enumerate(table_names):
        entries = per_table.get(t_idx, [])
        if not entries:
            raise SchemaError(f"table {name!r} has no columns")
        pk_members = [cname for idx, cname, _ in entries if idx in pk_idx]
        sole = len(pk_members) == 1
        cols = []
        for idx, cname, ctype in entries:
            is_pk_member = idx in pk_idx
            cols.append(Column(
                name=cname,
                declared_type=ctype,
                is_primary_key=is_pk_member and sole,
                is_unique=is_pk_member and sole,
                is_not_null=is_pk_member,
            ))
            col_lookup[idx] = (name, cname)
        tables.append(Table(name, tuple(cols), tuple(pk_members)))

    fks = []
    for from_idx, to_idx in fk_pairs:
        ft, fc = col_lookup[from_idx]
        tt, tc = col_lookup[to_idx]
        fks.append(FkLink(ft, fc, tt, tc))
    return Schema(doc.get("db_id", ""), tables, fks)


# --- DDL loader --------------------------------------------------------------

class _DdlCursor:
    def __init__(self, sql: str):
        self.tokens = tokenize(sql)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def done(self) -> bool:
        return self.peek().type == "EOF"

    def advance(self):
        tok = self.tokens[self.i]
        if tok.type != "EOF":
            self.i += 1
        return tok

    def word(self) -> str:
        """Uppercased text of the current token when it is word-like."""
        t = self.peek()
        return t.value.upper() if t.type in ("ID", "KW", "QID") else ""

    def take_word(self, *words: str) -> bool:
        if self.word() in words:
            self.advance()
            return True
        return False

    def expect_word(self, w: str):
        if not self.take_word(w):
            raise SchemaError(f"expected {w} in DDL, got {self.peek().value!r}")

    def take_op(self, op: str) -> bool:
        t = self.peek()
        if t.type == "OP" and t.value == op:
            self.advance()
            return True
        return False

    def expect_op(self, op: str):
        if not self.take_op(op):
            raise SchemaError(f"expected {op!r} in DDL, got {self.peek().value!r}")

    def name(self) -> str:
        t = self.peek()
        if t.type in ("ID", "QID", "KW"):
            self.advance()
            return t.value
        raise SchemaError(f"expected name in DDL, got {t.value!r}")

    def skip_parens(self):
        self.expect_op("(")
        depth = 1
        while depth:
            if self.done():
                raise SchemaError("unbalanced parentheses in DDL")
            if self.take_op("("):
                depth += 1
            elif self.take_op(")"):
                depth -= 1
            else:
                self.advance()

    def name_list(self) -> list[str]:
        self.expect_op("(")
        names = [self.name()]
        while self.take_op(","):
            names.append(self.name())
        self.expect_op(")")
        return names


_CONSTRAINT_STARTERS = {"PRIMARY", "UNIQUE", "FOREIGN", "CHECK", "CONSTRAINT"}
_TYPE_STOPPERS = {"PRIMARY", "NOT", "NULL", "UNIQUE", "REFERENCES", "DEFAULT",
                  "CHECK", "COLLATE", "CONSTRAINT", "GENERATED"}


def _load_ddl(sql: str) -> Schema:
    cur = _DdlCursor(sql)
    tables: list[Table] = []
    fks: list[FkLink] = []
    while not cur.done():
        if cur.take_op(";"):
            continue
        cur.expect_word("CREATE")
        cur.expect_word("TABLE")
        if cur.take_word("IF"):
            cur.expect_word("NOT")
            cur.expect_word("EXISTS")
        tname = cur.name()
        cols, pk_members, uniques, notnulls, table_fks = _parse_table_body(cur, tname)
        sole = len(pk_members) == 1
        final_cols = []
        for cname, ctype in cols:
            lkey = cname.lower()
            is_pk_member = lkey in {m.lower() for m in pk_members}
            final_cols.append(Column(
                name=cname,
                declared_type=ctype,
                is_primary_key=is_pk_member and sole,
                is_unique=lkey in uniques or (is_pk_member and sole),
                is_not_null=lkey in notnulls or is_pk_member,
            ))
        if not final_cols:
            raise SchemaError(f"table {tname!r} has no columns")
        tables.append(Table(tname, tuple(final_cols), tuple(pk_members)))
        fks.extend(table_fks)
        cur.take_op(";")
    return Schema("", tables, fks)


def _parse_table_body(cur: _DdlCursor, tname: str):
    cols: list[tuple[str, str]] = []
    pk_members: list[str] = []
    uniques: set[str] = set()
    notnulls: set[str] = set()
    fks: list[FkLink] = []
    cur.expect_op("(")
    while True:
        w = cur.word()
        if w == "PRIMARY":
            cur.advance()
            cur.expect_word("KEY")
            pk_members = cur.name_list()
        elif w == "UNIQUE":
            cur.advance()
            for n in cur.name_list():
                uniques.add(n.lower())
        elif w == "FOREIGN":
            cur.advance()
            cur.expect_word("KEY")
            local = cur.name_list()
            cur.expect_word("REFERENCES")
            ref_table = cur.name()
            ref_cols = cur.name_list()
            for lc, rc in zip(local, ref_cols):
                fks.append(FkLink(tname, lc, ref_table, rc))
        elif w == "CHECK":
            # check constraints are out of scope; consume and ignore
            cur.advance()
            cur.skip_parens()
        elif w == "CONSTRAINT":
            cur.advance()
            cur.name()
            continue
        else:
            cname = cur.name()
            ctype_words = []
            while cur.peek().type == "ID" and cur.word() not in _TYPE_STOPPERS:
                ctype_words.append(cur.advance().value)
            if cur.peek().type == "OP" and cur.peek().value == "(":
                cur.skip_parens()
            ctype = " ".join(ctype_words)
            # column constraints
            while True:
                if cur.take_word("PRIMARY"):
                    cur.expect_word("KEY")
                    cur.take_word("ASC") or cur.take_word("DESC")
                    cur.take_word("AUTOINCREMENT")
                    pk_members = [cname]
                elif cur.take_word("NOT"):
                    cur.expect_word("NULL")
                    notnulls.add(cname.lower())
                elif cur.take_word("UNIQUE"):
                    uniques.add(cname.lower())
                elif cur.take_word("REFERENCES"):
                    ref_table = cur.name()
                    ref_col = None
                    if cur.peek().type == "OP" and cur.peek().value == "(":
                        ref_col = cur.name_list()[0]
                    if ref_col is None:
                        raise SchemaError("REFERENCES without a column list")
                    fks.append(FkLink(tname, cname, ref_table, ref_col))
                elif cur.take_word("DEFAULT"):
                    if cur.peek().type == "OP" and cur.peek().value == "(":
                        cur.skip_parens()
                    else:
                        cur.advance()
                elif cur.take_word("CHECK"):
                    cur.skip_parens()
                else:
                    break
            cols.append((cname, ctype))
        if cur.take_op(","):
            continue
        cur.expect_op(")")
        break
    return cols, pk_members, uniques, notnulls, fks


def build_ddl(schema: Schema) -> list[str]:
    """CREATE TABLE statements that reproduce the schema's constraints."""
    stmts = []
    for t in schema.tables:
        lines = []
        sole_pk = len(t.primary_key) == 1
        for c in t.columns:
            parts = [f'"{c.name}"']
            if c.declared_type:
                parts.append(c.declared_type)
            if c.is_primary_key and sole_pk:
                parts.append("PRIMARY KEY")
            elif c.is_unique:
                parts.append("UNIQUE")
            if c.is_not_null and not (c.is_primary_key and sole_pk):
                parts.append("NOT NULL")
            lines.append(" ".join(parts))
        if len(t.primary_key) > 1:
            cols = ", ".join(f'"{c}"' for c in t.primary_key)
            lines.append(f"PRIMARY KEY ({cols})")
        for fk in schema.foreign_keys:
            if fk.from_table.lower() == t.name.lower():
                lines.append(f'FOREIGN KEY ("{fk.from_column}") REFERENCES '
                             f'"{fk.to_table}" ("{fk.to_column}")')
        body = ", ".join(lines)
        stmts.append(f'CREATE TABLE "{t.name}" ({body})')
    return stmts
