"""SQLite-backed database instances: file-based or built from schema + rows."""

from __future__ import annotations

import sqlite3
import threading
import time

from .errors import ExecError
from .schema import Schema, build_ddl

_SYNTAX_MARKERS = ("syntax error", "no such table", "no such column",
                   "no such function", "unrecognized token", "incomplete input",
                   "near ")


def _classify(exc: Exception) -> str:
    msg = str(exc).lower()
    if "interrupt" in msg:
        return "timeout"
    if any(m in msg for m in _SYNTAX_MARKERS):
        return "syntax"
    return "runtime"


class DatabaseInstance:
    """One read-only relational instance; safe for concurrent use (a lock
    serializes statements on the shared connection)."""

    def __init__(self, conn: sqlite3.Connection, source: str = ":memory:"):
        self._conn = conn
        self._lock = threading.Lock()
        self.source = source

    @classmethod
    def from_file(cls, path: str) -> "DatabaseInstance":
        conn = sqlite3.connect(path, check_same_thread=False)
        conn.text_factory = lambda b: b.decode("utf-8", "replace")
        return cls(conn, source=str(path))

    @classmethod
    def from_schema(cls, schema: Schema, rows: dict | None = None) -> "DatabaseInstance":
        """In-memory instance created from CREATE TABLE statements derived
        from the schema, populated with the given rows per table."""
        conn = sqlite3.connect(":memory:", check_same_thread=False)
        for stmt in build_ddl(schema):
            conn.execute(stmt)
        for table in schema.tables:
            data = (rows or {}).get(table.name) or (rows or {}).get(table.name.lower())
            if not data:
                continue
            marks = ", ".join("?" for _ in table.columns)
            conn.executemany(
                f'INSERT INTO "{table.name}" VALUES ({marks})', data)
        conn.commit()
        return cls(conn)

    @classmethod
    def from_script(cls, script: str) -> "DatabaseInstance":
        conn = sqlite3.connect(":memory:", check_same_thread=False)
        conn.executescript(script)
        conn.commit()
        return cls(conn)

    def run(self, sql: str, timeout: float = 30.0):
        """Execute one query; returns (column_count, rows). Raises ExecError."""
        with self._lock:
            deadline = time.monotonic() + timeout

            def guard():
                return 1 if time.monotonic() > deadline else 0

            self._conn.set_progress_handler(guard, 10_000)
            try:
                cur = self._conn.execute(sql)
                rows = cur.fetchall()
                ncols = len(cur.description) if cur.description else 0
                return ncols, rows
            except sqlite3.Error as exc:
                raise ExecError(_classify(exc), str(exc)) from exc
            finally:
                self._conn.set_progress_handler(None, 0)

    def table_row_count(self, table: str) -> int:
        ncols, rows = self.run(f'SELECT COUNT(*) FROM "{table}"')
        return rows[0][0]

    def export_script(self) -> str:
        """Deterministic DDL + INSERT script reproducing this instance."""
        with self._lock:
            lines = []
            master = self._conn.execute(
                "SELECT name, sql FROM sqlite_master "
                "WHERE type = 'table' ORDER BY name").fetchall()
            for name, sql in master:
                lines.append(sql.strip() + ";")
            for name, _ in master:
                cur = self._conn.execute(f'SELECT * FROM "{name}" ORDER BY rowid')
                for row in cur.fetchall():
                    vals = ", ".join(_sql_literal(v) for v in row)
                    lines.append(f'INSERT INTO "{name}" VALUES ({vals});')
            return "\n".join(lines) + "\n"

    def close(self):
        with self._lock:
            self._conn.close()


def _sql_literal(v) -> str:
    if v is None:
        return "NULL"
    if isinstance(v, str):
        return "'" + v.replace("'", "''") + "'"
    if isinstance(v, float) and v == int(v):
        return f"{v:.1f}"
    return str(v)
