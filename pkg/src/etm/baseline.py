"""Execution accuracy (strict output matching) and the legacy set metric."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .ast_nodes import Projection, QueryAst, SelectCore
from .database import DatabaseInstance
from .errors import EsmParseError, ExecError, ParseError
from .esm import EsmFlags, parse_esm
from .matcher import INVALID, MATCH, MISMATCH, MetricVerdict
from .parser import parse, tokenize
from .schema import Schema

FLOAT_RTOL = 1e-6


@dataclass
class ResultTable:
    column_count: int
    rows: list
    ordered: bool  # the producing query had a top-level ORDER BY


def execute(sql: str, db: DatabaseInstance, timeout: float = 30.0) -> ResultTable:
    """Run one query and materialize all rows."""
    ncols, rows = db.run(sql, timeout=timeout)
    return ResultTable(ncols, rows, _has_top_level_order(sql))


def _has_top_level_order(sql: str) -> bool:
    try:
        return bool(parse(sql).order_by)
    except ParseError:
        pass
    try:
        depth = 0
        for tok in tokenize(sql):
            if tok.type == "OP" and tok.value == "(":
                depth += 1
            elif tok.type == "OP" and tok.value == ")":
                depth -= 1
            elif tok.type == "KW" and tok.value == "ORDER" and depth == 0:
                return True
    except ParseError:
        pass
    return False


def _cells_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    num_a = isinstance(a, (int, float)) and not isinstance(a, bool)
    num_b = isinstance(b, (int, float)) and not isinstance(b, bool)
    if num_a and num_b:
        if a == b:
            return True
        scale = max(abs(a), abs(b))
        return abs(a - b) <= FLOAT_RTOL * scale
    return a == b


def _rows_equal(r1, r2) -> bool:
    return len(r1) == len(r2) and all(_cells_equal(a, b) for a, b in zip(r1, r2))


def _sort_key(row):
    key = []
    for cell in row:
        if cell is None:
            key.append((0, ""))
        elif isinstance(cell, bool):
            key.append((1, str(int(cell))))
        elif isinstance(cell, (int, float)):
            key.append((1, f"{float(cell):+.12e}"))
        elif isinstance(cell, bytes):
            key.append((3, cell.hex()))
        else:
            key.append((2, str(cell)))
    return key


def _multisets_equal(rows1, rows2) -> bool:
    if len(rows1) != len(rows2):
        return False
    a = sorted(rows1, key=_sort_key)
    b = sorted(rows2, key=_sort_key)
    return all(_rows_equal(x, y) for x, y in zip(a, b))


def _augment_with_order_keys(sql: str):
    """Re-serialize with the ORDER BY expressions appended to the projection
    list, so ties can be compared as groups. Returns (sql, n_keys) or None."""
    try:
        ast = parse(sql)
    except ParseError:
        return None
    if not ast.order_by or not isinstance(ast.body, SelectCore):
        return None
    if ast.body.distinct or ast.body.group_by:
        return None  # extra projections would change the result shape
    extra = tuple(Projection(o.expr) for o in ast.order_by)
    body = dataclasses.replace(ast.body,
                               projections=ast.body.projections + extra)
    return dataclasses.replace(ast, body=body).sql(), len(extra)


def _tie_group_sizes(gold_sql, gold_rt, db, timeout):
    """Sizes of the runs of equal ORDER BY keys in the gold result, in
    order. None when they cannot be recovered."""
    aug = _augment_with_order_keys(gold_sql)
    if aug is None:
        return None
    sql, k = aug
    try:
        _, rows = db.run(sql, timeout=timeout)
    except ExecError:
        return None
    if len(rows) != len(gold_rt.rows):
        return None
    n = gold_rt.column_count
    sizes = []
    prev_key = None
    for row in rows:
        key = row[n:n + k]
        if prev_key is not None and _rows_equal(prev_key, key):
            sizes[-1] += 1
        else:
            sizes.append(1)
        prev_key = key
    return sizes


def _ordered_results_match(gold_sql, gold_rt, pred_rt, db, timeout):
    """Positional comparison, except that rows tied under the gold query's
    ORDER BY keys form a group whose contents compare as a multiset (SQL
    leaves tie order unspecified)."""
    if len(gold_rt.rows) != len(pred_rt.rows):
        return False
    sizes = _tie_group_sizes(gold_sql, gold_rt, db, timeout)
    if sizes is None:
        return all(_rows_equal(a, b)
                   for a, b in zip(gold_rt.rows, pred_rt.rows))
    pos = 0
    for size in sizes:
        if not _multisets_equal(gold_rt.rows[pos:pos + size],
                                pred_rt.rows[pos:pos + size]):
            return False
        pos += size
    return True


def results_match(gold_sql, pred_sql, gold_rt: ResultTable,
                  pred_rt: ResultTable, db, timeout: float = 30.0) -> bool:
    if gold_rt.column_count != pred_rt.column_count:
        return False
    if gold_rt.ordered:
        return _ordered_results_match(gold_sql, gold_rt, pred_rt, db, timeout)
    return _multisets_equal(gold_rt.rows, pred_rt.rows)


def exe_match(gold: str, pred: str, db: DatabaseInstance,
              timeout: float = 30.0) -> MetricVerdict:
    """Match iff both queries execute and produce equal results: compared
    as ordered sequences when the gold query has a top-level ORDER BY (ties
    compared as multisets within equal-key groups), as multisets otherwise.
    Duplicate rows are significant in both modes."""
    gold_err = pred_err = None
    gold_rt = pred_rt = None
    try:
        gold_rt = execute(gold, db, timeout)
    except ExecError as exc:
        gold_err = exc
    try:
        pred_rt = execute(pred, db, timeout)
    except ExecError as exc:
        pred_err = exc
    if gold_err is not None or pred_err is not None:
        return MetricVerdict(
            "exe", INVALID, "execute",
            {"gold_error": str(gold_err) if gold_err else None,
             "pred_error": str(pred_err) if pred_err else None},
            gold_defect=gold_err is not None)
    ok = results_match(gold, pred, gold_rt, pred_rt, db, timeout)
    return MetricVerdict("exe", MATCH if ok else MISMATCH)


def esm_match(gold: str, pred: str, schema: Schema,
              flags: EsmFlags | None = None) -> MetricVerdict:
    """Legacy set-matching verdict (see esm module for the reproduced
    quirks). Parse failures score as mismatches, like the original script's
    treatment of runtime errors."""
    flags = flags if flags is not None else EsmFlags()
    try:
        g = parse_esm(gold, schema, flags)
    except EsmParseError as exc:
        return MetricVerdict("esm", INVALID, "parse",
                             {"error": str(exc), "side": "gold"},
                             gold_defect=True)
    try:
        p = parse_esm(pred, schema, flags)
    except EsmParseError as exc:
        return MetricVerdict("esm", INVALID, "parse",
                             {"error": str(exc), "side": "pred"})
    return MetricVerdict("esm", MATCH if g == p else MISMATCH)
