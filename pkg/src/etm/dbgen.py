"""Randomized constraint-satisfying instance generation and the execution
counterexample search used to audit metric matches.

Value pools are deliberately structured: every text pool mixes a small word
lexicon with prefix-structured codes (a fixed stem plus suffixes) so that
prefix-sensitive predicates (LIKE, SUBSTR ranges) are exercised with data
where the prefix actually discriminates; dates are ISO strings so that
lexicographic and chronological order agree. The boundary pool biases draws
toward edge cases (zero, negatives, duplicates, empty-ish strings).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .baseline import execute, results_match
from .database import DatabaseInstance
from .errors import ExecError, GenError
from .schema import Schema

WORD_POOL = [
    "ant", "bear", "cat", "deer", "duck", "eagle", "fox", "goat", "hare",
    "ibis", "jay", "koala", "lion", "mole", "newt", "otter", "pig", "quail",
    "seal", "tiger",
]
CODE_POOL = [f"wolf{a}{b}" for a in "abgms" for b in "agmz"]
TEXT_POOL = WORD_POOL + CODE_POOL
TEXT_BOUNDARY = ["", "ant", "wolfaa", "wolfzz"]

INT_POOL = list(range(-5, 101))
INT_BOUNDARY = [-5, -1, 0, 1, 100]

FLOAT_POOL = [round(x * 0.5, 1) for x in range(-10, 201)]
FLOAT_BOUNDARY = [0.0, -0.5, 0.5, 100.0]

DATE_POOL = [f"2019-{m:02d}-{d:02d}" for m in range(1, 13) for d in (3, 14, 27)]
DATE_BOUNDARY = ["2019-01-01", "2020-12-31"]

# Extra deterministic values so UNIQUE columns have headroom at the default
# row counts; exhausting these still raises GenError honestly.
_UNIQUE_EXTRA = {
    "text": [f"uq{i:03d}" for i in range(300)],
    "int": list(range(101, 400)),
    "float": [round(x + 0.25, 2) for x in range(101, 400)],
    "date": [f"2021-{m:02d}-{d:02d}" for m in range(1, 13)
             for d in range(1, 28)],
}


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    rows_per_table: tuple = (5, 50)
    null_rate: float = 0.1
    edge_case_bias: float = 0.3

    def __post_init__(self):
        lo, hi = self.rows_per_table
        if lo < 1 or hi < lo:
            raise ValueError("rows_per_table must be a range with at least 1 row")
        if not 0.0 <= self.null_rate <= 1.0:
            raise ValueError("null_rate must be in [0, 1]")
        if not 0.0 <= self.edge_case_bias <= 1.0:
            raise ValueError("edge_case_bias must be in [0, 1]")


def _pools_for(declared_type: str, unique: bool = False):
    t = declared_type.lower()
    if "int" in t or "bool" in t:
        pool, boundary, kind = INT_POOL, INT_BOUNDARY, "int"
    elif any(h in t for h in ("real", "floa", "doub", "dec", "num")):
        pool, boundary, kind = FLOAT_POOL, FLOAT_BOUNDARY, "float"
    elif "date" in t or "time" in t:
        pool, boundary, kind = DATE_POOL, DATE_BOUNDARY, "date"
    else:
        pool, boundary, kind = TEXT_POOL, TEXT_BOUNDARY, "text"
    if unique:
        pool = pool + _UNIQUE_EXTRA[kind]
    return pool, boundary


def _topo_tables(schema: Schema):
    """Referenced tables first, so FK pools are populated before use."""
    deps = {t.name.lower(): set() for t in schema.tables}
    for fk in schema.foreign_keys:
        if fk.from_table.lower() != fk.to_table.lower():
            deps[fk.from_table.lower()].add(fk.to_table.lower())
    done: list[str] = []
    pending = [t.name.lower() for t in schema.tables]
    while pending:
        progressed = False
        for name in list(pending):
            if deps[name] <= set(done):
                done.append(name)
                pending.remove(name)
                progressed = True
        if not progressed:
            done.extend(pending)  # FK cycle: fall back to declaration order
            break
    by_name = {t.name.lower(): t for t in schema.tables}
    return [by_name[n] for n in done]


def generate_db(schema: Schema, cfg: GenConfig) -> DatabaseInstance:
    """Deterministic random instance satisfying PK/UNIQUE/NOT NULL/FK."""
    rows = generate_rows(schema, cfg)
    return DatabaseInstance.from_schema(schema, rows)


def generate_rows(schema: Schema, cfg: GenConfig) -> dict:
    rng = random.Random(cfg.seed)
    lo, hi = cfg.rows_per_table
    fk_of = {}
    for fk in schema.foreign_keys:
        fk_of[(fk.from_table.lower(), fk.from_column.lower())] = (
            fk.to_table.lower(), fk.to_column.lower())
    values_by_column: dict = {}
    out: dict = {}

    for table in _topo_tables(schema):
        tname = table.name.lower()
        n = rng.randint(lo, hi)
        col_values: dict = {c.name.lower(): [] for c in table.columns}
        used: dict = {c.name.lower(): set() for c in table.columns}
        table_rows = []
        for _ in range(n):
            row = []
            for col in table.columns:
                cname = col.name.lower()
                unique = col.is_unique or col.is_primary_key
                non_null = col.is_not_null or col.is_primary_key
                parent = fk_of.get((tname, cname))
                if parent is not None:
                    pool = [v for v in values_by_column.get(parent, [])
                            if v is not None]
                    boundary = pool
                    if not pool:
                        raise GenError(
                            f"foreign key {tname}.{cname} has no parent rows")
                else:
                    pool, boundary = _pools_for(col.declared_type, unique)
                value = _draw(rng, cfg, pool, boundary, col_values[cname],
                              used[cname] if unique else None,
                              nullable=not non_null)
                if unique and value is not None:
                    used[cname].add(value)
                col_values[cname].append(value)
                row.append(value)
            table_rows.append(tuple(row))
        # every nullable, unbiased column gets at least one NULL on larger
        # tables so NULL-sensitive predicates are exercised
        if n >= 10:
            for idx, col in enumerate(table.columns):
                cname = col.name.lower()
                non_null = col.is_not_null or col.is_primary_key
                if non_null or any(v is None for v in col_values[cname]):
                    continue
                victim = rng.randrange(n)
                table_rows[victim] = tuple(
                    None if i == idx else v
                    for i, v in enumerate(table_rows[victim]))
                col_values[cname][victim] = None
        out[table.name] = table_rows
        for col in table.columns:
            values_by_column[(tname, col.name.lower())] = col_values[col.name.lower()]
    return out


def _draw(rng, cfg, pool, boundary, existing, used, nullable):
    if nullable and rng.random() < cfg.null_rate:
        return None
    if used is not None:
        remaining = [v for v in pool if v not in used]
        if not remaining:
            raise GenError("unique column domain smaller than row count")
        return rng.choice(remaining)
    if rng.random() < cfg.edge_case_bias:
        prior = [v for v in existing if v is not None]
        if prior and rng.random() < 0.5:
            return rng.choice(prior)  # deliberate duplicate
        if boundary:
            return rng.choice(boundary)
    return rng.choice(pool)


_instance_cache: dict = {}
_CACHE_CAP = 512


def _cached_instance(schema: Schema, cfg: GenConfig) -> DatabaseInstance:
    key = (id(schema), cfg)
    inst = _instance_cache.get(key)
    if inst is None:
        if len(_instance_cache) >= _CACHE_CAP:
            _instance_cache.clear()
        inst = generate_db(schema, cfg)
        _instance_cache[key] = inst
    return inst


def counterexample_search(q1: str, q2: str, schema: Schema, trials: int,
                          cfg: GenConfig | None = None,
                          timeout: float = 30.0):
    """Hunt for an instance where the two queries disagree.

    Instance i uses seed cfg.seed + i. Returns (instance, summary) for the
    first distinguishing instance, None when all trials agree. An execution
    error counts as distinguishing only when exactly one query errors.
    Absence of a counterexample is evidence, not proof, of equivalence.
    """
    cfg = cfg if cfg is not None else GenConfig()
    for i in range(trials):
        inst = _cached_instance(schema, replace(cfg, seed=cfg.seed + i))
        e1 = e2 = None
        rt1 = rt2 = None
        try:
            rt1 = execute(q1, inst, timeout)
        except ExecError as exc:
            e1 = exc
        try:
            rt2 = execute(q2, inst, timeout)
        except ExecError as exc:
            e2 = exc
        if e1 is not None and e2 is not None:
            continue
        if e1 is not None or e2 is not None:
            return inst, {"seed": cfg.seed + i, "kind": "error",
                          "q1_error": str(e1) if e1 else None,
                          "q2_error": str(e2) if e2 else None}
        if not results_match(q1, q2, rt1, rt2, inst, timeout):
            return inst, {"seed": cfg.seed + i, "kind": "result",
                          "q1_rows": len(rt1.rows), "q2_rows": len(rt2.rows),
                          "q1_sample": rt1.rows[:3], "q2_sample": rt2.rows[:3]}
    return None
