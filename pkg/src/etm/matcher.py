"""Tree-matching verdicts for (gold, predicted) query pairs."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ParseError, ResolutionError, RewriteDivergence
from .normalize import normalize
from .parser import parse
from .rewrite import canonicalize
from .rules import RuleSelection
from .schema import Schema

MATCH = "match"
MISMATCH = "mismatch"
INVALID = "invalid"


@dataclass
class MetricVerdict:
    """Per-pair outcome for one metric.

    An invalid outcome is always scored as a mismatch in aggregates but
    keeps its kind ('parse', 'resolve', 'execute', 'diverge') for error
    reports. gold_defect flags invalidity caused by the gold side.
    """
    metric: str
    outcome: str
    invalid_kind: str | None = None
    trace: dict | None = None
    gold_defect: bool = False

    @property
    def matched(self) -> bool:
        return self.outcome == MATCH

    def to_json(self) -> dict:
        out = {"metric": self.metric, "outcome": self.outcome}
        if self.invalid_kind:
            out["invalid_kind"] = self.invalid_kind
        if self.gold_defect:
            out["gold_defect"] = True
        return out


def _canonical(sql: str, schema: Schema, db, rules: RuleSelection):
    tree = parse(sql)
    normalized = normalize(tree, schema, rules.p_rules)
    return canonicalize(normalized, schema, db, rules)


def etm_match(gold: str, pred: str, schema: Schema, db=None,
              rules: RuleSelection | None = None) -> MetricVerdict:
    """Tree-match verdict: canonicalize both queries and compare trees."""
    rules = rules if rules is not None else RuleSelection.full()
    sides = {}
    for name, sql in (("gold", gold), ("pred", pred)):
        try:
            sides[name] = _canonical(sql, schema, db, rules)
        except ParseError as exc:
            return MetricVerdict("etm", INVALID, "parse",
                                 {"error": str(exc), "side": name},
                                 gold_defect=(name == "gold"))
        except ResolutionError as exc:
            return MetricVerdict("etm", INVALID, "resolve",
                                 {"error": str(exc), "side": name},
                                 gold_defect=(name == "gold"))
        except RewriteDivergence as exc:
            return MetricVerdict("etm", INVALID, "diverge",
                                 {"error": str(exc), "side": name},
                                 gold_defect=(name == "gold"))
    gold_tree, gold_trace = sides["gold"]
    pred_tree, pred_trace = sides["pred"]
    trace = {
        "gold_canonical": gold_tree.sql(),
        "pred_canonical": pred_tree.sql(),
        "gold_rules": [rb.to_json() for rb in gold_trace],
        "pred_rules": [rb.to_json() for rb in pred_trace],
    }
    outcome = MATCH if gold_tree == pred_tree else MISMATCH
    return MetricVerdict("etm", outcome, trace=trace)


def batch_match(pairs, schemas: dict, dbs: dict | None = None,
                rules: RuleSelection | None = None,
                workers: int = 1) -> list[MetricVerdict]:
    """Evaluate (gold, pred, db_id) triples; verdict order matches input
    order and is independent of the worker count."""
    rules = rules if rules is not None else RuleSelection.full()

    def one(pair):
        gold, pred, db_id = pair
        schema = schemas[db_id]
        db = (dbs or {}).get(db_id)
        return etm_match(gold, pred, schema, db, rules)

    items = list(pairs)
    if workers <= 1:
        return [one(p) for p in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, items))
