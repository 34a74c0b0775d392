"""Batch evaluation: dataset loading, metric runs, reports, error analysis,
and rule-ablation series.

Input conventions follow the public Text-to-SQL artifacts: the gold file has
one `SQL<TAB>db_id` per line, the prediction file one SQL per line aligned by
line number, the schema path is a directory of per-database JSON/DDL files or
one combined JSON, and the database path is a directory laid out as
`<db_id>/<db_id>.sqlite`.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .baseline import esm_match, exe_match
from .database import DatabaseInstance
from .dbgen import GenConfig, counterexample_search
from .errors import AlignmentError, SchemaError
from .esm import EsmFlags
from .matcher import MetricVerdict, etm_match
from .rules import RuleSelection
from .schema import Schema, load_schema

REPORT_VERSION = 1
ALL_METRICS = ("etm", "esm", "exe")


@dataclass
class Dataset:
    examples: list          # (index, db_id, gold_sql, pred_sql)
    schemas: dict           # db_id -> Schema
    dbs: dict               # db_id -> DatabaseInstance (may be empty)


def load_dataset(gold_path, pred_path, schema_path, db_path=None) -> Dataset:
    golds = _read_lines(gold_path)
    preds = _read_lines(pred_path)
    if len(golds) != len(preds):
        raise AlignmentError(
            f"{len(golds)} gold lines vs {len(preds)} predictions")
    examples = []
    for i, (g, p) in enumerate(zip(golds, preds)):
        if "\t" in g:
            sql, db_id = g.rsplit("\t", 1)
        else:
            sql, db_id = g, ""
        examples.append((i, db_id.strip(), sql.strip(), p.strip()))
    db_ids = {e[1] for e in examples}
    schemas = load_schema_path(schema_path, db_ids)
    missing = db_ids - set(schemas)
    if missing:
        raise SchemaError(f"no schema for db_id(s): {sorted(missing)}")
    dbs = {}
    if db_path:
        for db_id in sorted(db_ids):
            for ext in ("sqlite", "db"):
                candidate = os.path.join(db_path, db_id, f"{db_id}.{ext}")
                if os.path.exists(candidate):
                    dbs[db_id] = DatabaseInstance.from_file(candidate)
                    break
    return Dataset(examples, schemas, dbs)


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def load_schema_path(schema_path, db_ids=None) -> dict:
    """Schemas from a directory of per-db files or one combined JSON."""
    schemas: dict[str, Schema] = {}
    if os.path.isdir(schema_path):
        for name in sorted(os.listdir(schema_path)):
            full = os.path.join(schema_path, name)
            stem, ext = os.path.splitext(name)
            if ext == ".json":
                with open(full, encoding="utf-8") as fh:
                    doc = json.load(fh)
                _collect(schemas, doc, default_id=stem)
            elif ext == ".sql":
                with open(full, encoding="utf-8") as fh:
                    schema = load_schema(fh.read())
                schemas[stem] = Schema(stem, list(schema.tables),
                                       list(schema.foreign_keys))
        return schemas
    with open(schema_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    _collect(schemas, doc, default_id=None)
    return schemas


def _collect(schemas: dict, doc, default_id):
    if isinstance(doc, list):
        for entry in doc:
            _collect(schemas, entry, None)
        return
    schema = load_schema(doc)
    db_id = schema.db_id or default_id or ""
    if default_id and schema.db_id and schema.db_id != default_id:
        db_id = schema.db_id
    schemas[db_id or default_id] = schema


def load_labels(path) -> list[str]:
    labels = []
    for line in _read_lines(path):
        value = line.strip().lower()
        if value not in ("equivalent", "distinct"):
            raise AlignmentError(f"bad label {line!r}")
        labels.append(value)
    return labels


def evaluate_pair(example, schemas, dbs, metrics, rules, esm_flags, timeout):
    index, db_id, gold, pred = example
    schema = schemas[db_id]
    db = dbs.get(db_id)
    verdicts: dict[str, MetricVerdict] = {}
    if "etm" in metrics:
        verdicts["etm"] = etm_match(gold, pred, schema, db, rules)
    if "esm" in metrics:
        verdicts["esm"] = esm_match(gold, pred, schema, esm_flags)
    if "exe" in metrics:
        if db is None:
            verdicts["exe"] = MetricVerdict(
                "exe", "invalid", "execute",
                {"error": f"no database instance for {db_id!r}"})
        else:
            verdicts["exe"] = exe_match(gold, pred, db, timeout)
    return verdicts


def run_eval(gold_path, pred_path, schema_path, db_path=None,
             metrics=ALL_METRICS, rules: RuleSelection | None = None,
             out_path=None, workers: int = 1, timeout: float = 30.0,
             esm_flags: EsmFlags | None = None) -> dict:
    """Evaluate every (gold, pred) pair under the selected metrics and write
    a deterministic JSON report."""
    rules = rules if rules is not None else RuleSelection.full()
    esm_flags = esm_flags if esm_flags is not None else EsmFlags()
    dataset = load_dataset(gold_path, pred_path, schema_path, db_path)
    metrics = tuple(m for m in ALL_METRICS if m in set(metrics))

    def one(example):
        return evaluate_pair(example, dataset.schemas, dataset.dbs, metrics,
                             rules, esm_flags, timeout)

    if workers <= 1:
        results = [one(e) for e in dataset.examples]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, dataset.examples))

    report = build_report(dataset, metrics, results,
                          inputs={"gold": str(gold_path),
                                  "pred": str(pred_path),
                                  "schemas": str(schema_path),
                                  "dbs": str(db_path) if db_path else None})
    if out_path:
        write_report(report, out_path)
    return report


def build_report(dataset: Dataset, metrics, results, inputs=None) -> dict:
    n = len(dataset.examples)
    accuracy = {}
    error_kinds: dict = {m: {} for m in metrics}
    rule_hits: dict = {}
    gold_defects = []
    examples_out = []
    for example, verdicts in zip(dataset.examples, results):
        index, db_id, gold, pred = example
        entry = {"index": index, "db_id": db_id, "gold": gold, "pred": pred,
                 "verdicts": {m: v.to_json() for m, v in verdicts.items()}}
        examples_out.append(entry)
        for m, v in verdicts.items():
            if v.outcome == "invalid":
                kind = v.invalid_kind or "unknown"
                error_kinds[m][kind] = error_kinds[m].get(kind, 0) + 1
            if v.gold_defect and index not in gold_defects:
                gold_defects.append(index)
        etm_v = verdicts.get("etm")
        if etm_v is not None and etm_v.trace:
            for side in ("gold_rules", "pred_rules"):
                for rb in etm_v.trace.get(side, []):
                    if rb.get("verdict") == "holds":
                        key = str(rb["rule"])
                        rule_hits[key] = rule_hits.get(key, 0) + 1
    for m in metrics:
        matches = sum(1 for _, v in zip(dataset.examples, results)
                      for mm, vv in v.items() if mm == m and vv.matched)
        accuracy[m] = round(100.0 * matches / n, 1) if n else 0.0
    return {
        "report_version": REPORT_VERSION,
        "total": n,
        "metrics": list(metrics),
        "accuracy": accuracy,
        "error_kinds": error_kinds,
        "rule_hits": rule_hits,
        "gold_defects": gold_defects,
        "inputs": inputs or {},
        "examples": examples_out,
    }


def write_report(report: dict, out_path):
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def render_table(report: dict) -> str:
    lines = [f"examples: {report['total']}"]
    for m in report["metrics"]:
        acc = report["accuracy"][m]
        kinds = report["error_kinds"].get(m, {})
        extra = ""
        if kinds:
            parts = ", ".join(f"{k}={v}" for k, v in sorted(kinds.items()))
            extra = f"  (invalid: {parts})"
        lines.append(f"{m.upper():>4}: {acc:5.1f}%{extra}")
    if report.get("gold_defects"):
        lines.append(f"gold-side defects at indices: {report['gold_defects']}")
    return "\n".join(lines)


def error_analysis(report: dict, labels: list | None = None,
                   schemas: dict | None = None,
                   oracle: GenConfig | None = None,
                   oracle_trials: int = 25) -> dict:
    """False positive / negative rates against reference labels, or an
    oracle audit of match verdicts when labels are unavailable.

    With labels: FP = metric says match while the label is distinct;
    FN = metric says mismatch (or invalid) while the label is equivalent.
    Without labels: every metric-match pair is fuzzed; a distinguishing
    instance confirms a false positive.
    """
    examples = report["examples"]
    metrics = report["metrics"]
    n = len(examples)
    out: dict = {"total": n}
    if labels is not None:
        if len(labels) != n:
            raise AlignmentError(f"{len(labels)} labels vs {n} examples")
        fp = {m: 0 for m in metrics}
        fn = {m: 0 for m in metrics}
        fp_idx: dict = {m: [] for m in metrics}
        fn_idx: dict = {m: [] for m in metrics}
        for entry, label in zip(examples, labels):
            for m in metrics:
                verdict = entry["verdicts"].get(m)
                if verdict is None:
                    continue
                matched = verdict["outcome"] == "match"
                if matched and label == "distinct":
                    fp[m] += 1
                    fp_idx[m].append(entry["index"])
                elif not matched and label == "equivalent":
                    fn[m] += 1
                    fn_idx[m].append(entry["index"])
        out["fp_counts"] = fp
        out["fn_counts"] = fn
        out["fp_rate"] = {m: round(100.0 * fp[m] / n, 1) if n else 0.0
                          for m in metrics}
        out["fn_rate"] = {m: round(100.0 * fn[m] / n, 1) if n else 0.0
                          for m in metrics}
        out["fp_indices"] = fp_idx
        out["fn_indices"] = fn_idx
        return out
    if schemas is None:
        raise SchemaError("oracle analysis needs schemas")
    cfg = oracle if oracle is not None else GenConfig()
    confirmed: dict = {m: [] for m in metrics}
    for entry in examples:
        schema = schemas[entry["db_id"]]
        for m in metrics:
            verdict = entry["verdicts"].get(m)
            if verdict is None or verdict["outcome"] != "match":
                continue
            found = counterexample_search(entry["gold"], entry["pred"],
                                          schema, oracle_trials, cfg)
            if found is not None:
                confirmed[m].append(
                    {"index": entry["index"], "evidence": _jsonable(found[1])})
    out["confirmed_fp"] = confirmed
    out["oracle_trials"] = oracle_trials
    return out


def _jsonable(obj):
    return json.loads(json.dumps(obj, default=str))


ABLATION_POINTS = tuple(f"P{k}" for k in range(9)) + tuple(
    str(n) for n in range(1, 27))


def selection_for_point(point: str) -> RuleSelection:
    if point.upper().startswith("P"):
        return RuleSelection.p_prefix(int(point[1:]))
    return RuleSelection.prefix(int(point))


def ablation(gold_path, pred_path, schema_path, labels_path, out_path=None,
             db_path=None, workers: int = 1) -> dict:
    """False-negative rate at each cumulative rule point: P0..P8, then
    +rule 1 .. +rule 26. The series is non-increasing on a fixed corpus."""
    labels = load_labels(labels_path)
    dataset = load_dataset(gold_path, pred_path, schema_path, db_path)
    if len(labels) != len(dataset.examples):
        raise AlignmentError(
            f"{len(labels)} labels vs {len(dataset.examples)} examples")
    series = []
    for point in ABLATION_POINTS:
        selection = selection_for_point(point)
        fn_count = 0
        for example, label in zip(dataset.examples, labels):
            _, db_id, gold, pred = example
            verdict = etm_match(gold, pred, dataset.schemas[db_id],
                                dataset.dbs.get(db_id), selection)
            if label == "equivalent" and not verdict.matched:
                fn_count += 1
        n = len(dataset.examples)
        series.append({"point": point, "fn": fn_count,
                       "fn_rate": round(100.0 * fn_count / n, 1) if n else 0.0})
    result = {"report_version": REPORT_VERSION, "series": series}
    if out_path:
        write_report(result, out_path)
    return result
