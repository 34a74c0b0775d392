"""Command-line entry point: etm eval | analyze | ablate | explain | rules."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dbgen import GenConfig
from .errors import EtmError
from .esm import EsmFlags
from .harness import (ablation, error_analysis, load_labels, load_schema_path,
                      render_table, run_eval, write_report)
from .matcher import etm_match
from .rules import CATALOG, RuleSelection
from .schema import load_schema


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EtmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etm",
        description="Tree-matching evaluation metrics for Text-to-SQL")
    sub = parser.add_subparsers(required=True)

    p_eval = sub.add_parser("eval", help="run metrics over a dataset")
    p_eval.add_argument("--gold", required=True,
                        help="gold file: one 'SQL<TAB>db_id' per line")
    p_eval.add_argument("--pred", required=True,
                        help="prediction file: one SQL per line")
    p_eval.add_argument("--schemas", required=True,
                        help="schema directory or combined JSON file")
    p_eval.add_argument("--dbs", default=None,
                        help="database directory: <db_id>/<db_id>.sqlite")
    p_eval.add_argument("--metrics", default="etm,esm,exe",
                        help="comma-separated subset of etm,esm,exe")
    p_eval.add_argument("--rules", default="all",
                        help="rule selection: all | P | P<k> | <n>")
    p_eval.add_argument("--workers", type=int, default=1)
    p_eval.add_argument("--timeout-secs", type=float, default=30.0)
    p_eval.add_argument("--no-value-check", action="store_true",
                        help="legacy matcher: disable value comparison")
    p_eval.add_argument("--no-distinct-check", action="store_true",
                        help="legacy matcher: disable aggregate DISTINCT check")
    p_eval.add_argument("--out", required=True)
    p_eval.set_defaults(func=cmd_eval)

    p_an = sub.add_parser("analyze", help="FP/FN analysis of a report")
    p_an.add_argument("--report", required=True)
    p_an.add_argument("--labels", default=None,
                      help="one 'equivalent' or 'distinct' per line")
    p_an.add_argument("--oracle-trials", type=int, default=25)
    p_an.add_argument("--out", default=None)
    p_an.set_defaults(func=cmd_analyze)

    p_ab = sub.add_parser("ablate", help="cumulative-rule ablation series")
    p_ab.add_argument("--gold", required=True)
    p_ab.add_argument("--pred", required=True)
    p_ab.add_argument("--schemas", required=True)
    p_ab.add_argument("--labels", required=True)
    p_ab.add_argument("--dbs", default=None)
    p_ab.add_argument("--out", required=True)
    p_ab.set_defaults(func=cmd_ablate)

    p_ex = sub.add_parser("explain", help="show the rewrite trace for a pair")
    p_ex.add_argument("--gold", required=True)
    p_ex.add_argument("--pred", required=True)
    p_ex.add_argument("--schema", required=True,
                      help="schema JSON or DDL file for one database")
    p_ex.add_argument("--rules", default="all")
    p_ex.set_defaults(func=cmd_explain)

    p_r = sub.add_parser("rules", help="list the rule catalog")
    p_r.set_defaults(func=cmd_rules)
    return parser


def _seed() -> int:
    return int(os.environ.get("ETM_SEED", "0"))


def cmd_eval(args) -> int:
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    report = run_eval(
        args.gold, args.pred, args.schemas, db_path=args.dbs,
        metrics=metrics, rules=RuleSelection.parse(args.rules),
        out_path=args.out, workers=args.workers, timeout=args.timeout_secs,
        esm_flags=EsmFlags(value_check=not args.no_value_check,
                           distinct_check=not args.no_distinct_check))
    print(render_table(report))
    print(f"report written to {args.out}")
    return 0


def cmd_analyze(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        report = json.load(fh)
    if args.labels:
        result = error_analysis(report, labels=load_labels(args.labels))
        for m in report["metrics"]:
            print(f"{m.upper():>4}: FP {result['fp_rate'][m]:5.1f}%  "
                  f"FN {result['fn_rate'][m]:5.1f}%")
    else:
        schema_path = report.get("inputs", {}).get("schemas")
        if not schema_path:
            print("error: report carries no schema path; provide --labels",
                  file=sys.stderr)
            return 2
        schemas = load_schema_path(schema_path)
        result = error_analysis(report, schemas=schemas,
                                oracle=GenConfig(seed=_seed()),
                                oracle_trials=args.oracle_trials)
        for m, hits in result["confirmed_fp"].items():
            print(f"{m.upper():>4}: {len(hits)} confirmed false positives")
    if args.out:
        write_report(result, args.out)
    return 0


def cmd_ablate(args) -> int:
    result = ablation(args.gold, args.pred, args.schemas, args.labels,
                      out_path=args.out, db_path=args.dbs)
    for point in result["series"]:
        print(f"{point['point']:>3}: FN {point['fn_rate']:5.1f}%")
    print(f"series written to {args.out}")
    return 0


def cmd_explain(args) -> int:
    with open(args.schema, encoding="utf-8") as fh:
        text = fh.read()
    if args.schema.endswith(".json"):
        schema = load_schema(json.loads(text))
    else:
        schema = load_schema(text)
    verdict = etm_match(args.gold, args.pred, schema,
                        rules=RuleSelection.parse(args.rules))
    print(f"outcome: {verdict.outcome}"
          + (f" ({verdict.invalid_kind})" if verdict.invalid_kind else ""))
    if verdict.trace and "gold_canonical" in verdict.trace:
        print(f"gold canonical: {verdict.trace['gold_canonical']}")
        print(f"pred canonical: {verdict.trace['pred_canonical']}")
        for side in ("gold", "pred"):
            print(f"-- {side} rewrites --")
            rules_used = verdict.trace[f"{side}_rules"]
            if not rules_used:
                print("no rewrites applied")
            for rb in rules_used:
                info = CATALOG[rb["rule"]]
                bind = ", ".join(f"{k}={v}" for k, v in rb["bindings"].items())
                print(f"rule {rb['rule']}: {info.summary}"
                      + (f" [{bind}]" if bind else "")
                      + (f" ({rb['verdict']})" if rb["verdict"] != "holds" else ""))
    elif verdict.trace:
        print(json.dumps(verdict.trace, indent=2, default=str))
    return 0


def cmd_rules(args) -> int:
    print("preprocessing steps:")
    for pid, text in enumerate([
            "case-fold identifiers",
            "qualify bare column references",
            "canonical projection order",
            "resolve table aliases to real names",
            "canonical join operand order, conditions merged",
            "canonical operand order for commutative comparisons",
            "resolve and drop projection aliases",
            "drop parenthesis nodes",
            "resolve quoting (unresolvable quoted names become literals)"]):
        print(f"  P{pid}: {text}")
    print("rewrite rules:")
    for rid in sorted(CATALOG):
        info = CATALOG[rid]
        assumption = f"  [assumes: {info.assumption}]" if info.assumption else ""
        print(f"  {rid:>2}: {info.summary}{assumption}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
