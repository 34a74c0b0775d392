"""Tree-matching evaluation metrics for Text-to-SQL.

Public surface: parse/serialize for the SQL subset, schema loading and
constraint predicates, normalization, the rewrite canonicalizer, the three
metrics (tree matching, legacy set matching, execution accuracy), the random
instance generator with its counterexample search, and the batch harness.
"""

from .ast_nodes import QueryAst, serialize
from .baseline import ResultTable, esm_match, exe_match, execute
from .database import DatabaseInstance
from .dbgen import GenConfig, counterexample_search, generate_db
from .errors import (AlignmentError, EsmParseError, EtmError, ExecError,
                     GenError, ParseError, ResolutionError, RewriteDivergence,
                     SchemaError, UnknownColumn, UnknownRule, UnknownTable)
from .esm import EsmFlags
from .harness import ablation, error_analysis, run_eval
from .matcher import MetricVerdict, batch_match, etm_match
from .normalize import NormalizedAst, normalize
from .parser import parse
from .rewrite import canonicalize, explain
from .rules import CATALOG, RuleBinding, RuleSelection, check_assumption
from .schema import Schema, load_schema

__all__ = [
    "QueryAst", "serialize", "parse",
    "Schema", "load_schema",
    "NormalizedAst", "normalize",
    "canonicalize", "explain", "CATALOG", "RuleBinding", "RuleSelection",
    "check_assumption",
    "MetricVerdict", "etm_match", "batch_match",
    "ResultTable", "EsmFlags", "esm_match", "exe_match", "execute",
    "DatabaseInstance", "GenConfig", "generate_db", "counterexample_search",
    "run_eval", "error_analysis", "ablation",
    "EtmError", "ParseError", "SchemaError", "UnknownTable", "UnknownColumn",
    "ResolutionError", "RewriteDivergence", "UnknownRule", "GenError",
    "ExecError", "EsmParseError", "AlignmentError",
]
