"""Equivalence rewriting: drive normalized trees to a canonical form.

Each enabled rule (1..26), scanned in ascending id order, is applied
innermost-scope-first wherever its pattern matches and its assumption holds.
A full pass repeats until a sweep changes nothing; preprocessing
normalization re-runs after every effective rule so later rules always see
canonical shape. Rules whose assumption fails or is unverifiable are never
applied; the attempt is still recorded in the trace.

Rewrite directions are fixed so the system terminates: see the rule
summaries in rules.CATALOG. Several matchers carry guards stricter than the
catalog assumption (noted inline) where the bare assumption would not be
sufficient for semantic preservation on adversarial data; guards fail
closed.
"""

from __future__ import annotations

import dataclasses

from .ast_nodes import (Between, Binary, Case, Cast, ColumnRef, Compound,
                        DerivedTable, FnCall, FromClause, InList, JoinItem,
                        Literal, NamedTable, OrderItem, Projection, QueryAst,
                        SelectCore, Star, Subquery, Unary, build_chain,
                        expr_scope, flatten_chain, transform, walk)
from .errors import RewriteDivergence
from .normalize import NormalizedAst, normalize, relation_outputs
from .rules import (CATALOG, FAILS, HOLDS, UNVERIFIABLE, RuleBinding,
                    RuleSelection, check_assumption)

SWEEP_CAP = 32

_CMP = ("=", "!=", "<", ">", "<=", ">=")
_NEGATE = {"=": "!=", "!=": "=", "<": ">=", ">": "<=", "<=": ">", ">=": "<"}
_MIRROR = {"=": "=", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}
_AGG_FNS = {"count", "sum", "avg", "min", "max", "total", "group_concat"}
_FLOAT_TYPES = {"float", "real", "double", "double precision"}


def canonicalize(ast, schema, db=None, rules: RuleSelection | None = None):
    """Apply enabled rewrite rules to fixpoint.

    ast may be a NormalizedAst or a bare (already normalized) QueryAst.
    Returns (tree, trace).
    """
    selection = rules if rules is not None else RuleSelection.full()
    tree = ast.tree if isinstance(ast, NormalizedAst) else ast
    ctx = _Ctx(schema, db, selection)
    enabled = sorted(r for r in selection.rules if r in CATALOG)
    for _ in range(SWEEP_CAP):
        changed = False
        for rid in enabled:
            new_tree = _apply_everywhere(tree, rid, ctx)
            if new_tree != tree:
                tree = normalize(new_tree, schema, selection.p_rules).tree
                changed = True
        if not changed:
            break
    else:
        raise RewriteDivergence(
            f"no fixpoint after {SWEEP_CAP} sweeps")
    return tree, ctx.trace


def explain(trace) -> str:
    """Human-readable audit of a rewrite trace, one line per rule event."""
    if not trace:
        return "no rewrites applied"
    lines = []
    for rb in trace:
        info = CATALOG[rb.rule_id]
        bind = ", ".join(f"{k}={v}" for k, v in rb.bindings.items())
        where = f" at {rb.path}" if rb.path else ""
        line = f"rule {rb.rule_id}{where}: {info.summary}"
        if bind:
            line += f" [{bind}]"
        if info.assumption:
            line += f" (assumption: {info.assumption} -> {rb.verdict})"
        elif rb.verdict != HOLDS:
            line += f" ({rb.verdict})"
        lines.append(line)
    return "\n".join(lines)


class _Ctx:
    def __init__(self, schema, db, selection):
        self.schema = schema
        self.db = db
        self.selection = selection
        self.trace: list[RuleBinding] = []
        self._attempted = set()

    def gate(self, rid, bindings, path) -> str:
        verdict = check_assumption(rid, bindings, self.schema, self.db)
        if verdict != HOLDS:
            key = (rid, verdict, tuple(sorted(
                (k, str(_display(v))) for k, v in bindings.items())))
            if key not in self._attempted:
                self._attempted.add(key)
                self.trace.append(RuleBinding(
                    rid, _display_map(bindings), verdict, path))
        return verdict

    def apply(self, rid, bindings, path):
        self.trace.append(RuleBinding(rid, _display_map(bindings), HOLDS, path))


def _display(v):
    if hasattr(v, "sql"):
        return v.sql()
    if isinstance(v, (list, tuple)):
        return [_display(x) for x in v]
    return v


def _display_map(bindings):
    return {k: _display(v) for k, v in bindings.items()}


# --- traversal ---------------------------------------------------------------

def _apply_everywhere(tree: QueryAst, rid: int, ctx: _Ctx) -> QueryAst:
    fn = _RULES[rid]

    def visit(q: QueryAst, path: str, env: dict) -> QueryAst:
        out = fn(q, ctx, path, env)
        return out if out is not None else q

    return _map_queries(tree, visit, "query", {})


def _map_queries(q: QueryAst, visit, path: str, env: dict) -> QueryAst:
    """Rebuild q with visit applied to every QueryAst, innermost first."""
    env2 = dict(env)
    ctes = []
    for i, cte in enumerate(q.ctes):
        sub = _map_queries(cte.query, visit, f"{path}.ctes[{i}]", env2)
        env2[cte.name.lower()] = sub
        ctes.append(dataclasses.replace(cte, query=sub))

    def expr_fn(node):
        if isinstance(node, Subquery):
            return Subquery(_map_queries(node.query, visit, path + ".sub", env2))
        return node

    def map_core(core: SelectCore) -> SelectCore:
        from_ = core.from_
        if from_ is not None:
            def map_src(src):
                if isinstance(src, DerivedTable):
                    return dataclasses.replace(
                        src, query=_map_queries(src.query, visit,
                                                path + ".derived", env2))
                return src
            joins = tuple(dataclasses.replace(
                j, source=map_src(j.source),
                on=transform(j.on, expr_fn, expr_scope) if j.on is not None else None)
                for j in from_.joins)
            from_ = FromClause(map_src(from_.base), joins)
        t = lambda e: transform(e, expr_fn, expr_scope) if e is not None else None
        return dataclasses.replace(
            core,
            projections=tuple(Projection(t(p.expr), p.alias)
                              for p in core.projections),
            from_=from_, where=t(core.where),
            group_by=tuple(t(e) for e in core.group_by),
            having=t(core.having))

    def map_set(se):
        if isinstance(se, Compound):
            return Compound(se.op, map_set(se.left), map_set(se.right))
        return map_core(se)

    order_by = tuple(
        OrderItem(transform(o.expr, expr_fn, expr_scope), o.direction)
        for o in q.order_by)
    q2 = QueryAst(body=map_set(q.body), order_by=order_by, limit=q.limit,
                  ctes=tuple(ctes))
    return visit(q2, path, env2)


def _map_cores(q: QueryAst, fn):
    """Apply fn(core, order_by_or_None) to each leaf core of q.body.

    order_by is passed (and may be rewritten) only when the body is a single
    core; compound-level ORDER BY addresses outputs, not tables. fn returns
    None or (core2, order_by2).
    """
    if isinstance(q.body, SelectCore):
        res = fn(q.body, q.order_by)
        if res is None:
            return None
        core2, order2 = res
        return dataclasses.replace(q, body=core2, order_by=order2)

    changed = False

    def rec(se):
        nonlocal changed
        if isinstance(se, Compound):
            return Compound(se.op, rec(se.left), rec(se.right))
        res = fn(se, None)
        if res is None:
            return se
        changed = True
        return res[0]

    body = rec(q.body)
    return dataclasses.replace(q, body=body) if changed else None


# --- shared pattern helpers ---------------------------------------------------

def _single_table(core: SelectCore):
    """Real table name when FROM is exactly one named table, else None."""
    f = core.from_
    if f is not None and not f.joins and isinstance(f.base, NamedTable):
        return f.base.name.lower()
    return None


def _visible_map(core: SelectCore) -> dict:
    """visible qualifier -> real table name (None for derived tables)."""
    out = {}
    f = core.from_
    if f is None:
        return out
    for src in [f.base] + [j.source for j in f.joins]:
        if isinstance(src, NamedTable):
            out[(src.alias or src.name).lower()] = src.name.lower()
        else:
            if src.alias:
                out[src.alias.lower()] = None
    return out


def _schema_col(vmap: dict, schema, ref) -> tuple | None:
    """(real_table, column) when ref resolves to a schema column."""
    if not isinstance(ref, ColumnRef) or ref.table is None:
        return None
    real = vmap.get(ref.table.lower())
    if real is None:
        return None
    if not schema.has_column(real, ref.column):
        return None
    return real, ref.column.lower()


def _inner_only(core: SelectCore) -> bool:
    f = core.from_
    return f is None or all(j.kind == "INNER" for j in f.joins)


def _conjuncts(e):
    return flatten_chain(e, "AND") if e is not None else []

def _rebuild_conj(parts):
    return build_chain(parts, "AND") if parts else None


def _on_conjuncts(core: SelectCore):
    out = []
    if core.from_ is not None:
        for j in core.from_.joins:
            if j.on is not None:
                out.extend(_conjuncts(j.on))
    return out


def _from_sources(core: SelectCore):
    f = core.from_
    if f is None:
        return []
    return [f.base] + [j.source for j in f.joins]


def _rebuild_inner_from(sources, conds):
    """FROM over named/derived sources with inner joins; merged conditions go
    on the last join. Returns (FromClause, leftover_conds_for_where)."""
    if len(sources) == 1:
        return FromClause(sources[0]), conds
    joins = []
    last = len(sources) - 1
    for i, s in enumerate(sources[1:], start=1):
        on = _rebuild_conj(conds) if i == last else None
        joins.append(JoinItem("INNER", s, on))
    return FromClause(sources[0], tuple(joins)), []


def _is_count_star(e) -> bool:
    return (isinstance(e, FnCall) and e.name == "count" and not e.distinct
            and len(e.args) == 1 and isinstance(e.args[0], Star)
            and e.args[0].table is None)


def _eq_sides(e):
    """For Binary('=') return (left, right) else None."""
    if isinstance(e, Binary) and e.op == "=":
        return e.left, e.right
    return None


def _col_lit_compare(e):
    """View a comparison as (col, op_from_col_side, literal) regardless of
    operand orientation (P5 may have mirrored it)."""
    if not isinstance(e, Binary) or e.op not in _CMP:
        return None
    if isinstance(e.left, ColumnRef) and isinstance(e.right, Literal):
        return e.left, e.op, e.right
    if isinstance(e.left, Literal) and isinstance(e.right, ColumnRef):
        return e.right, _MIRROR[e.op], e.left
    return None


def _substr_call(e):
    """(target, start, length) for SUBSTR(target, start, length) with numeric
    literal start/length."""
    if (isinstance(e, FnCall) and e.name in ("substr", "substring")
            and len(e.args) == 3 and not e.distinct):
        target, start, length = e.args
        if (isinstance(start, Literal) and start.kind == "number"
                and isinstance(length, Literal) and length.kind == "number"):
            return target, start, length
    return None


def _number(value) -> Literal:
    if isinstance(value, float) and value == int(value):
        value = int(value)
    return Literal("number", value, str(value))


def _count_refs(node, table: str) -> int:
    """Occurrences of a qualifier anywhere in the subtree, nested scopes
    included (conservative: shadowed names count too)."""
    n = 0
    for x in walk(node):
        if isinstance(x, ColumnRef) and x.table and x.table.lower() == table:
            n += 1
        elif isinstance(x, Star) and x.table and x.table.lower() == table:
            n += 1
    return n


def _transform_core_exprs(core, order_by, fn):
    t = lambda e: transform(e, fn, expr_scope) if e is not None else None
    from_ = core.from_
    if from_ is not None:
        joins = tuple(
            dataclasses.replace(j, on=t(j.on)) if j.on is not None else j
            for j in from_.joins)
        from_ = dataclasses.replace(from_, joins=joins)
    core2 = dataclasses.replace(
        core,
        projections=tuple(Projection(t(p.expr), p.alias)
                          for p in core.projections),
        from_=from_, where=t(core.where),
        group_by=tuple(t(e) for e in core.group_by), having=t(core.having))
    order2 = order_by
    if order_by:
        order2 = tuple(OrderItem(t(o.expr), o.direction) for o in order_by)
    return core2, order2


def _expr_rule(q, ctx, path, make_fn):
    """Run an expression transformer over every leaf core (and the sole-body
    ORDER BY). make_fn(core) builds the per-core node function."""
    def per_core(core, order_by):
        fn = make_fn(core)
        core2, order2 = _transform_core_exprs(
            core, order_by if order_by is not None else (), fn)
        if core2 == core and (order_by is None or order2 == order_by):
            return None
        return core2, (order2 if order_by is not None else None)

    out = _map_cores(q, lambda c, o: per_core(c, o))
    return out


def _replace_ref(node, old: ColumnRef, new: ColumnRef):
    return transform(node, lambda n: new if n == old else n, expr_scope)


# --- rules 1..26 --------------------------------------------------------------

def _rule_1(q, ctx, path, env):
    # ORDER BY c LIMIT 1 over one table -> WHERE c = (SELECT MIN/MAX(c) ...)
    if not (isinstance(q.body, SelectCore) and len(q.order_by) == 1
            and q.limit is not None and q.limit.count == 1
            and q.limit.offset is None):
        return None
    core = q.body
    t1 = _single_table(core)
    if t1 is None or core.group_by or core.having is not None or core.distinct:
        return None
    item = q.order_by[0]
    col = item.expr
    if not (isinstance(col, ColumnRef) and col.table
            and col.table.lower() == t1):
        return None
    vmap = _visible_map(core)
    sc = _schema_col(vmap, ctx.schema, col)
    if sc is None:
        return None
    # NULL ordering makes the bare UNIQUE assumption insufficient; fail closed
    if not ctx.schema.is_non_null(*sc):
        return None
    bindings = {"t1": t1, "c1": sc[1], "order": item.direction}
    if ctx.gate(1, bindings, path) != HOLDS:
        return None
    agg = "min" if item.direction == "ASC" else "max"
    sub = QueryAst(body=SelectCore(
        projections=(Projection(FnCall(agg, (col,))),),
        from_=core.from_, where=core.where))
    eq = Binary("=", col, Subquery(sub))
    where = _rebuild_conj(_conjuncts(core.where) + [eq])
    ctx.apply(1, bindings, path)
    return dataclasses.replace(
        q, body=dataclasses.replace(core, where=where), order_by=(), limit=None)


def _rule_2(q, ctx, path, env):
    # drop DISTINCT (top level or inside an aggregate) on a unique column
    def per_core(core, order_by):
        changed = False
        t1 = _single_table(core)
        vmap = _visible_map(core)
        if core.distinct and t1 is not None:
            for p in core.projections:
                sc = _schema_col(vmap, ctx.schema, p.expr)
                if sc is None:
                    continue
                if not ctx.schema.is_non_null(*sc):
                    continue  # UNIQUE still allows duplicate NULLs
                bindings = {"t1": sc[0], "c1": sc[1]}
                if ctx.gate(2, bindings, path) == HOLDS:
                    ctx.apply(2, bindings, path)
                    core = dataclasses.replace(core, distinct=False)
                    changed = True
                    break

        def fn(node):
            nonlocal changed
            if (isinstance(node, FnCall) and node.distinct
                    and len(node.args) == 1 and t1 is not None):
                sc = _schema_col(vmap, ctx.schema, node.args[0])
                if sc is None or not ctx.schema.is_non_null(*sc):
                    return node
                bindings = {"t1": sc[0], "c1": sc[1]}
                if ctx.gate(2, bindings, path) == HOLDS:
                    ctx.apply(2, bindings, path)
                    changed = True
                    return dataclasses.replace(node, distinct=False)
            return node

        core2, order2 = _transform_core_exprs(
            core, order_by if order_by is not None else (), fn)
        if not changed:
            return None
        return core2, (order2 if order_by is not None else None)

    return _map_cores(q, per_core)


def _simple_filtered_core(se, schema):
    """For rule 3: a core of shape SELECT c1 FROM t1 WHERE d1."""
    if not isinstance(se, SelectCore):
        return None
    t1 = _single_table(se)
    if (t1 is None or se.distinct or se.group_by or se.having is not None
            or se.where is None or len(se.projections) != 1):
        return None
    col = se.projections[0].expr
    sc = _schema_col(_visible_map(se), schema, col)
    if sc is None:
        return None
    return t1, col, sc, se.where


def _rule_3(q, ctx, path, env):
    # SELECT c FROM t WHERE d1 INTERSECT/UNION same -> WHERE d1 AND/OR d2
    def rec(se):
        if not isinstance(se, Compound):
            return se
        se = Compound(se.op, rec(se.left), rec(se.right))
        if se.op not in ("UNION", "INTERSECT"):
            return se
        left = _simple_filtered_core(se.left, ctx.schema)
        right = _simple_filtered_core(se.right, ctx.schema)
        if left is None or right is None:
            return se
        (t1, col, sc, d1), (t2, col2, _, d2) = left, right
        if t1 != t2 or col != col2:
            return se
        if not ctx.schema.is_non_null(*sc):
            return se  # NULL duplicates defeat set-op deduplication
        bindings = {"t1": t1, "c1": sc[1], "op": se.op}
        if ctx.gate(3, bindings, path) != HOLDS:
            return se
        ctx.apply(3, bindings, path)
        joiner = "AND" if se.op == "INTERSECT" else "OR"
        return dataclasses.replace(
            se.left, where=Binary(joiner, d1, d2))

    if isinstance(q.body, SelectCore):
        return None
    body = rec(q.body)
    return dataclasses.replace(q, body=body) if body != q.body else None


def _rule_4(q, ctx, path, env):
    # GROUP BY unique_key, extras -> GROUP BY unique_key
    def per_core(core, order_by):
        if len(core.group_by) < 2:
            return None
        t1 = _single_table(core)
        if t1 is None:
            return None
        vmap = _visible_map(core)
        for key in core.group_by:
            sc = _schema_col(vmap, ctx.schema, key)
            if sc is None or not ctx.schema.is_non_null(*sc):
                continue
            bindings = {"t1": sc[0], "c1": sc[1]}
            if ctx.gate(4, bindings, path) == HOLDS:
                ctx.apply(4, bindings, path)
                return dataclasses.replace(core, group_by=(key,)), order_by
        return None

    return _map_cores(q, per_core)


def _rule_5(q, ctx, path, env):
    # SELECT c FROM t [WHERE d] EXCEPT q1 -> ... WHERE c NOT IN (q1)
    def rec(se):
        if not isinstance(se, Compound):
            return se
        se = Compound(se.op, rec(se.left), rec(se.right))
        if se.op != "EXCEPT" or not isinstance(se.left, SelectCore):
            return se
        core = se.left
        t1 = _single_table(core)
        if (t1 is None or core.distinct or core.group_by
                or core.having is not None or len(core.projections) != 1):
            return se
        sc = _schema_col(_visible_map(core), ctx.schema, core.projections[0].expr)
        if sc is None:
            return se
        # the subtrahend must provably produce no NULLs, or NOT IN diverges
        rsc = _simple_projected_col(se.right, ctx.schema)
        if rsc is None or not ctx.schema.is_non_null(*rsc):
            return se
        bindings = {"t1": t1, "c1": sc[1]}
        if ctx.gate(5, bindings, path) != HOLDS:
            return se
        ctx.apply(5, bindings, path)
        cond = Binary("NOT IN", core.projections[0].expr,
                      Subquery(QueryAst(body=se.right)))
        where = _rebuild_conj(_conjuncts(core.where) + [cond])
        return dataclasses.replace(core, where=where)

    if isinstance(q.body, SelectCore):
        return None
    body = rec(q.body)
    return dataclasses.replace(q, body=body) if body != q.body else None


def _simple_projected_col(se, schema):
    if not isinstance(se, SelectCore) or len(se.projections) != 1:
        return None
    return _schema_col(_visible_map(se), schema, se.projections[0].expr)


def _rule_6(q, ctx, path, env):
    # COUNT(c) -> COUNT(*) for a non-null column (inner joins only)
    def make_fn(core):
        vmap = _visible_map(core)
        safe = _inner_only(core)

        def fn(node):
            if (safe and isinstance(node, FnCall) and node.name == "count"
                    and not node.distinct and len(node.args) == 1):
                sc = _schema_col(vmap, ctx.schema, node.args[0])
                if sc is None:
                    return node
                bindings = {"t1": sc[0], "c1": sc[1]}
                if ctx.gate(6, bindings, path) == HOLDS:
                    ctx.apply(6, bindings, path)
                    return FnCall("count", (Star(None),))
            return node
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _rule_7(q, ctx, path, env):
    # drop a WHERE conjunct `c IS NOT NULL` on a non-null column
    def per_core(core, order_by):
        if core.where is None or not _inner_only(core):
            return None
        vmap = _visible_map(core)
        kept, removed = [], False
        for part in _conjuncts(core.where):
            if (isinstance(part, Binary) and part.op == "IS NOT"
                    and isinstance(part.right, Literal)
                    and part.right.kind == "null"):
                sc = _schema_col(vmap, ctx.schema, part.left)
                if sc is not None:
                    bindings = {"t1": sc[0], "c1": sc[1]}
                    if ctx.gate(7, bindings, path) == HOLDS:
                        ctx.apply(7, bindings, path)
                        removed = True
                        continue
            kept.append(part)
        if not removed:
            return None
        return dataclasses.replace(core, where=_rebuild_conj(kept)), order_by

    return _map_cores(q, per_core)


def _rule_8(q, ctx, path, env):
    # CAST(SUM(c) AS FLOAT) / COUNT(*) -> AVG(c)
    def make_fn(core):
        vmap = _visible_map(core)
        safe = _inner_only(core)

        def fn(node):
            if not (safe and isinstance(node, Binary) and node.op == "/"):
                return node
            cast, cnt = node.left, node.right
            if not (isinstance(cast, Cast) and cast.to_type in _FLOAT_TYPES
                    and _is_count_star(cnt)):
                return node
            inner = cast.operand
            if not (isinstance(inner, FnCall) and inner.name == "sum"
                    and not inner.distinct and len(inner.args) == 1):
                return node
            sc = _schema_col(vmap, ctx.schema, inner.args[0])
            if sc is None:
                return node
            bindings = {"t1": sc[0], "c1": sc[1]}
            if ctx.gate(8, bindings, path) == HOLDS:
                ctx.apply(8, bindings, path)
                return FnCall("avg", (inner.args[0],))
            return node
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _case_one_branch(e):
    if (isinstance(e, Case) and len(e.branches) == 1
            and (e.else_ is None
                 or (isinstance(e.else_, Literal) and e.else_.kind == "null"))):
        return e.branches[0]
    return None


def _rule_9(q, ctx, path, env):
    # COUNT(CASE WHEN d THEN 1|c END) -> SUM(CASE WHEN d THEN 1 ELSE 0 END)
    def make_fn(core):
        vmap = _visible_map(core)
        safe = _inner_only(core)

        def fn(node):
            if not (safe and isinstance(node, FnCall) and node.name == "count"
                    and not node.distinct and len(node.args) == 1):
                return node
            branch = _case_one_branch(node.args[0])
            if branch is None:
                return node
            cond, then = branch
            bindings = {"d1": cond}
            if isinstance(then, Literal):
                if then.kind != "number" or then.value != 1:
                    return node
            elif isinstance(then, ColumnRef):
                sc = _schema_col(vmap, ctx.schema, then)
                if sc is None:
                    return node
                bindings = {"t1": sc[0], "c1": sc[1], "d1": cond}
            else:
                return node
            if ctx.gate(9, bindings, path) == HOLDS:
                ctx.apply(9, bindings, path)
                return FnCall("sum", (Case(((cond, _number(1)),), _number(0)),))
            return node
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _rule_10(q, ctx, path, env):
    # SELECT c, _ FROM t ORDER BY c LIMIT 1 -> SELECT MIN/MAX(c), _ FROM t
    if not (isinstance(q.body, SelectCore) and len(q.order_by) == 1
            and q.limit is not None and q.limit.count == 1
            and q.limit.offset is None):
        return None
    core = q.body
    t1 = _single_table(core)
    if (t1 is None or core.group_by or core.having is not None
            or core.distinct or core.where is not None):
        return None
    item = q.order_by[0]
    col = item.expr
    if not isinstance(col, ColumnRef):
        return None
    sc = _schema_col(_visible_map(core), ctx.schema, col)
    if sc is None:
        return None
    if not any(p.expr == col for p in core.projections):
        return None
    # ASC puts NULLs first while MIN skips them; fail closed unless NOT NULL
    if item.direction == "ASC" and not ctx.schema.is_non_null(*sc):
        return None
    bindings = {"t1": t1, "c1": sc[1], "order": item.direction}
    if ctx.gate(10, bindings, path) != HOLDS:
        return None
    ctx.apply(10, bindings, path)
    agg = "min" if item.direction == "ASC" else "max"
    projections = tuple(
        Projection(FnCall(agg, (col,)), p.alias) if p.expr == col else p
        for p in core.projections)
    return dataclasses.replace(
        q, body=dataclasses.replace(core, projections=projections),
        order_by=(), limit=None)


def _rule_11(q, ctx, path, env):
    # expand projection stars to explicit column lists
    def per_core(core, order_by):
        if not any(isinstance(p.expr, Star) for p in core.projections):
            return None
        sources = _from_sources(core)
        if not sources:
            return None

        def columns_of(src):
            if isinstance(src, NamedTable):
                name = src.name.lower()
                if name in env:
                    return (src.alias or name), relation_outputs(
                        env[name], ctx.schema, env), False
                if ctx.schema.has_table(name):
                    return ((src.alias or name),
                            [c.lower() for c in ctx.schema.all_columns(name)],
                            True)
                return None
            return (src.alias,
                    relation_outputs(src.query, ctx.schema, env), False)

        new_projs = []
        changed = False
        for p in core.projections:
            if not isinstance(p.expr, Star):
                new_projs.append(p)
                continue
            star = p.expr
            expanded = []
            ok = True
            for src in sources:
                info = columns_of(src)
                if info is None:
                    ok = False
                    break
                visible, cols, is_table = info
                if star.table is not None and star.table.lower() != visible:
                    continue
                if not cols or (star.table is None and visible is None):
                    ok = False
                    break
                if is_table:
                    bindings = {"t1": (src.name.lower()), "columns": cols}
                    if ctx.gate(11, bindings, path) != HOLDS:
                        ok = False
                        break
                    ctx.apply(11, bindings, path)
                else:
                    ctx.apply(11, {"t1": visible, "columns": cols}, path)
                expanded.extend(ColumnRef(visible, c) for c in cols)
            if not ok or not expanded:
                new_projs.append(p)
                continue
            new_projs.extend(Projection(e) for e in expanded)
            changed = True
        if not changed:
            return None
        return dataclasses.replace(core, projections=tuple(new_projs)), order_by

    return _map_cores(q, per_core)


def _rule_12(q, ctx, path, env):
    # c = '150' -> c = 150 when c has numeric affinity
    def make_fn(core):
        vmap = _visible_map(core)

        def fn(node):
            if not (isinstance(node, Binary) and node.op in _CMP):
                return node
            sides = [(node.left, node.right), (node.right, node.left)]
            for col, lit in sides:
                if not (isinstance(lit, Literal) and lit.kind == "string"):
                    continue
                sc = _schema_col(vmap, ctx.schema, col)
                if sc is None:
                    continue
                text = str(lit.value)
                try:
                    num = float(text)
                except ValueError:
                    continue
                # string-vs-number comparison only converts under numeric
                # affinity; fail closed on text columns
                if not ctx.schema.numeric_affinity(*sc):
                    continue
                bindings = {"x": text, "t1": sc[0], "c1": sc[1]}
                if ctx.gate(12, bindings, path) != HOLDS:
                    continue
                ctx.apply(12, bindings, path)
                value = int(num) if num == int(num) and "." not in text \
                    and "e" not in text.lower() else num
                new_lit = Literal("number", value, text)
                if lit is node.left:
                    return Binary(node.op, new_lit, node.right)
                return Binary(node.op, node.left, new_lit)
            return node
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _subquery_core(sub: Subquery):
    """The inner core when the subquery is a bare one-core query."""
    iq = sub.query
    if iq.ctes or iq.order_by or iq.limit is not None:
        return None
    return iq.body if isinstance(iq.body, SelectCore) else None


def _rule_13(q, ctx, path, env):
    # c2 IN (SELECT pk FROM t1 WHERE d1) -> JOIN t1 ON pk = c2 ... WHERE d1
    def per_core(core, order_by):
        t2 = _single_table(core)
        if t2 is None or core.where is None:
            return None
        vmap = _visible_map(core)
        parts = _conjuncts(core.where)
        for i, part in enumerate(parts):
            if not (isinstance(part, Binary) and part.op == "IN"
                    and isinstance(part.right, Subquery)):
                continue
            outer_sc = _schema_col(vmap, ctx.schema, part.left)
            if outer_sc is None or outer_sc[0] != t2:
                continue
            inner = _subquery_core(part.right)
            if inner is None:
                continue
            t1 = _single_table(inner)
            if (t1 is None or t1 == t2 or inner.distinct or inner.group_by
                    or inner.having is not None or len(inner.projections) != 1):
                continue
            inner_sc = _schema_col(_visible_map(inner), ctx.schema,
                                   inner.projections[0].expr)
            if inner_sc is None or inner_sc[0] != t1:
                continue
            d1 = inner.where
            if d1 is not None and any(
                    r.table and r.table.lower() != t1
                    for r in walk(d1, expr_scope)
                    if isinstance(r, ColumnRef)):
                continue
            if d1 is not None and any(
                    isinstance(x, Subquery) for x in walk(d1)):
                continue
            bindings = {"t1": t1, "c1": inner_sc[1], "t2": t2, "c2": outer_sc[1]}
            if ctx.gate(13, bindings, path) != HOLDS:
                continue
            ctx.apply(13, bindings, path)
            join_on = Binary("=", ColumnRef(t1, inner_sc[1]),
                             ColumnRef(t2, outer_sc[1]))
            from_ = FromClause(NamedTable(t2),
                               (JoinItem("INNER", NamedTable(t1), join_on),))
            rest = parts[:i] + parts[i + 1:] + (_conjuncts(d1))
            return dataclasses.replace(
                core, from_=from_, where=_rebuild_conj(rest)), order_by
        return None

    return _map_cores(q, per_core)


def _rule_14(q, ctx, path, env):
    # drop a join whose only purpose is the pk-fk equality
    def per_core(core, order_by):
        if core.from_ is None or not core.from_.joins or not _inner_only(core):
            return None
        sources = _from_sources(core)
        if not all(isinstance(s, NamedTable) for s in sources):
            return None
        names = [s.name.lower() for s in sources]
        conds = _on_conjuncts(core)
        vmap = _visible_map(core)
        order = order_by or ()
        for i, eq in enumerate(conds):
            sides = _eq_sides(eq)
            if sides is None:
                continue
            a = _schema_col(vmap, ctx.schema, sides[0])
            b = _schema_col(vmap, ctx.schema, sides[1])
            if a is None or b is None or a[0] == b[0]:
                continue
            link = ctx.schema.pk_fk_link(a, b)
            if link is None:
                continue
            (pk_t, pk_c), (fk_t, fk_c) = link
            if names.count(pk_t) != 1 or pk_t not in names:
                continue
            # join rows lose NULL fk values; the bare Case-2 assumption is
            # not enough unless the fk column is NOT NULL
            if not ctx.schema.is_non_null(fk_t, fk_c):
                continue
            # nothing but the key equality may touch the pk table
            scope_nodes = [p.expr for p in core.projections]
            scope_nodes += [core.where, core.having]
            scope_nodes += list(core.group_by)
            scope_nodes += [o.expr for o in order]
            scope_nodes += [c for j, c in enumerate(conds) if j != i]
            blocked = False
            for node in scope_nodes:
                if node is None:
                    continue
                for x in walk(node):
                    if isinstance(x, Star) and x.table and x.table.lower() == pk_t:
                        blocked = True
                    if isinstance(x, Star) and x.table is None:
                        blocked = True
                    if (isinstance(x, ColumnRef) and x.table
                            and x.table.lower() == pk_t
                            and x.column.lower() != pk_c):
                        blocked = True
                    if isinstance(x, Subquery) and _count_refs(x, pk_t):
                        blocked = True
                if blocked:
                    break
            if blocked:
                continue
            x_cols = [r.sql() for p in core.projections
                      for r in walk(p.expr, expr_scope)
                      if isinstance(r, ColumnRef)]
            bindings = {"t1": pk_t, "c1": pk_c, "t2": fk_t, "c2": fk_c,
                        "X": x_cols}
            if ctx.gate(14, bindings, path) != HOLDS:
                continue
            ctx.apply(14, bindings, path)
            old_ref = ColumnRef(pk_t, pk_c)
            new_ref = ColumnRef(fk_t, fk_c)
            new_sources = [s for s in sources if s.name.lower() != pk_t]
            rest = [_replace_ref(c, old_ref, new_ref)
                    for j, c in enumerate(conds) if j != i]
            from_, leftovers = _rebuild_inner_from(new_sources, rest)
            where = _rebuild_conj(
                [_replace_ref(p, old_ref, new_ref)
                 for p in _conjuncts(core.where)] + leftovers)
            core2 = dataclasses.replace(
                core,
                projections=tuple(
                    Projection(_replace_ref(p.expr, old_ref, new_ref), p.alias)
                    for p in core.projections),
                from_=from_, where=where,
                group_by=tuple(_replace_ref(e, old_ref, new_ref)
                               for e in core.group_by),
                having=(_replace_ref(core.having, old_ref, new_ref)
                        if core.having is not None else None))
            order2 = tuple(OrderItem(_replace_ref(o.expr, old_ref, new_ref),
                                     o.direction) for o in order)
            return core2, (order2 if order_by is not None else None)
        return None

    return _map_cores(q, per_core)


def _rule_15(q, ctx, path, env):
    # SUBSTR(c,1,a)=x AND SUBSTR(c,b,n) OP y -> c OP x||y when a+1=b
    def per_core(core, order_by):
        if core.where is None:
            return None
        parts = _conjuncts(core.where)
        eqs, cmps = [], []
        for i, part in enumerate(parts):
            if not isinstance(part, Binary):
                continue
            for col_side, lit_side, op in _orientations(part):
                sub = _substr_call(col_side)
                if sub is None or not (isinstance(lit_side, Literal)
                                       and lit_side.kind == "string"):
                    continue
                target, start, length = sub
                if part.op == "=" and start.value == 1:
                    eqs.append((i, target, length.value, lit_side))
                elif op in ("<", ">", "<=", ">="):
                    cmps.append((i, target, start.value, op, lit_side))
        for ei, etarget, a, x in eqs:
            for ci, ctarget, b, op, y in cmps:
                if ci == ei or ctarget != etarget:
                    continue
                bindings = {"a": a, "b": b, "x": x.value, "y": y.value,
                            "c1": etarget.sql()}
                if ctx.gate(15, bindings, path) != HOLDS:
                    continue
                ctx.apply(15, bindings, path)
                merged = Binary(op, etarget,
                                Literal("string", str(x.value) + str(y.value),
                                        str(x.value) + str(y.value)))
                rest = [p for j, p in enumerate(parts) if j not in (ei, ci)]
                return dataclasses.replace(
                    core, where=_rebuild_conj(rest + [merged])), order_by
        return None

    return _map_cores(q, per_core)


def _orientations(part: Binary):
    """Yield (col_side, other_side, op_from_col_side) for both orientations."""
    yield part.left, part.right, part.op
    yield part.right, part.left, _MIRROR.get(part.op, part.op)


def _rule_16(q, ctx, path, env):
    # c LIKE 'x%' -> SUBSTR(c, 1, len(x)) = 'x'
    def make_fn(core):
        def fn(node):
            if not (isinstance(node, Binary) and node.op == "LIKE"
                    and isinstance(node.right, Literal)
                    and node.right.kind == "string"):
                return node
            pattern = str(node.right.value)
            if not (pattern.endswith("%") and len(pattern) > 1):
                return node
            x = pattern[:-1]
            if "%" in x or "_" in x:
                return node
            bindings = {"x": x, "n": len(x)}
            if ctx.gate(16, bindings, path) != HOLDS:
                return node
            ctx.apply(16, bindings, path)
            call = FnCall("substr", (node.left, _number(1), _number(len(x))))
            return Binary("=", call, Literal("string", x, x))
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _rule_17(q, ctx, path, env):
    # ORDER BY JULIANDAY(c) -> ORDER BY c
    if not q.order_by:
        return None
    items = []
    changed = False
    for item in q.order_by:
        e = item.expr
        if (isinstance(e, FnCall) and e.name == "julianday"
                and len(e.args) == 1 and not e.distinct):
            ctx.apply(17, {"c1": e.args[0].sql()}, path + ".order_by")
            items.append(OrderItem(e.args[0], item.direction))
            changed = True
        else:
            items.append(item)
    if not changed:
        return None
    return dataclasses.replace(q, order_by=tuple(items))


def _sorted_unique_items(items):
    by_key = {}
    for it in items:
        by_key.setdefault(it.sql(), it)
    return tuple(by_key[k] for k in sorted(by_key))


def _rule_18(q, ctx, path, env):
    # =/!= chains on one column <-> IN/NOT IN lists (canonical: sorted list)
    def make_fn(core):
        def fn(node):
            if isinstance(node, InList):
                items = _sorted_unique_items(node.items)
                if len(items) == 1:
                    ctx.apply(18, {"c1": node.target.sql()}, path)
                    return Binary("!=" if node.negated else "=",
                                  node.target, items[0])
                if items != node.items:
                    ctx.apply(18, {"c1": node.target.sql()}, path)
                    return dataclasses.replace(node, items=items)
                return node
            if isinstance(node, Binary) and node.op in ("OR", "AND"):
                want_op = "=" if node.op == "OR" else "!="
                negated = node.op == "AND"
                parts = flatten_chain(node, node.op)
                groups: dict[str, tuple] = {}
                rest = []
                for part in parts:
                    matched = None
                    if isinstance(part, Binary) and part.op == want_op:
                        for col, other, _ in _orientations(part):
                            if (isinstance(col, ColumnRef)
                                    and not isinstance(other, ColumnRef)
                                    and not isinstance(other, Subquery)):
                                matched = (col, [other])
                                break
                    elif (isinstance(part, InList) and part.negated == negated
                          and isinstance(part.target, ColumnRef)):
                        matched = (part.target, list(part.items))
                    if matched:
                        target, items = matched
                        key = target.sql()
                        if key in groups:
                            groups[key][1].extend(items)
                        else:
                            groups[key] = (target, items)
                    else:
                        rest.append(part)
                new_parts = list(rest)
                for key in sorted(groups):
                    target, items = groups[key]
                    items = _sorted_unique_items(items)
                    if len(items) == 1:
                        new_parts.append(Binary(want_op, target, items[0]))
                    else:
                        new_parts.append(InList(target, items, negated=negated))
                if (sorted(p.sql() for p in new_parts)
                        == sorted(p.sql() for p in parts)):
                    return node
                ctx.apply(18, {"c1": ", ".join(sorted(groups))}, path)
                return build_chain(new_parts, node.op)
            return node
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _rule_19(q, ctx, path, env):
    # collapse join-equal columns to one canonical side
    def per_core(core, order_by):
        if core.from_ is None or not core.from_.joins or not _inner_only(core):
            return None
        conds = _on_conjuncts(core)
        vmap = _visible_map(core)
        order = order_by or ()
        for i, eq in enumerate(conds):
            sides = _eq_sides(eq)
            if sides is None:
                continue
            l, r = sides
            if not (isinstance(l, ColumnRef) and isinstance(r, ColumnRef)):
                continue
            if l.table is None or r.table is None or l.table == r.table:
                continue

            def rank(ref):
                sc = _schema_col(vmap, ctx.schema, ref)
                is_pk = bool(sc) and ctx.schema.is_sole_primary_key(*sc)
                return (0 if is_pk else 1, ref.sql())

            target, other = sorted((l, r), key=rank)
            if rank(target) == rank(other):
                continue
            holders = [p.expr for p in core.projections]
            holders += [core.where, core.having]
            holders += list(core.group_by)
            holders += [o.expr for o in order]
            holders += [c for j, c in enumerate(conds) if j != i]
            occurrences = sum(
                1 for h in holders if h is not None
                for x in walk(h, expr_scope) if x == other)
            if occurrences == 0:
                continue
            ctx.apply(19, {"keep": target.sql(), "replace": other.sql()}, path)
            repl = lambda e: _replace_ref(e, other, target) if e is not None else None
            rest = [repl(c) if j != i else c for j, c in enumerate(conds)]
            core2, order2 = _rebuild_core_conds(core, rest, repl)
            order2 = tuple(OrderItem(repl(o.expr), o.direction) for o in order)
            return core2, (order2 if order_by is not None else None)
        return None

    return _map_cores(q, per_core)


def _rebuild_core_conds(core, conds, repl):
    """Rewrite all scope expressions with repl and reattach the (already
    rewritten) join conditions in canonical merged position."""
    sources = _from_sources(core)
    from_, leftovers = _rebuild_inner_from(sources, conds)
    where = _rebuild_conj(
        [repl(p) for p in _conjuncts(core.where)] + leftovers)
    core2 = dataclasses.replace(
        core,
        projections=tuple(Projection(repl(p.expr), p.alias)
                          for p in core.projections),
        from_=from_, where=where,
        group_by=tuple(repl(e) for e in core.group_by),
        having=repl(core.having) if core.having is not None else None)
    return core2, ()


def _rule_20(q, ctx, path, env):
    # c IN (SELECT c FROM same_table WHERE d_on_c) -> d_on_c
    def per_core(core, order_by):
        t1 = _single_table(core)
        if t1 is None or core.where is None:
            return None
        vmap = _visible_map(core)
        parts = _conjuncts(core.where)
        for i, part in enumerate(parts):
            if not (isinstance(part, Binary) and part.op == "IN"
                    and isinstance(part.right, Subquery)):
                continue
            outer_sc = _schema_col(vmap, ctx.schema, part.left)
            if outer_sc is None or outer_sc[0] != t1:
                continue
            inner = _subquery_core(part.right)
            if inner is None or _single_table(inner) != t1:
                continue
            if (inner.distinct or inner.group_by or inner.having is not None
                    or len(inner.projections) != 1 or inner.where is None):
                continue
            if inner.projections[0].expr != part.left:
                continue
            d1 = inner.where
            ok = True
            for x in walk(d1):
                if isinstance(x, ColumnRef) and x != part.left:
                    ok = False
                if isinstance(x, (Subquery, Star)):
                    ok = False
                if isinstance(x, Binary) and x.op in ("IS", "IS NOT"):
                    ok = False  # NULL tests break the witness argument
            if not ok:
                continue
            ctx.apply(20, {"t1": t1, "c1": outer_sc[1]}, path)
            rest = parts[:i] + parts[i + 1:] + _conjuncts(d1)
            return dataclasses.replace(core, where=_rebuild_conj(rest)), order_by
        return None

    return _map_cores(q, per_core)


def _dup_free(se, schema) -> bool:
    """Conservative proof that a set-operand produces no duplicate rows."""
    if isinstance(se, Compound):
        return se.op in ("UNION", "INTERSECT", "EXCEPT")
    core = se
    if core.distinct:
        return True
    if not core.group_by and core.projections and all(
            isinstance(p.expr, FnCall) and p.expr.name in _AGG_FNS
            for p in core.projections):
        return True  # a lone aggregate row
    t1 = _single_table(core)
    if t1 is not None:
        vmap = _visible_map(core)
        for p in core.projections:
            sc = _schema_col(vmap, schema, p.expr)
            if sc and schema.is_unique(*sc) and schema.is_non_null(*sc):
                return True
    return False


def _rule_21(q, ctx, path, env):
    # drop duplicate operands of UNION/INTERSECT chains
    def rec(se):
        if not isinstance(se, Compound):
            return se
        se = Compound(se.op, rec(se.left), rec(se.right))
        if se.op not in ("UNION", "INTERSECT"):
            return se
        parts = flatten_chain_set(se, se.op)
        uniq = []
        for p in parts:
            if p not in uniq:
                uniq.append(p)
        if len(uniq) == len(parts):
            return se
        if len(uniq) == 1:
            # collapsing removes the set-op's implicit deduplication, so the
            # survivor must provably be duplicate-free already
            if not _dup_free(uniq[0], ctx.schema):
                return se
            ctx.apply(21, {"q1": uniq[0].sql()}, path)
            return uniq[0]
        ctx.apply(21, {"q1": uniq[0].sql()}, path)
        out = uniq[0]
        for p in uniq[1:]:
            out = Compound(se.op, out, p)
        return out

    if isinstance(q.body, SelectCore):
        return None
    body = rec(q.body)
    return dataclasses.replace(q, body=body) if body != q.body else None


def flatten_chain_set(se, op):
    if isinstance(se, Compound) and se.op == op:
        return flatten_chain_set(se.left, op) + flatten_chain_set(se.right, op)
    return [se]


def _rule_22(q, ctx, path, env):
    # BETWEEN x AND y -> >= x AND <= y
    def make_fn(core):
        def fn(node):
            if not isinstance(node, Between):
                return node
            ctx.apply(22, {"c1": node.target.sql(), "x": node.low.sql(),
                           "y": node.high.sql()}, path)
            conj = Binary("AND", Binary(">=", node.target, node.low),
                          Binary("<=", node.target, node.high))
            return Unary("NOT", conj) if node.negated else conj
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _rule_23(q, ctx, path, env):
    # NOT (a cmp b) -> a negated_cmp b
    def make_fn(core):
        def fn(node):
            if (isinstance(node, Unary) and node.op == "NOT"
                    and isinstance(node.operand, Binary)
                    and node.operand.op in _NEGATE):
                ctx.apply(23, {"d1": node.operand.sql()}, path)
                inner = node.operand
                return Binary(_NEGATE[inner.op], inner.left, inner.right)
            return node
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _rule_24(q, ctx, path, env):
    # IIF(d, x, y) -> CASE WHEN d THEN x ELSE y END
    def make_fn(core):
        def fn(node):
            if (isinstance(node, FnCall) and node.name == "iif"
                    and len(node.args) == 3 and not node.distinct):
                d, x, y = node.args
                ctx.apply(24, {"d1": d.sql()}, path)
                return Case(((d, x),), y)
            return node
        return fn

    return _expr_rule(q, ctx, path, make_fn)


def _rule_25(q, ctx, path, env):
    # t1 LEFT JOIN t2 ON t1.c1 = t2.c2 WHERE t2.x IS NULL
    #   -> FROM t1 WHERE t1.c1 NOT IN (SELECT c2 FROM t2)
    def per_core(core, order_by):
        f = core.from_
        if (f is None or len(f.joins) != 1 or f.joins[0].kind != "LEFT"
                or core.where is None):
            return None
        if not (isinstance(f.base, NamedTable) and f.base.alias is None
                and isinstance(f.joins[0].source, NamedTable)
                and f.joins[0].source.alias is None):
            return None
        t1 = f.base.name.lower()
        t2 = f.joins[0].source.name.lower()
        if t1 == t2:
            return None
        on = f.joins[0].on
        sides = _eq_sides(on) if on is not None else None
        if sides is None:
            return None
        by_table = {}
        for s in sides:
            if isinstance(s, ColumnRef) and s.table:
                by_table[s.table.lower()] = s
        if set(by_table) != {t1, t2}:
            return None
        c1 = by_table[t1]
        c2 = by_table[t2]
        if not (ctx.schema.has_column(t1, c1.column)
                and ctx.schema.has_column(t2, c2.column)):
            return None
        # NULL keys on either side make NOT IN diverge; fail closed
        if not (ctx.schema.is_non_null(t1, c1.column)
                and ctx.schema.is_non_null(t2, c2.column)):
            return None
        parts = _conjuncts(core.where)
        for i, part in enumerate(parts):
            if not (isinstance(part, Binary) and part.op == "IS"
                    and isinstance(part.right, Literal)
                    and part.right.kind == "null"
                    and isinstance(part.left, ColumnRef)
                    and part.left.table and part.left.table.lower() == t2):
                continue
            x = part.left.column.lower()
            if not ctx.schema.has_column(t2, x):
                continue
            if not ctx.schema.is_non_null(t2, x):
                continue  # matched rows could carry a genuine NULL
            rest = parts[:i] + parts[i + 1:]
            holders = [p.expr for p in core.projections] + rest
            holders += list(core.group_by)
            holders += [core.having]
            holders += [o.expr for o in (order_by or ())]
            uses_t2 = any(
                _count_refs(h, t2) for h in holders if h is not None)
            if uses_t2:
                continue
            ctx.apply(25, {"t1": t1, "c1": c1.column.lower(),
                           "t2": t2, "c2": c2.column.lower(), "x": x}, path)
            sub = QueryAst(body=SelectCore(
                projections=(Projection(ColumnRef(t2, c2.column.lower())),),
                from_=FromClause(NamedTable(t2))))
            cond = Binary("NOT IN", c1, Subquery(sub))
            return dataclasses.replace(
                core, from_=FromClause(f.base),
                where=_rebuild_conj(rest + [cond])), order_by
        return None

    return _map_cores(q, per_core)


def _rule_26(q, ctx, path, env):
    # inline a CTE referenced exactly once as a derived table
    if not q.ctes:
        return None
    for k, cte in enumerate(q.ctes):
        name = cte.name.lower()
        refs = 0
        for x in walk(q):
            if isinstance(x, NamedTable) and x.name.lower() == name:
                refs += 1
        if refs != 1:
            continue
        ctx.apply(26, {"q": name}, path)
        replaced = {"done": False}

        def swap(node):
            if (isinstance(node, NamedTable) and node.name.lower() == name
                    and not replaced["done"]):
                replaced["done"] = True
                return DerivedTable(cte.query, alias=node.alias or name)
            return node

        q2 = transform(q, swap)
        ctes = tuple(c for j, c in enumerate(q2.ctes) if j != k)
        return dataclasses.replace(q2, ctes=ctes)
    return None


_RULES = {
    1: _rule_1, 2: _rule_2, 3: _rule_3, 4: _rule_4, 5: _rule_5, 6: _rule_6,
    7: _rule_7, 8: _rule_8, 9: _rule_9, 10: _rule_10, 11: _rule_11,
    12: _rule_12, 13: _rule_13, 14: _rule_14, 15: _rule_15, 16: _rule_16,
    17: _rule_17, 18: _rule_18, 19: _rule_19, 20: _rule_20, 21: _rule_21,
    22: _rule_22, 23: _rule_23, 24: _rule_24, 25: _rule_25, 26: _rule_26,
}
