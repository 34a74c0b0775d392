"""Preprocessing normalization: put a parsed query into canonical base form.

The nine preprocessing steps (ids 0..8) are applied innermost-subquery-first:

  P0  case-fold identifiers
  P1  qualify bare column references against the tables in scope
  P2  sort projection lists into canonical order
  P3  resolve table aliases to real table names
  P4  canonical order for inner-join operands, join conditions merged
  P5  canonical operand order for commutative/mirrorable operators
  P6  resolve and drop projection aliases (and ordinal ORDER/GROUP refs)
  P7  drop parenthesis nodes (grouping is already tree shape)
  P8  resolve quoting: quoted names that resolve become identifiers, a bare
      quoted name that resolves to nothing becomes a string literal

Alias scoping is lexical: an alias defined in a subquery is invisible
outside of it. Two classes of aliases survive as binding occurrences, under
canonical positional names: derived-table aliases (_s0, _s1, ...) and the
aliases of a table joined to itself (_t0, _t1, ...). Computed projections
inside a derived table or CTE keep a canonical binding name (_c0, _c1, ...)
so that outer references stay valid and the tree stays executable.

Projection order canonicalization (P2) is not applied to the operands of a
compound set operation: there, column position pairs up with the other
operand and is semantically significant.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .ast_nodes import (Binary, ColumnRef, Compound, Cte, DerivedTable,
                        FromClause, JoinItem, Literal, NamedTable, OrderItem,
                        Paren, Projection, QueryAst, SelectCore, Star,
                        Subquery, build_chain, flatten_chain, transform)
from .errors import ResolutionError
from .schema import Schema

P_ALL = frozenset(range(9))

_COMMUTATIVE_SET_OPS = ("UNION", "UNION ALL", "INTERSECT")
_MIRROR = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}


@dataclass(frozen=True)
class NormalizedAst:
    tree: QueryAst
    provenance: tuple  # ids of preprocessing steps that changed the tree


def normalize(ast: QueryAst, schema: Schema, p_rules=None) -> NormalizedAst:
    """Apply the enabled preprocessing steps (default: all)."""
    enabled = P_ALL if p_rules is None else frozenset(p_rules)
    n = _Normalizer(schema, enabled)
    tree = n.fold_case(ast) if 0 in enabled else ast
    tree, _ = n.norm_query(tree, ctes={}, parent=None, as_relation=False)
    return NormalizedAst(tree, tuple(sorted(n.touched)))


class _Outputs:
    """Output columns of a relation: ordered canonical names plus the map
    from exposed (pre-normalization) names to canonical ones."""

    def __init__(self, ordered: list, renames: dict):
        self.ordered = ordered
        self.renames = renames


class _Source:
    """One relation visible in a scope."""

    def __init__(self, kind, visible, real, columns, renames, content_key):
        self.kind = kind              # 'table' | 'derived' | 'cte'
        self.visible = visible        # name the query uses for it (lower), or None
        self.real = real              # real table name for kind 'table'
        self.columns = columns        # canonical output column names, in order
        self.renames = renames        # exposed name -> canonical name
        self.content_key = content_key
        self.final = visible          # canonical qualifier, assigned later
        self.orig_alias = None
        self.node = None
        self._lookup = {c.lower() for c in columns} | set(renames)

    def has_column(self, name: str) -> bool:
        return name.lower() in self._lookup

    def canonical(self, name: str) -> str:
        return self.renames.get(name.lower(), name.lower())


class _Scope:
    def __init__(self, sources, parent):
        self.sources = sources
        self.parent = parent

    def by_visible(self, name: str):
        name = name.lower()
        for s in self.sources:
            if name in (s.visible, s.final):
                return s
        if self.parent is not None:
            return self.parent.by_visible(name)
        return None

    def candidates(self, column: str):
        return [s for s in self.sources if s.has_column(column)]


class _Normalizer:
    def __init__(self, schema: Schema, enabled: frozenset):
        self.schema = schema
        self.enabled = enabled
        self.touched: set[str] = set()

    def on(self, pid: int) -> bool:
        return pid in self.enabled

    def mark(self, pid: int):
        self.touched.add(f"P{pid}")

    # --- P0 ---

    def fold_case(self, tree: QueryAst) -> QueryAst:
        def fn(node):
            if isinstance(node, ColumnRef):
                return dataclasses.replace(
                    node,
                    table=(node.table if node.table is None or node.table_quoted
                           else node.table.lower()),
                    column=(node.column if node.column_quoted
                            else node.column.lower()))
            if isinstance(node, NamedTable):
                return dataclasses.replace(
                    node,
                    name=(node.name if node.quoted else node.name.lower()),
                    alias=(node.alias.lower() if node.alias else None))
            if isinstance(node, DerivedTable) and node.alias:
                return dataclasses.replace(node, alias=node.alias.lower())
            if isinstance(node, Projection) and node.alias:
                return dataclasses.replace(node, alias=node.alias.lower())
            if isinstance(node, Star) and node.table:
                return dataclasses.replace(node, table=node.table.lower())
            if isinstance(node, Cte):
                return dataclasses.replace(node, name=node.name.lower())
            return node

        folded = transform(tree, fn)
        if folded != tree:
            self.mark(0)
        return folded

    # --- queries ---

    def norm_query(self, q: QueryAst, ctes: dict, parent, as_relation: bool):
        """Returns (normalized QueryAst, _Outputs)."""
        cte_env = dict(ctes)
        new_ctes = []
        for cte in q.ctes:
            sub, outs = self.norm_query(cte.query, cte_env, None, as_relation=True)
            cte_env[cte.name.lower()] = (sub, outs)
            new_ctes.append(Cte(cte.name.lower(), sub))

        if isinstance(q.body, SelectCore):
            body, order_by, outputs = self.norm_core(
                q.body, q.order_by, cte_env, parent, as_relation,
                in_compound=False)
        else:
            body, outputs = self.norm_set(q.body, cte_env, parent, as_relation)
            order_by = self.norm_compound_order(q.order_by, outputs)

        return QueryAst(body=body, order_by=order_by, limit=q.limit,
                        ctes=tuple(new_ctes)), outputs

    def norm_set(self, body, cte_env, parent, as_relation):
        if isinstance(body, SelectCore):
            core, _, outputs = self.norm_core(
                body, (), cte_env, parent, as_relation, in_compound=True)
            return core, outputs
        left, outputs = self.norm_set(body.left, cte_env, parent, as_relation)
        right, _ = self.norm_set(body.right, cte_env, parent, as_relation)
        node = Compound(body.op, left, right)
        if self.on(5) and node.op in _COMMUTATIVE_SET_OPS:
            node = self.sort_set_children(node)
        return node, outputs

    def sort_set_children(self, node: Compound) -> Compound:
        parts = self._flatten_set(node, node.op)
        ordered = sorted(parts, key=lambda p: p.sql())
        if ordered != parts:
            self.mark(5)
        out = ordered[0]
        for p in ordered[1:]:
            out = Compound(node.op, out, p)
        return out

    def _flatten_set(self, node, op):
        if isinstance(node, Compound) and node.op == op:
            return self._flatten_set(node.left, op) + self._flatten_set(node.right, op)
        return [node]

    def norm_compound_order(self, order_by, outputs: _Outputs):
        # Compound-level ORDER BY addresses output columns; resolve ordinals.
        items = []
        for item in order_by:
            expr = item.expr
            if (self.on(6) and isinstance(expr, Literal) and expr.kind == "number"
                    and isinstance(expr.value, int)
                    and 1 <= expr.value <= len(outputs.ordered)):
                expr = ColumnRef(None, outputs.ordered[expr.value - 1])
                self.mark(6)
            items.append(OrderItem(expr, item.direction))
        return tuple(items)

    # --- select cores ---

    def norm_core(self, core: SelectCore, order_by, cte_env, parent,
                  as_relation, in_compound):
        sources, join_kinds, ons = self.build_sources(core.from_, cte_env)
        self.assign_final_names(sources)
        scope = _Scope(sources, parent)

        resolve = lambda e: self.resolve_expr(e, scope, cte_env)
        projections = tuple(
            Projection(resolve(p.expr), p.alias) for p in core.projections)

        order_by = self.substitute_output_refs(order_by, projections, scope, True)
        group_by = self.substitute_output_refs(core.group_by, projections, scope, False)
        having = core.having
        if having is not None:
            having = self.substitute_output_refs((having,), projections, scope, False)[0]

        where = resolve(core.where) if core.where is not None else None
        group_by = tuple(resolve(e) for e in group_by)
        having = resolve(having) if having is not None else None
        ons = [resolve(e) if e is not None else None for e in ons]
        order_by = tuple(OrderItem(resolve(o.expr), o.direction) for o in order_by)

        from_ = self.rebuild_from(sources, join_kinds, ons)

        if self.on(5):
            sort5 = self.order_commutative
            where = sort5(where) if where is not None else None
            having = sort5(having) if having is not None else None
            projections = tuple(Projection(sort5(p.expr), p.alias) for p in projections)
            group_by = tuple(sort5(e) for e in group_by)
            order_by = tuple(OrderItem(sort5(o.expr), o.direction) for o in order_by)
            from_ = self.sort_from_on(from_)

        if self.on(2) and not in_compound:
            ordered = tuple(sorted(projections, key=lambda p: p.expr.sql()))
            if ordered != projections:
                self.mark(2)
            projections = ordered

        projections, outputs = self.finish_projections(projections, scope, as_relation)

        new_core = SelectCore(projections=projections, distinct=core.distinct,
                              from_=from_, where=where, group_by=group_by,
                              having=having)
        return new_core, order_by, outputs

    # --- FROM handling ---

    def build_sources(self, from_: FromClause | None, cte_env):
        if from_ is None:
            return [], [], []
        raw = [(None, from_.base, None)] + [(j.kind, j.source, j.on) for j in from_.joins]
        sources = []
        join_kinds = []
        ons = []
        for kind, src, on in raw:
            if isinstance(src, NamedTable):
                lname = src.name.lower()
                visible = (src.alias or lname).lower()
                if lname in cte_env:
                    _, outs = cte_env[lname]
                    entry = _Source("cte", visible, None, outs.ordered,
                                    outs.renames, lname)
                    entry.node = NamedTable(lname, None)
                elif self.schema.has_table(lname):
                    cols = [c.lower() for c in self.schema.all_columns(lname)]
                    entry = _Source("table", visible, lname, cols, {}, lname)
                    entry.node = NamedTable(lname, None,
                                            quoted=(src.quoted and not self.on(8)))
                    if src.quoted and self.on(8):
                        self.mark(8)
                else:
                    raise ResolutionError(f"unknown table {src.name!r}")
                entry.orig_alias = src.alias
            else:
                sub, outs = self.norm_query(src.query, cte_env, None, as_relation=True)
                visible = src.alias.lower() if src.alias else None
                entry = _Source("derived", visible, None, outs.ordered,
                                outs.renames, sub.sql())
                entry.node = DerivedTable(sub, None)
                entry.orig_alias = src.alias
            sources.append(entry)
            if kind is not None:
                join_kinds.append(kind)
                ons.append(on)
        return sources, join_kinds, ons

    def assign_final_names(self, sources):
        """Pick the canonical qualifier for every source and set its alias.

        With P3 enabled: single-occurrence tables and CTEs resolve to their
        real name with no alias; self-joined tables get _t0, _t1, ...;
        derived tables get _s0, _s1, ... ranked by their serialized content.
        """
        if not self.on(3):
            for i, s in enumerate(sources):
                if s.visible is None:             # unaliased derived table
                    s.final = s.visible = f"_s{i}"
                    s.node = dataclasses.replace(s.node, alias=s.final)
                else:
                    s.final = s.visible
                    if s.orig_alias:
                        s.node = dataclasses.replace(s.node,
                                                     alias=s.orig_alias.lower())
            return

        groups: dict[str, list] = {}
        for s in sources:
            if s.kind in ("table", "cte"):
                groups.setdefault(s.content_key, []).append(s)
        derived_ranked = sorted(
            (s for s in sources if s.kind == "derived"),
            key=lambda s: (s.content_key, sources.index(s)))
        for s in sources:
            if s.kind == "derived":
                s.final = f"_s{derived_ranked.index(s)}"
                if s.visible is not None and s.visible != s.final:
                    self.mark(3)
                s.node = dataclasses.replace(s.node, alias=s.final)
            else:
                group = groups[s.content_key]
                if len(group) > 1:
                    s.final = f"_t{group.index(s)}"
                    s.node = dataclasses.replace(s.node, alias=s.final)
                    self.mark(3)
                else:
                    if s.orig_alias:
                        self.mark(3)
                    s.final = s.content_key
            if s.visible is None:
                s.visible = s.final

    def rebuild_from(self, sources, join_kinds, ons):
        if not sources:
            return None
        conds = [o for o in ons if o is not None]
        unsided = all(k == "INNER" for k in join_kinds)
        if self.on(4) and len(sources) > 1 and unsided:
            ranked = sorted(
                enumerate(sources),
                key=lambda pair: (pair[1].content_key, pair[0]))
            ordered = [s for _, s in ranked]
            if ordered != sources:
                self.mark(4)
            merged = None
            if conds:
                parts = []
                for c in conds:
                    parts.extend(flatten_chain(c, "AND"))
                merged = build_chain(parts, "AND")
                if len(conds) > 1:
                    self.mark(4)
            joins = []
            last = len(ordered) - 1
            for i, s in enumerate(ordered[1:], start=1):
                joins.append(JoinItem("INNER", s.node,
                                      merged if i == last else None))
            return FromClause(ordered[0].node, tuple(joins))
        joins = tuple(JoinItem(k, s.node, on)
                      for k, s, on in zip(join_kinds, sources[1:], ons))
        return FromClause(sources[0].node, joins)

    def sort_from_on(self, from_: FromClause | None):
        if from_ is None:
            return None
        joins = tuple(
            dataclasses.replace(j, on=self.order_commutative(j.on))
            if j.on is not None else j
            for j in from_.joins)
        return dataclasses.replace(from_, joins=joins)

    # --- expression resolution ---

    def resolve_expr(self, expr, scope, cte_env):
        def fn(node):
            if isinstance(node, ColumnRef):
                return self.resolve_colref(node, scope)
            if isinstance(node, Star):
                return self.resolve_star(node, scope)
            if isinstance(node, Subquery):
                sub, _ = self.norm_query(node.query, cte_env, scope,
                                         as_relation=False)
                return Subquery(sub)
            if isinstance(node, Paren) and self.on(7):
                self.mark(7)
                return node.operand
            return node

        descend = lambda n: not isinstance(n, (Subquery, DerivedTable, QueryAst))
        return transform(expr, fn, descend)

    def resolve_colref(self, ref: ColumnRef, scope: _Scope):
        quoted = ref.table_quoted or ref.column_quoted
        if ref.table is not None:
            src = scope.by_visible(ref.table)
            if src is None:
                raise ResolutionError(f"unknown table or alias {ref.table!r}")
            if not src.has_column(ref.column):
                raise ResolutionError(
                    f"column {ref.column!r} not found in {ref.table!r}")
            column = src.canonical(ref.column)
            table = src.final if self.on(3) else ref.table.lower()
            if table != ref.table:
                self.mark(3)
            if quoted:
                if self.on(8):
                    self.mark(8)
                else:
                    return dataclasses.replace(ref, table=table, column=column)
            return ColumnRef(table, column)

        # bare column
        cands = scope.candidates(ref.column)
        outer = scope.parent
        while not cands and outer is not None:
            cands = outer.candidates(ref.column)
            outer = outer.parent
        if len(cands) > 1:
            raise ResolutionError(f"ambiguous column {ref.column!r}")
        if not cands:
            if ref.column_quoted and self.on(8):
                # a quoted name that resolves to nothing is a string literal
                self.mark(8)
                return Literal("string", ref.column, ref.column)
            raise ResolutionError(f"unresolvable column {ref.column!r}")
        src = cands[0]
        column = src.canonical(ref.column)
        if quoted and self.on(8):
            self.mark(8)
            quoted = False
        if not self.on(1):
            return dataclasses.replace(ref, column=column,
                                       column_quoted=quoted)
        self.mark(1)
        return ColumnRef(src.final, column)

    def resolve_star(self, star: Star, scope: _Scope):
        if star.table is None:
            return star
        src = scope.by_visible(star.table)
        if src is None:
            raise ResolutionError(f"unknown table or alias {star.table!r}")
        if src.final != star.table:
            self.mark(3)
        return Star(src.final)

    # --- projection aliases, ordinals, outputs ---

    def substitute_output_refs(self, exprs, projections, scope, is_order: bool):
        if not exprs or not self.on(6):
            return tuple(exprs)
        alias_map = {p.alias.lower(): p.expr for p in projections if p.alias}
        out = []
        for item in exprs:
            expr = item.expr if is_order else item
            if (isinstance(expr, Literal) and expr.kind == "number"
                    and isinstance(expr.value, int)
                    and 1 <= expr.value <= len(projections)):
                expr = projections[expr.value - 1].expr
                self.mark(6)
            elif (isinstance(expr, ColumnRef) and expr.table is None
                  and expr.column.lower() in alias_map
                  and not scope.candidates(expr.column)):
                expr = alias_map[expr.column.lower()]
                self.mark(6)
            out.append(OrderItem(expr, item.direction) if is_order else expr)
        return tuple(out)

    def finish_projections(self, projections, scope, as_relation):
        ordered: list[str] = []
        renames: dict[str, str] = {}
        finals = []
        expr_idx = 0

        def note_rename(exposed, canonical):
            if exposed and exposed.lower() != canonical:
                renames[exposed.lower()] = canonical

        for p in projections:
            expr = p.expr
            drop = self.on(6)
            if isinstance(expr, Star):
                if expr.table is None:
                    for s in scope.sources:
                        ordered.extend(s.columns)
                else:
                    src = scope.by_visible(expr.table)
                    if src is not None:
                        ordered.extend(src.columns)
                if p.alias and drop:
                    self.mark(6)
                finals.append(Projection(expr, None if drop else p.alias))
            elif isinstance(expr, ColumnRef):
                ordered.append(expr.column)
                note_rename(p.alias, expr.column)
                if p.alias and drop:
                    self.mark(6)
                finals.append(Projection(expr, None if drop else p.alias))
            elif as_relation:
                # computed projection inside a relation keeps a canonical
                # binding name so outer references stay valid and executable
                name = f"_c{expr_idx}"
                expr_idx += 1
                ordered.append(name)
                note_rename(p.alias, name)
                if p.alias != name:
                    self.mark(6)
                finals.append(Projection(expr, name))
            else:
                ordered.append((p.alias or expr.sql()).lower())
                if p.alias and drop:
                    self.mark(6)
                finals.append(Projection(expr, None if drop else p.alias))
        return tuple(finals), _Outputs(ordered, renames)

    # --- P5 commutative ordering ---

    def order_commutative(self, expr):
        def fn(node):
            if isinstance(node, Binary):
                if node.op in ("AND", "OR"):
                    parts = flatten_chain(node, node.op)
                    ordered = sorted(parts, key=lambda e: e.sql())
                    if ordered != parts:
                        self.mark(5)
                    return build_chain(ordered, node.op)
                if node.op in ("=", "!="):
                    if node.left.sql() > node.right.sql():
                        self.mark(5)
                        return Binary(node.op, node.right, node.left)
                if node.op in _MIRROR:
                    if node.left.sql() > node.right.sql():
                        self.mark(5)
                        return Binary(_MIRROR[node.op], node.right, node.left)
            return node

        descend = lambda n: not isinstance(n, (Subquery, DerivedTable, QueryAst))
        return transform(expr, fn, descend)


def relation_outputs(q: QueryAst, schema: Schema, cte_env=None) -> list[str]:
    """Output column names of a normalized relation query (stars expanded).

    cte_env maps CTE names defined in enclosing scopes to their queries.
    """
    env = dict(cte_env) if cte_env else {}
    for c in q.ctes:
        env[c.name.lower()] = c.query
    body = q.body
    while isinstance(body, Compound):
        body = body.left

    def source_columns(src):
        if isinstance(src, NamedTable):
            name = src.name.lower()
            if name in env:
                return relation_outputs(env[name], schema,
                                        {k: v for k, v in env.items() if k != name})
            if schema.has_table(name):
                return [c.lower() for c in schema.all_columns(name)]
            return []
        return relation_outputs(src.query, schema, env)

    sources = []
    if body.from_ is not None:
        sources.append(body.from_.base)
        sources.extend(j.source for j in body.from_.joins)

    def visible_of(src):
        if isinstance(src, NamedTable):
            return (src.alias or src.name).lower()
        return (src.alias or "").lower()

    out: list[str] = []
    for p in body.projections:
        expr = p.expr
        if isinstance(expr, Star):
            for src in sources:
                if expr.table is None or visible_of(src) == expr.table.lower():
                    out.extend(source_columns(src))
        elif p.alias:
            out.append(p.alias.lower())
        elif isinstance(expr, ColumnRef):
            out.append(expr.column.lower())
        else:
            out.append(expr.sql().lower())
    return out
