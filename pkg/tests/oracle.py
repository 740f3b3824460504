"""Brute-force reference for influencing types, written without the analysis module.

Edges are re-derived from the instruction list, then every node's distance
from the branch operands is found by repeated relaxation to a fixpoint
instead of a BFS queue.
"""

from __future__ import annotations

from typegbf.ir import Program

EXCLUDED = {"int", "bool", "string"}


def _strip(t: str) -> str:
    while t.endswith("[]"):
        t = t[:-2]
    return t


def reachable_app_functions(p: Program) -> list:
    seen, order, todo = set(), [], [p.entry]
    while todo:
        f = todo.pop()
        if f in seen or p.functions[f].origin == "extern":
            continue
        seen.add(f)
        order.append(f)
        for ins in p.functions[f].body:
            if ins.op in ("call", "invoke"):
                todo.append(ins.name)
    return order


def oracle_edges(p: Program) -> set:
    edges = set()
    for f in reachable_app_functions(p):
        fn = p.functions[f]
        for i, (v, _) in enumerate(fn.params):
            edges.add((("var", f, v), ("farg", f, i)))
        for ins in fn.body:
            uses = [("var", f, a) for a in ins.args]
            if ins.dest is not None and ins.op != "loop":
                for u in uses:
                    edges.add((("var", f, ins.dest), u))
            if ins.op == "return" and uses:
                edges.add((("ret", f, None), uses[0]))
            if ins.op == "invoke":
                for u in uses[1:]:
                    edges.add((u, uses[0]))
            if ins.op in ("call", "invoke") and p.functions[ins.name].origin != "extern":
                for i, u in enumerate(uses):
                    edges.add((("farg", ins.name, i), u))
                if ins.dest is not None:
                    edges.add((("var", f, ins.dest), ("ret", ins.name, None)))
    return edges


def node_type(p: Program, n) -> str:
    kind, f, key = n
    fn = p.functions[f]
    if kind == "farg":
        return fn.params[key][1]
    if kind == "ret":
        return fn.return_type
    for v, t in fn.params:
        if v == key:
            return t
    for ins in fn.body:
        if ins.dest == key:
            return fn.var_types[key]
    raise KeyError(n)


def oracle_influencing(p: Program, function: str, label: int) -> dict:
    """type -> minimum hop distance for the branch at ``function:label``."""
    ins = next(i for i in p.functions[function].body if i.label == label)
    edges = oracle_edges(p)
    inf = float("inf")
    dist = {}
    for a in ins.args:
        dist[("var", function, a)] = 1
    changed = True
    while changed:
        changed = False
        for u, d in edges:
            du = dist.get(u, inf)
            if du + 1 < dist.get(d, inf):
                dist[d] = du + 1
                changed = True
    out = {}
    for n, d in dist.items():
        t = node_type(p, n)
        if t == "void" or _strip(t) in EXCLUDED:
            continue
        out[t] = min(d, out.get(t, inf))
    return out
