"""Influencing-type analysis over the mini-IR.

Three passes plus a string harvest:

* a def-use dependency graph built by a DFS over the application call graph,
* a backward BFS from every branch operand collecting non-primitive types
  with their hop distance,
* unification of the per-target lists into one type -> distance map,
* application string literals reachable from the entry function.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .ir import (
    CodeTarget,
    Program,
    base_type,
    enumerate_code_targets,
    PRIMITIVES,
    VOID,
)

D_MIN = 0.25
D_MAX = 1024.0


class VarRef(NamedTuple):
    kind: str  # "var" | "farg" | "ret"
    function: str
    key: object = None  # var-id for "var", parameter index for "farg"

    def __str__(self) -> str:
        if self.kind == "var":
            return f"{self.function}.{self.key}"
        if self.kind == "farg":
            return f"farg({self.function},{self.key})"
        return f"ret({self.function})"


def var(fn: str, v: str) -> VarRef:
    return VarRef("var", fn, v)


def farg(fn: str, i: int) -> VarRef:
    return VarRef("farg", fn, i)


def ret(fn: str) -> VarRef:
    return VarRef("ret", fn)


@dataclass
class DepGraph:
    nodes: set = field(default_factory=set)
    edges: set = field(default_factory=set)  # (use, def)
    succ: dict = field(default_factory=dict)  # use -> [def, ...] in insertion order
    analyzed: list = field(default_factory=list)  # functions whose bodies were walked

    def add_edge(self, use: VarRef, d: VarRef) -> None:
        self.nodes.add(use)
        self.nodes.add(d)
        if (use, d) not in self.edges:
            self.edges.add((use, d))
            self.succ.setdefault(use, []).append(d)


class InfluencingType(NamedTuple):
    type: str
    distance: int


class UnifiedDistanceMap:
    """Mutable type -> distance table with clamping and access counters.

    The counters exist so callers can prove a mode never consults the map.
    """

    def __init__(self, items=None, d_min: float = D_MIN, d_max: float = D_MAX):
        self.d_min = d_min
        self.d_max = d_max
        self._d: dict = {}
        self.reads = 0
        self.writes = 0
        for t, d in dict(items or {}).items():
            self._d[t] = self.clamp(float(d))

    def clamp(self, d: float) -> float:
        return min(self.d_max, max(self.d_min, d))

    def __getitem__(self, t: str) -> float:
        self.reads += 1
        return self._d[t]

    def __setitem__(self, t: str, d: float) -> None:
        self.writes += 1
        self._d[t] = self.clamp(d)

    def __contains__(self, t: str) -> bool:
        return t in self._d

    def __len__(self) -> int:
        return len(self._d)

    def items(self) -> list:
        self.reads += 1
        return list(self._d.items())

    def snapshot(self) -> dict:
        """Plain dict copy; does not count as a read."""
        return dict(self._d)

    def copy(self) -> "UnifiedDistanceMap":
        out = UnifiedDistanceMap(d_min=self.d_min, d_max=self.d_max)
        out._d = dict(self._d)
        out.reads, out.writes = self.reads, self.writes
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, UnifiedDistanceMap):
            return self._d == other._d
        if isinstance(other, dict):
            return self._d == other
        return NotImplemented

    def __repr__(self) -> str:
        return f"UnifiedDistanceMap({self._d!r})"


def is_influencing(t: str) -> bool:
    """Records and arrays of records qualify; primitives and strings do not."""
    return t != VOID and base_type(t) not in PRIMITIVES


def node_type(program: Program, n: VarRef) -> Optional[str]:
    fn = program.functions.get(n.function)
    if fn is None:
        return None
    if n.kind == "var":
        return fn.var_types.get(n.key)
    if n.kind == "farg":
        return fn.params[n.key][1] if n.key < len(fn.params) else None
    return fn.return_type


def build_dependency_graph(program: Program) -> DepGraph:
    g = DepGraph()
    visited: set = set()

    def visit(name: str) -> None:
        visited.add(name)
        fn = program.functions[name]
        g.analyzed.append(name)
        for i, (p, _) in enumerate(fn.params):
            g.add_edge(var(name, p), farg(name, i))
        for ins in fn.body:
            here = [var(name, a) for a in ins.args]
            if ins.dest is not None:
                d = var(name, ins.dest)
                g.nodes.add(d)
                if ins.op != "loop":  # loop counters carry no data dependency
                    for u in here:
                        g.add_edge(d, u)
            if ins.op == "return" and ins.args:
                g.add_edge(ret(name), here[0])
            if ins.op not in ("call", "invoke"):
                continue
            if ins.op == "invoke":
                for a in here[1:]:
                    g.add_edge(a, here[0])
            callee = program.functions[ins.name]
            if callee.is_extern:
                continue
            for i, a in enumerate(here):
                g.add_edge(farg(callee.name, i), a)
            if ins.dest is not None:
                g.add_edge(var(name, ins.dest), ret(callee.name))
            if callee.name not in visited:
                visit(callee.name)

    visit(program.entry)
    return g


def _branch_instr(program: Program, target: CodeTarget):
    fn = program.functions[target.function]
    for ins in fn.body:
        if ins.label == target.branch_label:
            return ins
    raise KeyError(target)


def collect_influencing_types(g: DepGraph, program: Program, target: CodeTarget) -> list:
    ins = _branch_instr(program, target)
    dist: dict = {}
    queue: deque = deque()
    for a in ins.args:
        n = var(target.function, a)
        if n not in dist:
            dist[n] = 1
            queue.append(n)
    while queue:
        n = queue.popleft()
        for m in g.succ.get(n, ()):
            if m not in dist:
                dist[m] = dist[n] + 1
                queue.append(m)
    best: dict = {}
    for n, d in dist.items():
        t = node_type(program, n)
        if t is None or not is_influencing(t):
            continue
        if t not in best or d < best[t]:
            best[t] = d
    return [InfluencingType(t, d) for t, d in sorted(best.items(), key=lambda kv: (kv[1], kv[0]))]


def unify_types(gamma: dict, d_min: float = D_MIN, d_max: float = D_MAX) -> UnifiedDistanceMap:
    """Merge per-target lists, preferring the target with most influencing types."""
    chosen: dict = {}  # type -> (target size, distance)
    for types in gamma.values():
        size = len(types)
        for t, d in types:
            prev = chosen.get(t)
            if prev is None or size > prev[0] or (size == prev[0] and d < prev[1]):
                chosen[t] = (size, d)
    ordered = sorted(chosen.items(), key=lambda kv: (kv[1][1], kv[0]))
    return UnifiedDistanceMap({t: float(d) for t, (_, d) in ordered}, d_min, d_max)


def collect_constant_strings(program: Program) -> list:
    table: list = []
    seen: set = set()
    visited: set = set()

    def visit(name: str) -> None:
        visited.add(name)
        for ins in program.functions[name].body:
            if ins.op == "str":
                s = program.string_constants[ins.value]
                if s not in seen:
                    seen.add(s)
                    table.append(s)
            elif ins.op in ("call", "invoke"):
                callee = program.functions[ins.name]
                if not callee.is_extern and callee.name not in visited:
                    visit(callee.name)

    visit(program.entry)
    return table


@dataclass
class Analysis:
    gamma: dict  # CodeTarget -> [InfluencingType], ascending distance
    distances: UnifiedDistanceMap
    strings: list
    uncovered: frozenset
    graph: DepGraph

    @property
    def targets(self) -> frozenset:
        return frozenset(self.gamma)


def analyze(program: Program, d_min: float = D_MIN, d_max: float = D_MAX) -> Analysis:
    g = build_dependency_graph(program)
    targets = sorted(enumerate_code_targets(program), key=_target_key)
    gamma = {k: collect_influencing_types(g, program, k) for k in targets}
    return Analysis(
        gamma=gamma,
        distances=unify_types(gamma, d_min, d_max),
        strings=collect_constant_strings(program),
        uncovered=frozenset(gamma),
        graph=g,
    )


def _target_key(k: CodeTarget):
    return (k.function, k.branch_label, k.arm != "then")


def analysis_report(a: Analysis) -> dict:
    """JSON-ready view: target -> [(type, distance)], distances, strings."""
    return {
        "targets": {
            str(k): [[t, d] for t, d in a.gamma[k]]
            for k in sorted(a.gamma, key=_target_key)
        },
        "distances": a.distances.snapshot(),
        "strings": list(a.strings),
    }


def format_report(a: Analysis) -> str:
    import json

    rep = analysis_report(a)
    lines = ["targets:"]
    for k, types in rep["targets"].items():
        shown = " ".join(f"({t}, {d})" for t, d in types) or "-"
        lines.append(f"  {k}: {shown}")
    lines.append("distances:")
    for t, d in rep["distances"].items():
        lines.append(f"  {t}: {d}")
    lines.append("strings: " + json.dumps(rep["strings"]))
    return "\n".join(lines) + "\n"
