"""Step-budgeted interpreter with application/extern coverage split."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .ir import CodeTarget, Program, is_array, element_type

DEFAULT_STEP_BUDGET = 100_000

SUCCESS = "success"
FAILURE = "failure"
FAILURE_KINDS = ("assertion", "extern-fault", "step-budget-exhausted", "type-error")


@dataclass(frozen=True)
class Record:
    type: str
    fields: dict

    def __getitem__(self, name):
        return self.fields[name]

    def __hash__(self):
        return hash((self.type, tuple(sorted(self.fields))))


@dataclass(frozen=True)
class CoverageSet:
    app: frozenset = frozenset()
    extern: frozenset = frozenset()

    def __len__(self) -> int:
        return len(self.app) + len(self.extern)

    def __or__(self, other: "CoverageSet") -> "CoverageSet":
        return CoverageSet(self.app | other.app, self.extern | other.extern)

    def __sub__(self, other: "CoverageSet") -> "CoverageSet":
        return CoverageSet(self.app - other.app, self.extern - other.extern)

    def issubset(self, other: "CoverageSet") -> bool:
        return self.app <= other.app and self.extern <= other.extern


@dataclass(frozen=True)
class TestResult:
    outcome: str
    coverage: CoverageSet
    steps: int
    failure: Optional[str] = None
    message: str = ""
    wall_time: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return self.outcome == SUCCESS

    __test__ = False  # not a pytest class


class ExternFault(Exception):
    """Raised by extern stubs to signal a third-party failure."""


class _Fail(Exception):
    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        self.message = message


class ExternContext:
    """Handed to stubs: per-test scratch state and synthetic coverage."""

    __slots__ = ("state", "_ext", "_name")

    def __init__(self, state: dict, ext: set):
        self.state = state
        self._ext = ext
        self._name = ""

    def cover(self, ident: str) -> None:
        self._ext.add(f"{self._name}:{ident}")


_PRIM_CLASS = {"int": int, "bool": bool, "string": str}


def compile_type_check(program: Program, t: str, _cache: Optional[dict] = None) -> Callable:
    """Return a predicate ``value -> bool`` for declared type ``t``.

    Records must carry exactly their declared fields; ints and bools are
    kept apart (``True`` is not an ``int`` here).
    """
    cache = {} if _cache is None else _cache
    if t in cache:
        return cache[t]
    if t in _PRIM_CLASS:
        cls = _PRIM_CLASS[t]
        check = lambda v: type(v) is cls  # noqa: E731
    elif is_array(t):
        et = element_type(t)
        if et in _PRIM_CLASS:
            cls = _PRIM_CLASS[et]
            check = lambda v: isinstance(v, list) and set(map(type, v)) <= {cls}  # noqa: E731
        else:
            box: list = []
            check = lambda v: isinstance(v, list) and all(box[0](x) for x in v)  # noqa: E731
            cache[t] = check
            box.append(compile_type_check(program, et, cache))
    else:
        decl = program.records.get(t)
        if decl is None:
            check = lambda v: False  # noqa: E731
        else:
            names = frozenset(f for f, _ in decl)
            subs: list = []

            def check(v):
                if type(v) is not Record or v.type != t or v.fields.keys() != names:
                    return False
                fields = v.fields
                for f, c in subs:
                    if not c(fields[f]):
                        return False
                return True

            cache[t] = check
            subs.extend((f, compile_type_check(program, ft, cache)) for f, ft in decl)
    cache[t] = check
    return check


def type_matches(program: Program, value, t: str) -> bool:
    return compile_type_check(program, t)(value)


def shallow_type_matches(program: Program, value, t: str) -> bool:
    """Top-level check used on extern results; nested fields are trusted."""
    if t in ("int", "bool", "string"):
        return type_matches(program, value, t)
    if is_array(t):
        return isinstance(value, list)
    return isinstance(value, Record) and value.type == t


def _binop(kind: str, a, b):
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind in ("div", "mod"):
        if b == 0:
            raise _Fail("assertion", "division by zero")
        q = abs(a) // abs(b) * (1 if (a >= 0) == (b >= 0) else -1)
        return q if kind == "div" else a - q * b
    if kind == "eq":
        return a == b
    if kind == "ne":
        return a != b
    if kind == "lt":
        return a < b
    if kind == "le":
        return a <= b
    if kind == "gt":
        return a > b
    if kind == "ge":
        return a >= b
    if kind == "and":
        return a and b
    if kind == "or":
        return a or b
    if kind == "concat":
        return a + b
    if kind == "startswith":
        return a.startswith(b)
    if kind == "endswith":
        return a.endswith(b)
    if kind == "contains":
        return b in a
    raise _Fail("type-error", f"unknown operator {kind}")


class _Code:
    """Per-function lowered form: label -> index, loop partners."""

    __slots__ = ("fn", "body", "index", "partner", "extern")

    def __init__(self, fn):
        self.fn = fn
        self.body = fn.body
        self.extern = fn.is_extern
        self.index = {ins.label: i for i, ins in enumerate(fn.body)}
        self.partner = {}
        for i, ins in enumerate(fn.body):
            if ins.op in ("loop", "endloop"):
                self.partner[i] = self.index[ins.targets[0]]


class Interpreter:
    """Executes one Program; extern stubs are registered per instance."""

    def __init__(self, program: Program, externs: Optional[dict] = None):
        self.program = program
        self._stubs: dict = {}
        self._code = {name: _Code(fn) for name, fn in program.functions.items()}
        self._input_check = compile_type_check(program, program.input_type)
        for name, stub in (externs or {}).items():
            self.register_extern(name, stub)

    def register_extern(self, name: str, stub: Callable) -> None:
        fn = self.program.functions.get(name)
        if fn is None or not fn.is_extern:
            raise ValueError(f"{name!r} is not an extern function of this program")
        if name in self._stubs:
            raise ValueError(f"extern {name!r} already registered")
        self._stubs[name] = stub

    def run(self, value, step_budget: int = DEFAULT_STEP_BUDGET) -> TestResult:
        start = time.perf_counter()
        app: set = set()
        ext: set = set()
        steps = [0]
        try:
            if not self._input_check(value):
                raise _Fail("type-error", f"input does not match {self.program.input_type}")
            self._execute(value, step_budget, app, ext, steps)
            outcome, kind, msg = SUCCESS, None, ""
        except _Fail as f:
            outcome, kind, msg = FAILURE, f.kind, f.message
        cov = CoverageSet(frozenset(app), frozenset(ext))
        return TestResult(outcome, cov, steps[0], kind, msg, time.perf_counter() - start)

    def _execute(self, value, budget: int, app: set, ext: set, steps: list) -> None:
        program = self.program
        strings = program.string_constants
        ctx = ExternContext({}, ext)
        code = self._code[program.entry]
        env = {code.fn.params[0][0]: value}
        loops: dict = {}
        pc = 0
        stack: list = []  # (code, env, loops, pc, dest)
        n = 0
        while True:
            body = code.body
            if pc >= len(body):
                ret_val = None
                if code.fn.return_type != "void":
                    raise _Fail("type-error", f"{code.fn.name} fell off its end")
                if not stack:
                    steps[0] = n
                    return
                code, env, loops, pc, dest = stack.pop()
                if dest is not None:
                    env[dest] = ret_val
                continue
            n += 1
            if n > budget:
                steps[0] = n - 1
                raise _Fail("step-budget-exhausted", f"exceeded {budget} steps")
            ins = body[pc]
            op = ins.op
            try:
                if op == "const":
                    env[ins.dest] = ins.value
                elif op == "field":
                    env[ins.dest] = env[ins.args[0]].fields[ins.name]
                elif op == "binop":
                    env[ins.dest] = _binop(ins.name, env[ins.args[0]], env[ins.args[1]])
                elif op == "arrayload":
                    arr, i = env[ins.args[0]], env[ins.args[1]]
                    if not 0 <= i < len(arr):
                        raise _Fail("assertion", f"index {i} out of bounds (label {ins.label})")
                    env[ins.dest] = arr[i]
                elif op == "len":
                    env[ins.dest] = len(env[ins.args[0]])
                elif op == "str":
                    env[ins.dest] = strings[ins.value]
                elif op in ("branch", "if"):
                    if op == "branch":
                        cond = env[ins.args[0]]
                    else:
                        cond = _binop(ins.name, env[ins.args[0]], env[ins.args[1]])
                    arm = "then" if cond else "else"
                    if code.extern:
                        ext.add(f"{code.fn.name}:{ins.label}:{arm}")
                    else:
                        app.add(CodeTarget(code.fn.name, ins.label, arm))
                    pc = code.index[ins.targets[0] if cond else ins.targets[1]]
                    continue
                elif op == "jump":
                    pc = code.index[ins.targets[0]]
                    continue
                elif op == "loop":
                    c = loops.get(pc)
                    if c is None:
                        c = loops[pc] = 0
                    if c < env[ins.args[0]]:
                        env[ins.dest] = c
                    else:
                        del loops[pc]
                        pc = code.partner[pc] + 1
                        continue
                elif op == "endloop":
                    head = code.partner[pc]
                    loops[head] += 1
                    pc = head
                    continue
                elif op == "assert":
                    if not env[ins.args[0]]:
                        raise _Fail("assertion", f"assertion failed in {code.fn.name} at label {ins.label}")
                elif op == "return":
                    ret_val = env[ins.args[0]] if ins.args else None
                    if not stack:
                        steps[0] = n
                        return
                    code, env, loops, pc, dest = stack.pop()
                    if dest is not None:
                        env[dest] = ret_val
                    continue
                elif op in ("call", "invoke"):
                    args = [env[a] for a in ins.args]
                    callee = self._code[ins.name]
                    stub = self._stubs.get(ins.name)
                    if stub is not None:
                        ctx._name = ins.name
                        try:
                            result = stub(ctx, *args)
                        except _Fail:
                            raise
                        except Exception as e:  # third-party failure
                            raise _Fail("extern-fault", f"{ins.name}: {type(e).__name__}: {e}")
                        if ins.dest is not None:
                            rt = callee.fn.return_type
                            if not shallow_type_matches(program, result, rt):
                                raise _Fail("type-error", f"extern {ins.name} returned a non-{rt} value")
                            env[ins.dest] = result
                    elif callee.extern and not callee.body:
                        raise _Fail("extern-fault", f"no stub registered for extern {ins.name!r}")
                    else:
                        stack.append((code, env, loops, pc + 1, ins.dest))
                        code = callee
                        env = {p: a for (p, _), a in zip(callee.fn.params, args)}
                        loops = {}
                        pc = 0
                        continue
            except KeyError as e:
                raise _Fail("type-error", f"undefined value {e} in {code.fn.name} at label {ins.label}")
            except TypeError as e:
                raise _Fail("type-error", f"{e} in {code.fn.name} at label {ins.label}")
            pc += 1


def run(program: Program, value, step_budget: int = DEFAULT_STEP_BUDGET, externs: Optional[dict] = None) -> TestResult:
    return Interpreter(program, externs).run(value, step_budget)
