"""Typed SSA mini-IR: data model, text parser and pretty-printer.

Grammar (one construct per line, ``#`` starts a comment)::

    entry <name>
    record <Name> { field: Type, ... }
    fn [extern] <name>(v1: Type, ...) -> Type {      # extern without body: no '{'
        [N:] v3 = const 5 | const true | const false
        [N:] v4 = str "literal"
        [N:] v5 = field v1.name
        [N:] v6 = arrayload v2[v3]
        [N:] v7 = len v2
        [N:] v8 = <binop> v3 v4
        [N:] [v9 =] call|invoke <fn> v1 v2 ...
        [N:] return [v9]
        [N:] branch v8 then L else L
        [N:] if <cmp> v3 v4 then L else L
        [N:] jump L
        [N:] assert v8
        [N:] loop v10 < v7 {
        [N:] }
        @name:
    }

Types are ``int``, ``bool``, ``string``, a record name, or ``T[]``; ``void``
is allowed as a return type only.  ``L`` is an integer label or ``@name``.
Unlabelled instructions take the previous label plus one; labels must be
strictly increasing inside a function.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

PRIMITIVES = ("int", "bool", "string")
VOID = "void"

ARITH = {"add", "sub", "mul", "div", "mod"}
COMPARE = {"eq", "ne", "lt", "le", "gt", "ge"}
LOGIC = {"and", "or"}
STRING_OPS = {"concat", "startswith", "endswith", "contains"}
BINOPS = ARITH | COMPARE | LOGIC | STRING_OPS

APPLICATION = "application"
EXTERN = "extern"


class IRError(Exception):
    """Base class for IR diagnostics; carries a source position when known."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class IRSyntaxError(IRError):
    pass


class SSAError(IRError):
    pass


class UnresolvedCallError(IRError):
    pass


class UndeclaredTypeError(IRError):
    pass


class IRTypeError(IRError):
    pass


def is_array(t: str) -> bool:
    return t.endswith("[]")


def element_type(t: str) -> str:
    return t[:-2]


def base_type(t: str) -> str:
    while is_array(t):
        t = element_type(t)
    return t


@dataclass(frozen=True)
class Instr:
    label: int
    op: str
    dest: Optional[str] = None
    args: tuple = ()
    name: Optional[str] = None
    value: object = None
    targets: tuple = ()


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple  # ((var, type), ...)
    return_type: str
    body: tuple = ()
    origin: str = APPLICATION
    var_types: dict = field(default_factory=dict, compare=False, repr=False)
    positions: dict = field(default_factory=dict, compare=False, repr=False)  # label -> (line, col); 0 = header

    @property
    def is_extern(self) -> bool:
        return self.origin == EXTERN

    def branches(self) -> Iterator[Instr]:
        return (i for i in self.body if i.op in ("branch", "if"))


@dataclass(frozen=True)
class CodeTarget:
    function: str
    branch_label: int
    arm: str  # "then" | "else"

    def __str__(self) -> str:
        return f"{self.function}:{self.branch_label}:{self.arm}"


@dataclass(frozen=True)
class Program:
    records: dict  # name -> ((field, type), ...), declaration order
    functions: dict  # name -> Function, declaration order
    entry: str
    string_constants: tuple = ()

    @property
    def entry_function(self) -> Function:
        return self.functions[self.entry]

    @property
    def input_type(self) -> str:
        return self.entry_function.params[0][1]

    def kind_of(self, t: str) -> str:
        if t in PRIMITIVES:
            return "primitive-" + t
        if is_array(t):
            return "array"
        if t in self.records:
            return "record"
        raise UndeclaredTypeError(f"undeclared type {t!r}")

    def field_type(self, record: str, name: str) -> Optional[str]:
        for f, t in self.records.get(record, ()):
            if f == name:
                return t
        return None


def branch_operands(instr: Instr) -> tuple:
    """Variables read by the condition of a ``branch``/``if`` instruction."""
    return instr.args


def enumerate_code_targets(program: Program) -> frozenset:
    targets = set()
    for fn in program.functions.values():
        if fn.is_extern:
            continue
        for br in fn.branches():
            targets.add(CodeTarget(fn.name, br.label, "then"))
            targets.add(CodeTarget(fn.name, br.label, "else"))
    return frozenset(targets)


# --------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<arrow>->)
      | (?P<num>-?\d+)
      | (?P<mark>@[A-Za-z_][\w.]*)
      | (?P<ident>[A-Za-z_][\w]*(?:\[\])*)
      | (?P<punct>[{}()\[\],:.<=])
    )""",
    re.VERBOSE,
)
_RESERVED = {"then", "else", "true", "false"}


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list:
    toks, pos = [], 0
    code = _strip_comment(line)
    while pos < len(code):
        if code[pos:].strip() == "":
            break
        m = _TOKEN.match(code, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(code[pos:]) - len(code[pos:].lstrip()))
            raise IRSyntaxError(f"unexpected character {code[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        text = m.group(kind)
        toks.append(_Tok(kind, text, m.start(kind) + 1))
        pos = m.end()
    return toks


def _strip_comment(line: str) -> str:
    in_str = esc = False
    for i, ch in enumerate(line):
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "#":
            return line[:i]
    return line


class _Line:
    """Cursor over the tokens of one source line."""

    def __init__(self, toks: list, lineno: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno

    def peek(self, k: int = 0) -> Optional[_Tok]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def error(self, msg: str, tok: Optional[_Tok] = None) -> IRSyntaxError:
        tok = tok or self.peek()
        col = tok.col if tok else (self.toks[-1].col + len(self.toks[-1].text) if self.toks else 1)
        return IRSyntaxError(msg, self.lineno, col)

    def next(self, what: str = "token") -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of line")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next(repr(text))
        if tok.text != text:
            raise self.error(f"expected {text!r}, found {tok.text!r}", tok)
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return True
        return False

    def ident(self, what: str = "identifier") -> _Tok:
        tok = self.next(what)
        if tok.kind != "ident":
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok

    def var(self) -> _Tok:
        tok = self.next("variable")
        if tok.kind != "ident" or tok.text in _RESERVED or tok.text.endswith("[]"):
            raise self.error(f"expected variable name, found {tok.text!r}", tok)
        return tok

    def int_(self) -> int:
        tok = self.next("integer")
        if tok.kind != "num":
            raise self.error(f"expected integer, found {tok.text!r}", tok)
        return int(tok.text)

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok.text!r}", tok)

    @property
    def at_end(self) -> bool:
        return self.peek() is None


@dataclass
class _PendingFn:
    name: str
    params: list
    return_type: str
    origin: str
    lineno: int
    has_body: bool
    body: list = field(default_factory=list)  # [(Instr-kwargs, lineno, col)]
    marks: dict = field(default_factory=dict)  # @name -> index into body
    pending_marks: list = field(default_factory=list)
    loops: list = field(default_factory=list)  # stack of body indices of loop heads
    last_label: int = 0


def parse_program(text: str) -> Program:
    """Parse IR source text into a checked :class:`Program`."""
    records: dict = {}
    record_lines: dict = {}
    fns: list = []
    entry = None
    strings: list = []
    cur: Optional[_PendingFn] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokenize(raw, lineno)
        if not toks:
            continue
        ln = _Line(toks, lineno)
        if cur is None:
            head = toks[0].text
            if head == "record":
                ln.next()
                name = ln.ident("record name")
                if name.text in records or name.text in PRIMITIVES:
                    raise IRSyntaxError(f"duplicate record {name.text!r}", lineno, name.col)
                ln.expect("{")
                fields = []
                while not ln.accept("}"):
                    if fields:
                        ln.expect(",")
                    fname = ln.ident("field name")
                    ln.expect(":")
                    ftype = ln.ident("type")
                    if any(f == fname.text for f, _ in fields):
                        raise IRSyntaxError(f"duplicate field {fname.text!r}", lineno, fname.col)
                    fields.append((fname.text, ftype.text))
                ln.done()
                records[name.text] = tuple(fields)
                record_lines[name.text] = lineno
            elif head == "entry":
                ln.next()
                entry = ln.ident("function name").text
                ln.done()
            elif head == "fn":
                cur = _parse_fn_header(ln)
                if not cur.has_body:
                    fns.append(cur)
                    cur = None
                elif not ln.at_end:
                    # one-line body: fn f(...) -> T { <instr> }
                    rest = ln.toks[ln.i:]
                    if rest[-1].text != "}":
                        raise ln.error("expected '}' closing a one-line body", rest[-1])
                    if len(rest) > 1:
                        _parse_body_line(_Line(rest[:-1], lineno), cur, strings)
                    if not _parse_body_line(_Line(rest[-1:], lineno), cur, strings):
                        raise ln.error("loops need a multi-line body", rest[0])
                    fns.append(cur)
                    cur = None
            else:
                raise ln.error(f"expected 'record', 'entry' or 'fn', found {head!r}", toks[0])
        else:
            if _parse_body_line(ln, cur, strings):
                fns.append(cur)
                cur = None
    if cur is not None:
        raise IRSyntaxError(f"unterminated function {cur.name!r}", cur.lineno, 1)

    functions = {}
    for pf in fns:
        if pf.name in functions:
            raise IRSyntaxError(f"duplicate function {pf.name!r}", pf.lineno, 1)
        functions[pf.name] = _finish_fn(pf)
    program = Program(records, functions, entry or "main", tuple(strings))
    check_program(program, record_lines)
    return program


def _parse_type_tok(ln: _Line) -> str:
    return ln.ident("type").text


def _parse_fn_header(ln: _Line) -> _PendingFn:
    ln.expect("fn")
    origin = APPLICATION
    if ln.peek() is not None and ln.peek().text == "extern":
        ln.next()
        origin = EXTERN
    name = ln.ident("function name").text
    ln.expect("(")
    params = []
    while not ln.accept(")"):
        if params:
            ln.expect(",")
        v = ln.var().text
        ln.expect(":")
        params.append((v, _parse_type_tok(ln)))
    ln.expect("->")
    ret = _parse_type_tok(ln)
    has_body = ln.accept("{")
    if not has_body:
        ln.done()
    if not has_body and origin == APPLICATION:
        raise ln.error(f"application function {name!r} needs a body")
    return _PendingFn(name, params, ret, origin, ln.lineno, has_body)


def _label_ref(ln: _Line):
    tok = ln.next("label")
    if tok.kind == "num":
        return int(tok.text)
    if tok.kind == "mark":
        return tok.text
    raise ln.error(f"expected label, found {tok.text!r}", tok)


def _parse_body_line(ln: _Line, fn: _PendingFn, strings: list) -> bool:
    """Consume one body line; return True when the function is closed."""
    first = ln.peek()
    if first.kind == "mark" and ln.peek(1) is not None and ln.peek(1).text == ":" and len(ln.toks) == 2:
        if first.text in fn.marks or first.text in fn.pending_marks:
            raise ln.error(f"duplicate marker {first.text}", first)
        fn.pending_marks.append(first.text)
        return False

    label = None
    if first.kind == "num" and ln.peek(1) is not None and ln.peek(1).text == ":":
        label = int(first.text)
        ln.i += 2
    col = ln.peek().col if ln.peek() else first.col

    if ln.peek() is not None and ln.peek().text == "}":
        ln.next()
        ln.done()
        if fn.loops:
            head_idx = fn.loops.pop()
            _emit(fn, ln, label, col, {"op": "endloop", "targets": (head_idx,)})
            fn.body[head_idx][0]["targets"] = (len(fn.body) - 1,)
            return False
        if label is not None:
            raise IRSyntaxError("label on function end", ln.lineno, first.col)
        if fn.pending_marks:
            raise IRSyntaxError(f"marker {fn.pending_marks[0]} has no instruction", ln.lineno, first.col)
        return True

    kw = _parse_instr(ln, strings)
    ln.done()
    _emit(fn, ln, label, col, kw)
    if kw["op"] == "loop":
        fn.loops.append(len(fn.body) - 1)
    return False


def _emit(fn: _PendingFn, ln: _Line, label, col, kw) -> None:
    if label is None:
        label = fn.last_label + 1
    elif label <= fn.last_label:
        raise IRSyntaxError(f"label {label} is not greater than previous label {fn.last_label}", ln.lineno, col)
    fn.last_label = label
    kw["label"] = label
    for m in fn.pending_marks:
        fn.marks[m] = len(fn.body)
    fn.pending_marks.clear()
    fn.body.append((kw, ln.lineno, col))


def _parse_instr(ln: _Line, strings: list) -> dict:
    dest = None
    if ln.peek(1) is not None and ln.peek(1).text == "=":
        dest = ln.var().text
        ln.expect("=")
    tok = ln.ident("operation")
    op = tok.text
    if op == "const":
        if dest is None:
            raise ln.error("const needs a destination", tok)
        v = ln.next("constant")
        if v.kind == "num":
            value = int(v.text)
        elif v.text in ("true", "false"):
            value = v.text == "true"
        else:
            raise ln.error(f"bad constant {v.text!r}", v)
        return {"op": "const", "dest": dest, "value": value}
    if op == "str":
        if dest is None:
            raise ln.error("str needs a destination", tok)
        s = ln.next("string literal")
        if s.kind != "str":
            raise ln.error(f"expected string literal, found {s.text!r}", s)
        literal = json.loads(s.text)
        if literal not in strings:
            strings.append(literal)
        return {"op": "str", "dest": dest, "value": strings.index(literal)}
    if op == "field":
        base = ln.var().text
        ln.expect(".")
        fname = ln.ident("field name").text
        return {"op": "field", "dest": _need(ln, dest, tok), "args": (base,), "name": fname}
    if op == "arrayload":
        base = ln.var().text
        ln.expect("[")
        idx = ln.var().text
        ln.expect("]")
        return {"op": "arrayload", "dest": _need(ln, dest, tok), "args": (base, idx)}
    if op == "len":
        return {"op": "len", "dest": _need(ln, dest, tok), "args": (ln.var().text,)}
    if op in BINOPS:
        a, b = ln.var().text, ln.var().text
        return {"op": "binop", "dest": _need(ln, dest, tok), "name": op, "args": (a, b)}
    if op in ("call", "invoke"):
        callee = ln.ident("function name").text
        args = []
        while not ln.at_end:
            args.append(ln.var().text)
        if op == "invoke" and not args:
            raise ln.error("invoke needs a receiver", tok)
        return {"op": op, "dest": dest, "name": callee, "args": tuple(args)}
    if dest is not None:
        raise ln.error(f"{op!r} does not produce a value", tok)
    if op == "return":
        return {"op": "return", "args": () if ln.at_end else (ln.var().text,)}
    if op == "branch":
        c = ln.var().text
        ln.expect("then")
        t = _label_ref(ln)
        ln.expect("else")
        return {"op": "branch", "args": (c,), "targets": (t, _label_ref(ln))}
    if op == "if":
        cmp = ln.ident("comparison")
        if cmp.text not in COMPARE | STRING_OPS - {"concat"}:
            raise ln.error(f"unknown comparison {cmp.text!r}", cmp)
        a, b = ln.var().text, ln.var().text
        ln.expect("then")
        t = _label_ref(ln)
        ln.expect("else")
        return {"op": "if", "name": cmp.text, "args": (a, b), "targets": (t, _label_ref(ln))}
    if op == "jump":
        return {"op": "jump", "targets": (_label_ref(ln),)}
    if op == "assert":
        return {"op": "assert", "args": (ln.var().text,)}
    if op == "loop":
        iv = ln.var().text
        ln.expect("<")
        bound = ln.var().text
        ln.expect("{")
        return {"op": "loop", "dest": iv, "args": (bound,)}
    raise ln.error(f"unknown operation {op!r}", tok)


def _need(ln: _Line, dest, tok) -> str:
    if dest is None:
        raise ln.error(f"{tok.text} needs a destination", tok)
    return dest


def _finish_fn(pf: _PendingFn) -> Function:
    if pf.loops:
        kw, lineno, col = pf.body[pf.loops[-1]]
        raise IRSyntaxError("unterminated loop", lineno, col)
    labels = [kw["label"] for kw, _, _ in pf.body]
    label_set = set(labels)
    body = []
    for kw, lineno, col in pf.body:
        kw = dict(kw)
        if kw["op"] in ("loop", "endloop"):
            kw["targets"] = tuple(labels[i] for i in kw["targets"])
        elif kw.get("targets"):
            resolved = []
            for t in kw["targets"]:
                if isinstance(t, str):
                    if t not in pf.marks:
                        raise IRSyntaxError(f"unknown marker {t}", lineno, col)
                    t = labels[pf.marks[t]]
                elif t not in label_set:
                    raise IRSyntaxError(f"unknown label {t}", lineno, col)
                resolved.append(t)
            kw["targets"] = tuple(resolved)
        body.append(Instr(**kw))
    positions = {0: (pf.lineno, 1)}
    positions.update((ins.label, (lineno, col)) for ins, (_, lineno, col) in zip(body, pf.body))
    fn = Function(pf.name, tuple(pf.params), pf.return_type, tuple(body), pf.origin, positions=positions)
    _check_loop_nesting(fn, pf)
    return fn


def _check_loop_nesting(fn: Function, pf: _PendingFn) -> None:
    # innermost enclosing loop head label per instruction; endloop belongs to its own loop
    owner = {}
    stack = []
    for ins in fn.body:
        if ins.op == "endloop":
            owner[ins.label] = stack[-1]
            stack.pop()
            continue
        owner[ins.label] = stack[-1] if stack else None
        if ins.op == "loop":
            stack.append(ins.label)
    for (kw, lineno, col), ins in zip(pf.body, fn.body):
        if ins.op in ("branch", "if", "jump"):
            for t in ins.targets:
                if owner[t] != owner[ins.label]:
                    raise IRSyntaxError(f"jump to label {t} crosses a loop boundary", lineno, col)


# --------------------------------------------------------------------------
# Checking

def check_program(program: Program, record_lines: Optional[dict] = None) -> None:
    """Validate declarations, SSA form, call targets and operand types.

    Fills in ``Function.var_types`` as a side effect.
    """
    record_lines = record_lines or {}

    def declared(t: str, line: int = 0) -> None:
        if base_type(t) not in PRIMITIVES and base_type(t) not in program.records:
            raise UndeclaredTypeError(f"undeclared type {t!r}", line, 1)

    for rname, fields in program.records.items():
        for _, ftype in fields:
            declared(ftype, record_lines.get(rname, 0))
    for fn in program.functions.values():
        header = fn.positions.get(0, (0, 0))[0]
        for _, t in fn.params:
            declared(t, header)
        if fn.return_type != VOID:
            declared(fn.return_type, header)
        _check_function(program, fn, declared)

    entry = program.functions.get(program.entry)
    if entry is None:
        raise UnresolvedCallError(f"entry function {program.entry!r} not found")
    if entry.is_extern:
        raise IRTypeError(f"entry function {program.entry!r} must be an application function")
    if len(entry.params) != 1:
        raise IRTypeError(f"entry function {program.entry!r} must take exactly one parameter")


def _check_function(program: Program, fn: Function, declared) -> None:
    types = fn.var_types
    types.clear()

    def where(ins: Instr) -> tuple:
        return fn.positions.get(ins.label, (0, 0))

    for v, t in fn.params:
        if v in types:
            raise SSAError(f"{fn.name}: parameter {v} declared twice", *fn.positions.get(0, (0, 0)))
        types[v] = t
    for ins in fn.body:
        if ins.dest is None:
            continue
        if ins.dest in types:
            raise SSAError(f"{fn.name}: {ins.dest} assigned more than once (label {ins.label})", *where(ins))
        types[ins.dest] = None  # placeholder, resolved below

    def tyof(v: str, ins: Instr) -> str:
        if v not in types:
            raise IRTypeError(f"{fn.name}: use of undefined variable {v} (label {ins.label})", *where(ins))
        t = types[v]
        if t is None:
            raise IRTypeError(f"{fn.name}: {v} used before its definition (label {ins.label})", *where(ins))
        return t

    def fail(msg: str, ins: Instr):
        return IRTypeError(f"{fn.name}: label {ins.label}: {msg}", *where(ins))

    for ins in fn.body:
        op = ins.op
        result = None
        if op == "const":
            result = "bool" if isinstance(ins.value, bool) else "int"
        elif op == "str":
            result = "string"
        elif op == "field":
            bt = tyof(ins.args[0], ins)
            ft = program.field_type(bt, ins.name) if bt in program.records else None
            if ft is None:
                raise fail(f"type {bt} has no field {ins.name!r}", ins)
            result = ft
        elif op == "arrayload":
            bt, it = tyof(ins.args[0], ins), tyof(ins.args[1], ins)
            if not is_array(bt) or it != "int":
                raise fail(f"arrayload needs T[] and int, got {bt}, {it}", ins)
            result = element_type(bt)
        elif op == "len":
            bt = tyof(ins.args[0], ins)
            if not (is_array(bt) or bt == "string"):
                raise fail(f"len needs an array or string, got {bt}", ins)
            result = "int"
        elif op in ("binop", "if"):
            result = _binop_type(ins.name, tyof(ins.args[0], ins), tyof(ins.args[1], ins))
            if result is None:
                raise fail(f"bad operand types for {ins.name}", ins)
        elif op in ("call", "invoke"):
            callee = program.functions.get(ins.name)
            if callee is None:
                raise UnresolvedCallError(f"{fn.name}: label {ins.label}: unknown function {ins.name!r}", *where(ins))
            if len(callee.params) != len(ins.args):
                raise fail(f"{ins.name} expects {len(callee.params)} arguments, got {len(ins.args)}", ins)
            for a, (_, pt) in zip(ins.args, callee.params):
                if tyof(a, ins) != pt:
                    raise fail(f"argument {a} of {ins.name} should be {pt}", ins)
            if ins.dest is not None:
                if callee.return_type == VOID:
                    raise fail(f"{ins.name} returns void", ins)
                result = callee.return_type
        elif op == "return":
            if ins.args:
                if tyof(ins.args[0], ins) != fn.return_type:
                    raise fail(f"return type should be {fn.return_type}", ins)
            elif fn.return_type != VOID:
                raise fail("missing return value", ins)
        elif op == "branch" or op == "assert":
            if tyof(ins.args[0], ins) != "bool":
                raise fail(f"{op} condition must be bool", ins)
        elif op == "loop":
            if tyof(ins.args[0], ins) != "int":
                raise fail("loop bound must be int", ins)
            result = "int"
        if ins.dest is not None:
            types[ins.dest] = result
    if fn.is_extern and not fn.body:
        return


def _binop_type(kind: str, a: str, b: str) -> Optional[str]:
    if kind in ARITH:
        return "int" if a == b == "int" else None
    if kind in ("eq", "ne"):
        return "bool" if a == b else None
    if kind in COMPARE:
        return "bool" if a == b == "int" else None
    if kind in LOGIC:
        return "bool" if a == b == "bool" else None
    if kind == "concat":
        return "string" if a == b == "string" else None
    if kind in STRING_OPS:
        return "bool" if a == b == "string" else None
    return None


# --------------------------------------------------------------------------
# Pretty-printing

def format_program(program: Program) -> str:
    out = [f"entry {program.entry}"]
    for name, fields in program.records.items():
        inner = ", ".join(f"{f}: {t}" for f, t in fields)
        out.append(f"record {name} {{ {inner} }}" if inner else f"record {name} {{}}")
    for fn in program.functions.values():
        params = ", ".join(f"{v}: {t}" for v, t in fn.params)
        ext = "extern " if fn.is_extern else ""
        head = f"fn {ext}{fn.name}({params}) -> {fn.return_type}"
        if fn.is_extern and not fn.body:
            out.append(head)
            continue
        out.append(head + " {")
        depth = 1
        for ins in fn.body:
            if ins.op == "endloop":
                depth -= 1
            out.append("    " * depth + f"{ins.label}: {_format_instr(ins, program)}")
            if ins.op == "loop":
                depth += 1
        out.append("}")
    return "\n".join(out) + "\n"


def _format_instr(ins: Instr, program: Program) -> str:
    op = ins.op
    lhs = f"{ins.dest} = " if ins.dest is not None else ""
    if op == "const":
        v = ins.value
        return f"{lhs}const {str(v).lower() if isinstance(v, bool) else v}"
    if op == "str":
        return f"{lhs}str {json.dumps(program.string_constants[ins.value])}"
    if op == "field":
        return f"{lhs}field {ins.args[0]}.{ins.name}"
    if op == "arrayload":
        return f"{lhs}arrayload {ins.args[0]}[{ins.args[1]}]"
    if op == "len":
        return f"{lhs}len {ins.args[0]}"
    if op == "binop":
        return f"{lhs}{ins.name} {ins.args[0]} {ins.args[1]}"
    if op in ("call", "invoke"):
        return " ".join([f"{lhs}{op} {ins.name}", *ins.args])
    if op == "return":
        return " ".join(["return", *ins.args])
    if op == "branch":
        return f"branch {ins.args[0]} then {ins.targets[0]} else {ins.targets[1]}"
    if op == "if":
        return f"if {ins.name} {ins.args[0]} {ins.args[1]} then {ins.targets[0]} else {ins.targets[1]}"
    if op == "jump":
        return f"jump {ins.targets[0]}"
    if op == "assert":
        return f"assert {ins.args[0]}"
    if op == "loop":
        return f"loop {ins.dest} < {ins.args[0]} {{"
    if op == "endloop":
        return "}"
    raise ValueError(op)


def reachable_functions(program: Program, include_extern: bool = False) -> list:
    """Application functions reachable from the entry, in DFS preorder."""
    seen: list = []
    seen_set: set = set()

    def visit(name: str) -> None:
        if name in seen_set:
            return
        fn = program.functions[name]
        if fn.is_extern and not include_extern:
            return
        seen_set.add(name)
        seen.append(name)
        for ins in fn.body:
            if ins.op in ("call", "invoke"):
                visit(ins.name)

    visit(program.entry)
    return seen


def calls(fn: Function) -> Iterable[Instr]:
    return (i for i in fn.body if i.op in ("call", "invoke"))
