"""Generator combinators over an execution-indexed, type-annotated choice sequence.

Generators are plain Python callables registered per type name.  They never
touch a PRNG directly; every random decision goes through
:meth:`Session.choice`, which keys the decision by its execution index (the
flattened ``[label, count, label, count, ...]`` vector of the generator call
stack) and records the generator return types active at that point.

On regeneration a stored choice is reused only at an equal execution index,
so a mutation that changes how much input one generator consumes does not
shift values into unrelated generators.
"""

from __future__ import annotations

import math
import random
from operator import itemgetter
from typing import Callable, NamedTuple, Optional

MAX_DEPTH = 64
STRING_TYPE = "string"
FRESH_STRING_MAX_LEN = 8
_COIN_BITS = 1 << 16


class FciEntry(NamedTuple):
    value: int
    ei: tuple  # flattened (label, count) pairs, outermost frame first
    types: tuple  # generator return types, innermost first, root type last
    lo: int
    hi: int


_entry = tuple.__new__  # skips the NamedTuple constructor frame on hot paths


_value_of = itemgetter(0)
_ei_of = itemgetter(1)
_shape_of = itemgetter(2, 3, 4)

_EI_CACHE: dict = {}
_EI_CACHE_LIMIT = 1 << 16


def _block_eis(prefix: tuple, at: int, q0: int, n: int) -> list:
    key = (prefix, at, q0, n)
    eis = _EI_CACHE.get(key)
    if eis is None:
        if len(_EI_CACHE) >= _EI_CACHE_LIMIT:
            _EI_CACHE.clear()
        eis = _EI_CACHE[key] = [prefix + (at, q) for q in range(q0 + 1, q0 + n + 1)]
    return eis


class GenerationError(Exception):
    pass


class GeneratorRegistry:
    """Maps a type name to the procedure that builds a value of that type."""

    def __init__(self, name: str = "registry"):
        self.name = name
        self._gens: dict = {}

    def register(self, type_name: str, fn: Optional[Callable] = None):
        def deco(f):
            if type_name in self._gens:
                raise ValueError(f"generator for {type_name!r} already registered")
            self._gens[type_name] = f
            return f

        return deco(fn) if fn is not None else deco

    def __contains__(self, type_name: str) -> bool:
        return type_name in self._gens

    def __getitem__(self, type_name: str) -> Callable:
        try:
            return self._gens[type_name]
        except KeyError:
            raise GenerationError(f"no generator registered for {type_name!r}") from None

    def types(self) -> list:
        return list(self._gens)

    def check_covers(self, program, root_type: str) -> None:
        """Raise if a record type reachable from ``root_type`` has no generator."""
        from .ir import base_type

        seen, todo = set(), [base_type(root_type)]
        while todo:
            t = todo.pop()
            if t in seen or t not in program.records:
                continue
            seen.add(t)
            if t not in self._gens:
                raise GenerationError(f"no generator registered for {t!r}")
            todo.extend(base_type(ft) for _, ft in program.records[t])


class _Frame:
    __slots__ = ("prefix", "counts", "types", "depth")

    def __init__(self, prefix: tuple, types: tuple, depth: int):
        self.prefix = prefix
        self.counts: dict = {}
        self.types = types
        self.depth = depth


class Session:
    """One generation pass: replays stored choices by execution index."""

    def __init__(
        self,
        registry: GeneratorRegistry,
        fci=(),
        rng: Optional[random.Random] = None,
        strings=(),
        p_const: float = 0.5,
        max_depth: int = MAX_DEPTH,
    ):
        self.registry = registry
        self.rng = rng if rng is not None else random.Random(0)
        self.strings = tuple(strings)
        self.p_const = p_const
        self.max_depth = max_depth
        self.out: list = []
        self.reused = 0
        self.fresh = 0
        self._src = list(fci)
        self._pos = 0
        self._index: Optional[dict] = None  # EI -> position, built on first divergence
        self._keyed: Optional[dict] = None  # EI -> entries, only when EIs repeat
        self._frame: Optional[_Frame] = None

    # -- random choices ------------------------------------------------

    def _locate(self, ei: tuple) -> Optional[int]:
        """Position of the stored entry for ``ei`` when execution indices are unique."""
        src, pos = self._src, self._pos
        if pos < len(src) and src[pos][1] == ei:
            return pos
        if self._keyed is not None:
            return None
        index = self._index
        if index is None:
            # control flow diverged for the first time
            index = {e[1]: i for i, e in enumerate(src)}
            if len(index) != len(src):
                self._bucketize()
                return None
            self._index = index
        return index.get(ei)

    def _bucketize(self) -> None:
        # duplicate execution indices: consume the remaining entries per EI in stored order
        keyed = self._keyed = {}
        for e in self._src[self._pos:]:
            keyed.setdefault(e[1], []).append(e)
        for b in keyed.values():
            b.reverse()

    def _stored(self, ei: tuple) -> Optional[FciEntry]:
        if self._keyed is None:
            p = self._locate(ei)
            if self._keyed is None:
                if p is None:
                    return None
                self._pos = p + 1
                return self._src[p]
        bucket = self._keyed.get(ei)
        if bucket:
            return bucket.pop()
        return None

    def choice(self, lo: int, hi: int, at: int) -> int:
        """Draw an integer in ``[lo, hi]`` at call-site label ``at``."""
        f = self._frame
        if f is None:
            raise GenerationError("choice() called outside a generator frame")
        q = f.counts.get(at, 0) + 1
        f.counts[at] = q
        ei = f.prefix + (at, q)
        e = self._stored(ei)
        if e is not None:
            v = e.value
            if v < lo or v > hi:
                v = lo + (v - lo) % (hi - lo + 1)
            self.reused += 1
        else:
            v = lo + int(self.rng.random() * (hi - lo + 1))
            self.fresh += 1
        self.out.append(_entry(FciEntry, (v, ei, f.types, lo, hi)))
        return v

    next_choice = choice

    def choices(self, lo: int, hi: int, n: int, at: int) -> list:
        """``n`` draws at the same call site, one FCI entry each.

        Same result as ``n`` calls to :meth:`choice`.  When the stored
        sequence continues with exactly these entries they are reused as a
        block, which keeps large blobs cheap to replay.
        """
        f = self._frame
        if f is None:
            raise GenerationError("choices() called outside a generator frame")
        q0 = f.counts.get(at, 0)
        f.counts[at] = q0 + n
        prefix, types, out = f.prefix, f.types, self.out
        eis = _block_eis(prefix, at, q0, n)
        src = self._src
        if n and self._keyed is None:
            p = self._locate(eis[0])
            if p is not None and p + n <= len(src):
                block = src[p:p + n]
                if list(map(_ei_of, block)) == eis and set(map(_shape_of, block)) == {(types, lo, hi)}:
                    vals = list(map(_value_of, block))
                    if min(vals) >= lo and max(vals) <= hi:
                        self._pos = p + n
                        self.reused += n
                        out.extend(block)
                        return vals
        span = hi - lo + 1
        rand = self.rng.random
        stored = self._stored
        vals = []
        for ei in eis:
            e = stored(ei)
            if e is not None:
                v = e[0]
                if v < lo or v > hi:
                    v = lo + (v - lo) % span
                self.reused += 1
            else:
                v = lo + int(rand() * span)
                self.fresh += 1
            out.append(_entry(FciEntry, (v, ei, types, lo, hi)))
            vals.append(v)
        return vals

    def bernoulli(self, p: float, at: int) -> bool:
        return self.choice(0, _COIN_BITS - 1, at) < p * _COIN_BITS

    def geometric(self, p: float, at: int) -> int:
        """Failures before the first success, from a single draw (inverse CDF)."""
        u = self.choice(0, (1 << 31) - 1, at) / float(1 << 31)
        return int(math.log1p(-u) / math.log1p(-p))

    # -- generator frames ----------------------------------------------

    def gen(self, type_name: str, at: int):
        """Invoke the registered generator for ``type_name`` from call site ``at``."""
        return self._call(type_name, self.registry[type_name], at)

    def string(self, at: int) -> str:
        return self._call(STRING_TYPE, gen_string, at)

    def _call(self, type_name: str, fn: Callable, at: int):
        parent = self._frame
        if parent is None:
            raise GenerationError("sub-generator invoked outside a generator frame")
        if parent.depth >= self.max_depth:
            raise GenerationError(f"generator recursion deeper than {self.max_depth}")
        q = parent.counts.get(at, 0) + 1
        parent.counts[at] = q
        self._frame = _Frame(parent.prefix + (at, q), (type_name,) + parent.types, parent.depth + 1)
        try:
            return fn(self)
        finally:
            self._frame = parent

    def run_root(self, type_name: str):
        if self._frame is not None:
            raise GenerationError("root generator already active")
        fn = self.registry[type_name]
        self._frame = _Frame((), (type_name,), 1)
        try:
            return fn(self)
        finally:
            self._frame = None

    @property
    def depth(self) -> int:
        return self._frame.depth if self._frame else 0


def gen_string(s: Session) -> str:
    """Either a constant from the string table or a fresh printable string.

    Labels: 1 coin, 2 table index, 3 length, 4 characters.
    """
    table = s.strings
    if table and s.p_const > 0 and s.bernoulli(s.p_const, at=1):
        return table[s.choice(0, len(table) - 1, at=2)]
    n = s.choice(0, FRESH_STRING_MAX_LEN, at=3)
    return "".join(chr(c) for c in s.choices(32, 126, n, at=4))


def generate(
    registry: GeneratorRegistry,
    root_type: str,
    fci=(),
    rng: Optional[random.Random] = None,
    strings=(),
    p_const: float = 0.5,
    max_depth: int = MAX_DEPTH,
):
    """Build one input value; returns ``(value, fci_out)``.

    ``fci_out`` holds the consumed entries and fresh draws in draw order;
    stored entries whose execution index never came up are dropped.
    """
    s = Session(registry, fci, rng, strings, p_const, max_depth)
    value = s.run_root(root_type)
    return value, s.out


STRUCT_INT_RANGE = (-8, 8)
STRUCT_MAX_LEN = 4


def structural_registry(program, int_range=STRUCT_INT_RANGE, max_len: int = STRUCT_MAX_LEN) -> GeneratorRegistry:
    """Generators derived from record declarations alone.

    Field ``i`` of a record is drawn at call-site label ``i + 1``; arrays
    draw their length at the field's label and elements at label 100.
    Every record type and ``int``, ``bool``, ``string`` get an entry, so any
    declared type can serve as the root.
    """
    from .ir import element_type, is_array

    lo, hi = int_range
    reg = GeneratorRegistry("structural")

    def value(s: Session, t: str, at: int):
        if t == "int":
            return s.choice(lo, hi, at)
        if t == "bool":
            return s.choice(0, 1, at) == 1
        if t == "string":
            return s.string(at)
        return s.gen(t, at)

    def record_gen(name: str, fields: tuple):
        from .interp import Record

        def gen(s: Session):
            return Record(name, {f: value(s, ft, i + 1) for i, (f, ft) in enumerate(fields)})

        return gen

    def array_gen(et: str):
        def gen(s: Session):
            n = s.choice(0, max_len, at=1)
            return [value(s, et, 100) for _ in range(n)]

        return gen

    reg.register("int", lambda s: s.choice(lo, hi, 1))
    reg.register("bool", lambda s: s.choice(0, 1, 1) == 1)
    reg.register(STRING_TYPE, gen_string)
    arrays: set = set()
    for name, fields in program.records.items():
        reg.register(name, record_gen(name, fields))
        arrays.update(ft for _, ft in fields if is_array(ft))
    for fn in program.functions.values():
        arrays.update(t for _, t in fn.params if is_array(t))
    for t in sorted(arrays):
        while is_array(t) and t not in reg:
            reg.register(t, array_gen(element_type(t)))
            t = element_type(t)
    return reg
