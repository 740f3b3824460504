"""On-disk corpus: one binary file per choice sequence.

Layout (little endian, version 1)::

    magic    4s   b"TGBF"
    version  u16
    fprint   32s  sha256 of the program text and generator registry
    status   u8   0 = success corpus, 1 = failure corpus
    strings  u8   1 when the string table was enabled
    p_const  f64
    kind     u16 length + utf-8 failure kind ("" for successes)
    ntypes   u16, then per type: u16 length + utf-8 name
    nentries u32, then per entry:
        value, lo, hi  3 x i64
        u16 EI length, EI as i32s
        u16 type-stack length, type ids as u16
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

from .generators import FciEntry, GeneratorRegistry
from .ir import Program, format_program

MAGIC = b"TGBF"
VERSION = 1


class CorpusFormatError(Exception):
    pass


class FingerprintMismatch(CorpusFormatError):
    pass


@dataclass
class StoredFci:
    fci: list
    fingerprint: bytes
    failure: str  # "" for success-corpus entries
    uses_strings: bool
    p_const: float


def fingerprint(program: Program, registry: GeneratorRegistry) -> bytes:
    h = hashlib.sha256()
    h.update(format_program(program).encode())
    h.update(b"\0" + registry.name.encode())
    for t in sorted(registry.types()):
        h.update(b"\0" + t.encode())
    return h.digest()


def _str(s: str) -> bytes:
    b = s.encode()
    return struct.pack("<H", len(b)) + b


def encode_fci(fci: list, fprint: bytes, failure: str = "", uses_strings: bool = False, p_const: float = 0.5) -> bytes:
    type_ids: dict = {}
    for e in fci:
        for t in e.types:
            type_ids.setdefault(t, len(type_ids))
    out = [
        MAGIC,
        struct.pack("<H", VERSION),
        fprint,
        struct.pack("<BBd", 1 if failure else 0, int(uses_strings), p_const),
        _str(failure),
        struct.pack("<H", len(type_ids)),
    ]
    out.extend(_str(t) for t in type_ids)
    out.append(struct.pack("<I", len(fci)))
    for e in fci:
        out.append(struct.pack("<qqqH", e.value, e.lo, e.hi, len(e.ei)))
        out.append(struct.pack(f"<{len(e.ei)}i", *e.ei))
        out.append(struct.pack("<H", len(e.types)))
        out.append(struct.pack(f"<{len(e.types)}H", *(type_ids[t] for t in e.types)))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise CorpusFormatError("truncated corpus file")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def string(self) -> str:
        (n,) = self.take("<H")
        if self.pos + n > len(self.data):
            raise CorpusFormatError("truncated corpus file")
        s = self.data[self.pos:self.pos + n].decode()
        self.pos += n
        return s


def decode_fci(data: bytes) -> StoredFci:
    r = _Reader(data)
    (magic,) = r.take("<4s")
    if magic != MAGIC:
        raise CorpusFormatError("not a corpus file")
    (version,) = r.take("<H")
    if version != VERSION:
        raise CorpusFormatError(f"unsupported corpus version {version}")
    (fprint,) = r.take("<32s")
    status, uses_strings, p_const = r.take("<BBd")
    failure = r.string()
    (ntypes,) = r.take("<H")
    names = [r.string() for _ in range(ntypes)]
    (n,) = r.take("<I")
    fci = []
    for _ in range(n):
        value, lo, hi, nei = r.take("<qqqH")
        ei = r.take(f"<{nei}i")
        (nt,) = r.take("<H")
        types = tuple(names[i] for i in r.take(f"<{nt}H"))
        fci.append(FciEntry(value, tuple(ei), types, lo, hi))
    if r.pos != len(data):
        raise CorpusFormatError("trailing bytes in corpus file")
    if bool(status) != bool(failure):
        raise CorpusFormatError("inconsistent status flag")
    return StoredFci(fci, fprint, failure, bool(uses_strings), p_const)


def load_fci(path, program: Program, registry: GeneratorRegistry) -> StoredFci:
    stored = decode_fci(Path(path).read_bytes())
    if stored.fingerprint != fingerprint(program, registry):
        raise FingerprintMismatch(f"{path}: corpus was recorded against a different program or generator set")
    return stored


def save_corpus(corpus, directory, program: Program, registry: GeneratorRegistry) -> list:
    """Write ``corpus.successes`` under ``S/`` and ``corpus.failures`` under ``E/``."""
    root = Path(directory)
    fprint = fingerprint(program, registry)
    uses_strings = bool(corpus.strings)
    written = []
    for sub, entries in (("S", corpus.successes), ("E", corpus.failures)):
        d = root / sub
        d.mkdir(parents=True, exist_ok=True)
        for i, e in enumerate(entries):
            failure = getattr(e, "kind", "") or ""
            p = d / f"id_{i:06d}.fci"
            p.write_bytes(encode_fci(e.fci, fprint, failure, uses_strings, corpus.p_const))
            written.append(p)
    return written
