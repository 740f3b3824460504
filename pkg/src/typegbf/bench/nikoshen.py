"""Keeps a table item per uploaded object; the table is cleared per test."""

from __future__ import annotations

from ..generators import GeneratorRegistry, Session
from ..interp import Record
from ..ir import CodeTarget

MAX_ITEMS = 3

HARD_TARGETS = (CodeTarget("handler", 10, "then"),)


def gen_event(s: Session) -> Record:
    obj = s.gen("S3Object", at=1)
    n = s.choice(0, MAX_ITEMS, at=2)
    items = [s.gen("Item", at=3) for _ in range(n)]
    return Record("Event", {"object": obj, "items": items})


def gen_object(s: Session) -> Record:
    return Record("S3Object", {"key": s.string(at=1), "size": s.choice(0, 1 << 20, at=2)})


def gen_item(s: Session) -> Record:
    return Record("Item", {"key": s.string(at=1), "hits": s.choice(0, 7, at=2)})


def make_registry() -> GeneratorRegistry:
    reg = GeneratorRegistry("nikoshen")
    reg.register("Event", gen_event)
    reg.register("S3Object", gen_object)
    reg.register("Item", gen_item)
    return reg


def make_externs() -> dict:
    def load(ctx, items):
        table = ctx.state["table"] = {}
        for it in items:
            table[it.fields["key"]] = it.fields["hits"]
        ctx.cover("loaded" if items else "empty")

    def has(ctx, key):
        return key in ctx.state["table"]

    def hits(ctx, key):
        return ctx.state["table"][key]

    def put(ctx, key):
        ctx.state["table"][key] = 0
        ctx.cover("put")

    def touch(ctx, key):
        ctx.state["table"][key] += 1
        ctx.cover("touch")

    return {"ddbLoad": load, "ddbHas": has, "ddbHits": hits, "ddbPut": put, "ddbTouch": touch}


def _event(key: str, items=()) -> Record:
    return Record("Event", {
        "object": Record("S3Object", {"key": key, "size": 1}),
        "items": [Record("Item", {"key": k, "hits": h}) for k, h in items],
    })


def witnesses() -> dict:
    alice = "profiles/alice.json"
    return {
        CodeTarget("handler", 6, "then"): _event("profiles/bob"),
        CodeTarget("handler", 6, "else"): _event("x"),
        CodeTarget("handler", 10, "then"): _event(alice, [(alice, 5)]),
        CodeTarget("handler", 10, "else"): _event("profiles/bob"),
        CodeTarget("handler", 13, "then"): _event(alice, [(alice, 5)]),
        CodeTarget("handler", 13, "else"): _event(alice, [(alice, 1)]),
        CodeTarget("handler", 18, "then"): _event(alice),
        CodeTarget("handler", 18, "else"): _event("profiles/bob"),
    }
