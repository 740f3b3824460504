"""S3 CSV loader: only one exact object key gets parsed and stored."""

from __future__ import annotations

from ..generators import GeneratorRegistry, Session
from ..interp import Record
from ..ir import CodeTarget

GRADES_KEY = "uploads/grades.csv"
MAX_ROWS = 4

HARD_TARGETS = (CodeTarget("handler", 10, "then"),)


def gen_event(s: Session) -> Record:
    bucket = s.string(at=1)
    obj = s.gen("S3Object", at=2)
    return Record("S3Event", {"bucket": bucket, "object": obj})


def gen_object(s: Session) -> Record:
    key = s.string(at=1)
    n = s.choice(0, MAX_ROWS, at=2)
    rows = [s.gen("Row", at=3) for _ in range(n)]
    return Record("S3Object", {"key": key, "rows": rows})


def gen_row(s: Session) -> Record:
    return Record("Row", {"id": s.choice(0, 9999, at=1), "grade": s.choice(0, 100, at=2)})


def make_registry() -> GeneratorRegistry:
    reg = GeneratorRegistry("csv-loader")
    reg.register("S3Event", gen_event)
    reg.register("S3Object", gen_object)
    reg.register("Row", gen_row)
    return reg


def make_externs() -> dict:
    # per-test in-memory bucket and table
    def s3_put(ctx, obj):
        ctx.state.setdefault("bucket", {})[obj.fields["key"]] = obj.fields["rows"]
        ctx.cover("put")

    def s3_get_rows(ctx, key):
        rows = ctx.state.get("bucket", {}).get(key)
        if rows is None:
            raise KeyError(key)
        ctx.cover("empty" if not rows else "rows")
        return rows

    def ddb_put(ctx, row):
        table = ctx.state.setdefault("table", {})
        ctx.cover("overwrite" if row.fields["id"] in table else "insert")
        table[row.fields["id"]] = row

    def log_archive(ctx, key):
        ctx.cover("archived")

    return {"s3Put": s3_put, "s3GetRows": s3_get_rows, "ddbPut": ddb_put, "logArchive": log_archive}


def _event(key: str, grades=()) -> Record:
    rows = [Record("Row", {"id": i, "grade": g}) for i, g in enumerate(grades)]
    return Record("S3Event", {"bucket": "b", "object": Record("S3Object", {"key": key, "rows": rows})})


def witnesses() -> dict:
    load = _event(GRADES_KEY, [80, 20])
    return {
        CodeTarget("handler", 10, "then"): load,
        CodeTarget("handler", 10, "else"): _event("x"),
        CodeTarget("handler", 19, "then"): _event("archive/old.csv"),
        CodeTarget("handler", 19, "else"): _event("x"),
        CodeTarget("storeRow", 3, "then"): load,
        CodeTarget("storeRow", 3, "else"): load,
    }
