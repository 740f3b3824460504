import pytest

from typegbf.bench import load_benchmark
from typegbf.interp import (
    CoverageSet,
    ExternFault,
    Interpreter,
    Record,
    run,
    type_matches,
)
from typegbf.ir import CodeTarget, parse_program

LOOPY = """fn main(v1: int) -> int {
    v2 = const 0
    v3 = const 1
    loop v4 < v1 {
        v5 = add v4 v3
    }
    if lt v2 v1 then @pos else @neg
@pos:
    return v1
@neg:
    return v2
}
"""


def test_coverage_of_branch_arms():
    p = parse_program(LOOPY)
    assert run(p, 3).coverage.app == {CodeTarget("main", 6, "then")}
    assert run(p, 0).coverage.app == {CodeTarget("main", 6, "else")}


def test_step_budget_exhaustion():
    p = parse_program(LOOPY)
    r = run(p, 10**6, step_budget=500)
    assert not r.ok and r.failure == "step-budget-exhausted"
    assert r.steps == 500
    assert run(p, 10, step_budget=500).ok


def test_steps_are_deterministic():
    p = parse_program(LOOPY)
    assert run(p, 7).steps == run(p, 7).steps > run(p, 3).steps


def test_type_error_on_bad_input():
    p = parse_program(LOOPY)
    r = run(p, "seven")
    assert r.failure == "type-error"
    assert run(p, True).failure == "type-error"


def test_assertion_and_division():
    src = """fn main(v1: int) -> void {
    v2 = const 10
    v3 = div v2 v1
    v4 = const 3
    v5 = lt v3 v4
    assert v5
    return
}
"""
    p = parse_program(src)
    assert run(p, 0).failure == "assertion"
    assert run(p, 1).failure == "assertion"
    assert run(p, 5).ok


def test_array_bounds_are_assertions():
    src = """fn main(v1: int[]) -> int {
    v2 = const 2
    v3 = arrayload v1[v2]
    return v3
}
"""
    p = parse_program(src)
    assert run(p, [1, 2, 3]).ok
    assert run(p, [1]).failure == "assertion"


EXT = """record Box { n: int }
fn extern fetch(v1: int) -> Box
fn extern lib(v1: int) -> int {
    v2 = const 0
    if lt v1 v2 then @a else @b
@a:
    return v2
@b:
    return v1
}
fn main(v1: int) -> void {
    v2 = call fetch v1
    v3 = call lib v1
    v4 = field v2.n
    if eq v3 v4 then @x else @x
@x:
    return
}
"""


def test_extern_stub_and_body_coverage():
    p = parse_program(EXT)

    def fetch(ctx, n):
        ctx.cover("called")
        return Record("Box", {"n": n})

    r = Interpreter(p, {"fetch": fetch}).run(-1)
    assert r.ok
    assert r.coverage.app == {CodeTarget("main", 4, "else")}
    assert r.coverage.extern == {"fetch:called", "lib:2:then"}


def test_extern_faults():
    p = parse_program(EXT)

    def boom(ctx, n):
        raise ExternFault("service down")

    assert Interpreter(p, {"fetch": boom}).run(1).failure == "extern-fault"
    assert Interpreter(p, {}).run(1).failure == "extern-fault"
    bad = Interpreter(p, {"fetch": lambda ctx, n: 42}).run(1)
    assert bad.failure == "type-error"


def test_register_extern_validation():
    p = parse_program(EXT)
    i = Interpreter(p)
    with pytest.raises(ValueError):
        i.register_extern("main", lambda ctx: None)
    i.register_extern("fetch", lambda ctx, n: None)
    with pytest.raises(ValueError):
        i.register_extern("fetch", lambda ctx, n: None)


def test_type_matches_records_and_arrays():
    p = parse_program("record P { x: int, tags: string[] }\nfn main(v1: P[]) -> void {\n return\n}\n")
    good = [Record("P", {"x": 1, "tags": ["a"]})]
    assert type_matches(p, good, "P[]")
    assert not type_matches(p, [Record("P", {"x": True, "tags": []})], "P[]")
    assert not type_matches(p, [Record("P", {"x": 1})], "P[]")
    assert not type_matches(p, [Record("Q", {"x": 1, "tags": []})], "P[]")
    assert type_matches(p, [], "P[]")


def test_coverage_set_algebra():
    a = CoverageSet(frozenset({1}), frozenset({"e"}))
    b = CoverageSet(frozenset({1, 2}), frozenset())
    assert len(a | b) == 3
    assert (b - a).app == {2} and not (b - a).extern
    assert a.issubset(a | b)


@pytest.mark.parametrize("name", ["thumbnail", "csv-loader", "nikoshen"])
def test_witnesses_cover_their_targets(name):
    b = load_benchmark(name)
    interp = Interpreter(b.program, b.make_externs())
    assert b.witnesses
    for target, value in b.witnesses.items():
        r = interp.run(value)
        assert r.ok, r.message
        assert target in r.coverage.app
    assert set(b.hard_targets) <= set(b.witnesses)


def test_extern_state_is_per_test():
    b = load_benchmark("thumbnail")
    interp = Interpreter(b.program, b.make_externs())
    hit = b.witnesses[CodeTarget("main", 20, "then")]
    miss = b.witnesses[CodeTarget("main", 20, "else")]
    interp.run(hit)
    assert CodeTarget("main", 30, "else") in interp.run(miss).coverage.app
