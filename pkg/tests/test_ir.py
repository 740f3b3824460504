import random

import pytest
from hypothesis import given, settings, strategies as st

from typegbf.bench import BENCHMARKS, program_source
from typegbf.ir import (
    CodeTarget,
    IRSyntaxError,
    IRTypeError,
    SSAError,
    UndeclaredTypeError,
    UnresolvedCallError,
    enumerate_code_targets,
    format_program,
    parse_program,
)

from randprog import random_program

ALL_SOURCES = [program_source(m) for m in BENCHMARKS.values()] + [program_source("album")]


def test_minimal_program():
    p = parse_program("fn main(x: int) -> void { return }")
    assert list(p.functions) == ["main"]
    assert enumerate_code_targets(p) == frozenset()


def test_multiline_minimal_program():
    p = parse_program("fn main(v1: int) -> void {\n    return\n}\n")
    assert p.entry == "main"
    assert p.input_type == "int"
    assert len(p.functions["main"].body) == 1


def test_album_check_listing():
    p = parse_program(program_source("album"))
    branches = [b for f in p.functions.values() if not f.is_extern for b in f.branches()]
    assert len(branches) == 1
    assert enumerate_code_targets(p) == {CodeTarget("check", 4, "then"), CodeTarget("check", 4, "else")}
    check = p.functions["check"]
    assert [i.label for i in check.body[:4]] == [1, 2, 3, 4]
    assert check.body[0].op == "arrayload" and check.body[0].args == ("v10", "v26")


def test_ssa_violation():
    src = "fn main(v1: int) -> void {\n v2 = const 1\n v2 = const 2\n return\n}\n"
    with pytest.raises(SSAError) as e:
        parse_program(src)
    assert e.value.line == 3


def test_parameter_reassignment_is_ssa_violation():
    with pytest.raises(SSAError):
        parse_program("fn main(v1: int) -> void {\n v1 = const 1\n return\n}\n")


def test_syntax_error_has_position():
    with pytest.raises(IRSyntaxError) as e:
        parse_program("fn main(v1: int) -> void {\n v2 = frobnicate v1\n return\n}\n")
    assert e.value.line == 2 and e.value.col >= 1


def test_unresolved_call():
    with pytest.raises(UnresolvedCallError):
        parse_program("fn main(v1: int) -> void {\n call nowhere v1\n return\n}\n")


def test_undeclared_type():
    with pytest.raises(UndeclaredTypeError):
        parse_program("fn main(v1: Widget) -> void {\n return\n}\n")


def test_diagnostics_are_distinct_classes():
    kinds = {IRSyntaxError, SSAError, UnresolvedCallError, UndeclaredTypeError}
    assert len(kinds) == 4
    for a in kinds:
        for b in kinds - {a}:
            assert not issubclass(a, b)


def test_labels_must_increase():
    src = "fn main(v1: int) -> void {\n 5: v2 = const 1\n 3: return\n}\n"
    with pytest.raises(IRSyntaxError):
        parse_program(src)


def test_branch_condition_must_be_bool():
    src = "fn main(v1: int) -> void {\n branch v1 then @a else @a\n@a:\n return\n}\n"
    with pytest.raises(IRTypeError):
        parse_program(src)


def test_jump_into_loop_rejected():
    src = """fn main(v1: int[]) -> void {
    v2 = len v1
    jump @inside
    loop v3 < v2 {
    @inside:
        v4 = arrayload v1[v3]
    }
    return
}
"""
    with pytest.raises(IRSyntaxError):
        parse_program(src)


def test_entry_must_take_one_parameter():
    with pytest.raises(IRTypeError):
        parse_program("fn main(v1: int, v2: int) -> void {\n return\n}\n")


def test_extern_branches_are_not_targets():
    src = """entry main
fn extern helper(v1: int) -> int {
    v2 = const 0
    if lt v1 v2 then @neg else @pos
@neg:
    v3 = sub v2 v1
    if gt v3 v2 then @a else @a
@a:
    return v3
@pos:
    return v1
}
fn main(v1: int) -> void {
    v2 = const 3
    if eq v1 v2 then @x else @x
@x:
    v3 = call helper v1
    if lt v3 v2 then @y else @y
@y:
    v4 = gt v3 v1
    branch v4 then @z else @z
@z:
    return
}
"""
    p = parse_program(src)
    ts = enumerate_code_targets(p)
    assert len(ts) == 6
    assert all(t.function == "main" for t in ts)


def test_string_constants_in_source_order():
    src = """fn main(v1: string) -> void {
    v2 = str "b"
    v3 = str "a"
    v4 = str "b"
    return
}
"""
    p = parse_program(src)
    assert p.string_constants == ("b", "a")


def test_string_escapes_round_trip():
    src = 'fn main(v1: string) -> void {\n v2 = str "tab\\there \\"q\\" \\u00e9"\n return\n}\n'
    p = parse_program(src)
    assert p.string_constants == ('tab\there "q" \u00e9',)
    assert parse_program(format_program(p)) == p


@pytest.mark.parametrize("src", ALL_SOURCES)
def test_round_trip_bundled(src):
    p = parse_program(src)
    q = parse_program(format_program(p))
    assert q == p
    assert format_program(q) == format_program(p)


@pytest.mark.parametrize("src", ALL_SOURCES)
def test_two_targets_per_app_branch(src):
    p = parse_program(src)
    n = sum(1 for f in p.functions.values() if not f.is_extern for _ in f.branches())
    assert len(enumerate_code_targets(p)) == 2 * n


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_random_programs(seed):
    p = parse_program(random_program(random.Random(seed)))
    assert parse_program(format_program(p)) == p
    n = sum(1 for f in p.functions.values() if not f.is_extern for _ in f.branches())
    assert len(enumerate_code_targets(p)) == 2 * n


def test_var_types_inferred():
    p = parse_program(program_source("thumbnail"))
    main = p.functions["main"]
    assert main.var_types["v2"] == "File[]"
    assert main.var_types["v10"] == "Calendar"
    assert main.var_types["v11"] == "int"
