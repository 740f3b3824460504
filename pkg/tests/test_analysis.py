import random

import pytest
from hypothesis import given, settings, strategies as st

from typegbf.analysis import (
    D_MAX,
    D_MIN,
    InfluencingType,
    UnifiedDistanceMap,
    analysis_report,
    analyze,
    build_dependency_graph,
    collect_constant_strings,
    collect_influencing_types,
    farg,
    format_report,
    ret,
    unify_types,
    var,
)
from typegbf.bench import program_source
from typegbf.ir import CodeTarget, enumerate_code_targets, parse_program

from oracle import oracle_edges, oracle_influencing
from randprog import random_program


def album():
    return parse_program(program_source("album"))


def test_album_check_edges():
    g = build_dependency_graph(album())
    c = "check"
    expected = {
        (var(c, "v17"), var(c, "v10")),
        (var(c, "v17"), var(c, "v26")),
        (var(c, "v19"), var(c, "v17")),
        (var(c, "v21"), var(c, "v19")),
        (farg("yearTaken", 0), var(c, "v19")),
        (var(c, "v21"), ret("yearTaken")),
    }
    line12 = {e for e in g.edges if any(n.function == c and n.kind == "var" and n.key in ("v17", "v19", "v21") for n in e[:1])}
    line12 |= {e for e in g.edges if e[0] == farg("yearTaken", 0)}
    assert line12 == expected
    # the helper's own edges are present, the extern toPath contributes none
    assert (ret("yearTaken"), var("yearTaken", "v5")) in g.edges
    assert not any(n.function in ("toPath", "readAttributes") for e in g.edges for n in e)


def test_straight_line_return():
    src = "fn main(v9: int) -> int {\n v1 = const 5\n return v1\n}\n"
    p = parse_program(src)
    g = build_dependency_graph(p)
    assert g.edges - {(var("main", "v9"), farg("main", 0))} == {(ret("main"), var("main", "v1"))}


def test_recursive_function_visited_once():
    src = """fn main(v1: int) -> void {
    v2 = call rec v1
    return
}
fn rec(v1: int) -> int {
    v2 = const 1
    v3 = sub v1 v2
    v4 = call rec v3
    return v4
}
"""
    g = build_dependency_graph(parse_program(src))
    assert g.analyzed == ["main", "rec"]
    r = "rec"
    rec_edges = {e for e in g.edges if e[0].function == r or e[1].function == r}
    assert rec_edges == {
        (var(r, "v1"), farg(r, 0)),
        (var(r, "v3"), var(r, "v1")),
        (var(r, "v3"), var(r, "v2")),
        (var(r, "v4"), var(r, "v3")),
        (farg(r, 0), var(r, "v3")),
        (var(r, "v4"), ret(r)),
        (ret(r), var(r, "v4")),
        (farg(r, 0), var("main", "v1")),
        (var("main", "v2"), ret(r)),
    }


def test_every_edge_endpoint_is_node():
    for m in ("thumbnail", "csv_loader", "nikoshen", "album"):
        g = build_dependency_graph(parse_program(program_source(m)))
        for u, d in g.edges:
            assert u in g.nodes and d in g.nodes


def test_constant_branch_has_no_influencing_types():
    src = "fn main(v1: int) -> void {\n v2 = const 1\n v3 = const 2\n if eq v2 v3 then @a else @a\n@a:\n return\n}\n"
    p = parse_program(src)
    g = build_dependency_graph(p)
    assert collect_influencing_types(g, p, CodeTarget("main", 3, "then")) == []


def test_record_field_chain():
    src = """record Box { n: int }
fn main(v1: Box) -> void {
    v2 = field v1.n
    v3 = const 4
    if eq v2 v3 then @a else @a
@a:
    return
}
"""
    p = parse_program(src)
    g = build_dependency_graph(p)
    assert collect_influencing_types(g, p, CodeTarget("main", 3, "else")) == [InfluencingType("Box", 2)]


def test_thumbnail_calendar_closer_than_file():
    p = parse_program(program_source("thumbnail"))
    a = analyze(p)
    types = dict(a.gamma[CodeTarget("main", 20, "then")])
    assert types["Calendar"] < types["File"]
    assert types == {"Calendar": 2, "FileTime": 3, "BasicFileAttributes": 4, "Path": 5, "File": 6, "File[]": 7, "Folder": 8}
    assert len(a.uncovered) == 2 * 3


def test_album_two_targets_share_list():
    a = analyze(album())
    assert len(a.gamma) == 2
    then, other = a.gamma.values()
    assert then == other and then


def test_no_branch_program_is_empty():
    a = analyze(parse_program("fn main(x: int) -> void { return }"))
    assert a.gamma == {} and a.uncovered == frozenset() and len(a.distances) == 0


def test_unify_single_target():
    assert unify_types({"k1": [InfluencingType("T", 3)]}) == {"T": 3.0}


def test_unify_prefers_larger_target():
    gamma = {
        "k1": [InfluencingType("U", 1), InfluencingType("T", 5)],
        "k2": [InfluencingType("U", 1), InfluencingType("T", 2), InfluencingType("W", 4)],
    }
    d = unify_types(gamma)
    assert d["T"] == 2.0
    gamma["k2"] = [InfluencingType("U", 1), InfluencingType("T", 9), InfluencingType("W", 4)]
    assert unify_types(gamma)["T"] == 9.0


def test_unify_tie_breaks_on_smaller_distance():
    a = [InfluencingType("T", 4)]
    b = [InfluencingType("T", 6)]
    assert unify_types({"x": a, "y": b})["T"] == 4.0
    assert unify_types({"x": b, "y": a})["T"] == 4.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.tuples(st.sampled_from("ABCDE"), st.integers(1, 20)), max_size=5), min_size=1, max_size=6), st.randoms())
def test_unify_order_independent(lists, rnd):
    gamma = {}
    for i, lst in enumerate(lists):
        best = {}
        for t, d in lst:
            best[t] = min(d, best.get(t, d))
        gamma[f"k{i}"] = [InfluencingType(t, d) for t, d in sorted(best.items(), key=lambda kv: kv[1])]
    keys = list(gamma)
    rnd.shuffle(keys)
    shuffled = {k: gamma[k] for k in keys}
    assert unify_types(gamma).snapshot() == unify_types(shuffled).snapshot()


def test_clamp_applies():
    d = unify_types({"k": [InfluencingType("Far", 5000)]})
    assert d["Far"] == D_MAX
    d["Far"] = 0.01
    assert d["Far"] == D_MIN


def test_distance_map_counters():
    d = UnifiedDistanceMap({"A": 1.0})
    assert (d.reads, d.writes) == (0, 0)
    d.snapshot()
    assert (d.reads, d.writes) == (0, 0)
    _ = d["A"]
    d["A"] = 2.0
    d.items()
    assert (d.reads, d.writes) == (2, 1)


def test_strings_reachable_only():
    src = """fn main(v1: int) -> void {
    call f v1
    return
}
fn f(v1: int) -> void {
    v2 = str "grades.csv"
    return
}
fn g(v1: int) -> void {
    v2 = str "x"
    return
}
"""
    assert collect_constant_strings(parse_program(src)) == ["grades.csv"]


def test_strings_deduplicated_and_extern_excluded():
    src = """fn extern lib(v1: int) -> void {
    v2 = str "library"
    return
}
fn main(v1: int) -> void {
    v2 = str "a"
    call f v1
    call lib v1
    return
}
fn f(v1: int) -> void {
    v2 = str "a"
    v3 = str "b"
    return
}
"""
    assert collect_constant_strings(parse_program(src)) == ["a", "b"]


def test_no_strings():
    a = analyze(album())
    assert a.strings == []
    assert 'strings: []' in format_report(a)


def test_report_is_stable():
    p = parse_program(program_source("thumbnail"))
    assert format_report(analyze(p)) == format_report(analyze(parse_program(program_source("thumbnail"))))
    rep = analysis_report(analyze(p))
    order = list(rep["distances"])
    assert order.index("Calendar") < order.index("File")


def test_extern_variables_never_influence():
    src = """record R { n: int }
fn extern lib(v1: R) -> int {
    v2 = field v1.n
    return v2
}
fn main(v1: R) -> void {
    v2 = call lib v1
    v3 = const 0
    if eq v2 v3 then @a else @a
@a:
    return
}
"""
    p = parse_program(src)
    a = analyze(p)
    g = a.graph
    assert not any(n.function == "lib" for e in g.edges for n in e)
    assert a.gamma[CodeTarget("main", 3, "then")] == [InfluencingType("R", 2)]


def _add_orphan(src: str) -> str:
    return src + """
fn zzOrphan(v1: int) -> void {
    v2 = str "never"
    v3 = const 1
    if eq v1 v3 then @a else @a
@a:
    return
}
"""


@pytest.mark.parametrize("module", ["thumbnail", "csv_loader", "nikoshen", "album"])
def test_unreachable_function_changes_nothing(module):
    src = program_source(module)
    a, b = analyze(parse_program(src)), analyze(parse_program(_add_orphan(src)))
    assert a.strings == b.strings
    for k, v in a.gamma.items():
        assert b.gamma[k] == v
    assert a.distances == b.distances


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_matches_bruteforce_oracle(seed):
    p = parse_program(random_program(random.Random(seed)))
    g = build_dependency_graph(p)
    assert g.edges == oracle_edges(p)
    for k in enumerate_code_targets(p):
        got = collect_influencing_types(g, p, k)
        assert {t: d for t, d in got} == oracle_influencing(p, k.function, k.branch_label)
        assert [d for _, d in got] == sorted(d for _, d in got)
        assert len({t for t, _ in got}) == len(got)
