import math
import random
from collections import Counter

import pytest

from typegbf.analysis import UnifiedDistanceMap
from typegbf.generators import FciEntry
from typegbf.mutation import (
    BASELINE,
    HIT_FACTOR,
    MISS_FACTOR,
    RANDOM,
    SPOTON,
    STR_OPT,
    TARGETED_HIT,
    TARGETED_MISS,
    mutate,
    mutate_random,
    mutate_targeted,
    run_length,
    select_type,
)


def fci_of(types_per_entry):
    return [FciEntry(0, (1, i + 1), ts, 0, 1000) for i, ts in enumerate(types_per_entry)]


def test_run_length_is_geometric_half():
    rng = random.Random(0)
    xs = Counter(run_length(rng) for _ in range(40000))
    assert min(xs) == 1
    assert abs(xs[1] / 40000 - 0.5) < 0.01
    assert abs(xs[2] / 40000 - 0.25) < 0.01
    assert abs(sum(k * v for k, v in xs.items()) / 40000 - 2.0) < 0.03


def test_select_type_inverse_distance():
    d = UnifiedDistanceMap({"A": 1.0, "B": 3.0})
    rng = random.Random(3)
    n = 12000
    a = sum(select_type(d, rng) == "A" for _ in range(n))
    p = 0.75
    assert abs(a - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def test_select_type_empty():
    with pytest.raises(ValueError):
        select_type(UnifiedDistanceMap({}), random.Random(0))


def test_targeted_hit_touches_only_that_type():
    fci = fci_of([("A",), ("B", "A"), ("C",), ("B", "A"), ("C",)])
    d = UnifiedDistanceMap({"B": 4.0, "C": 2.0})
    for seed in range(50):
        out = mutate_targeted(fci, d, random.Random(seed), t="B")
        assert out.kind == TARGETED_HIT
        assert out.distances["B"] == pytest.approx(3.0)
        assert out.distances["C"] == 2.0
        assert d["B"] == 4.0  # the input map is not mutated
        assert "B" in fci[out.start].types
        changed = [i for i, (x, y) in enumerate(zip(fci, out.fci)) if x != y]
        assert all(out.start <= i < out.start + out.length for i in changed)
        assert [e.ei for e in out.fci] == [e.ei for e in fci]


def test_targeted_miss_leaves_fci_unchanged():
    fci = fci_of([("A",), ("A",)])
    d = UnifiedDistanceMap({"Z": 3.0})
    out = mutate_targeted(fci, d, random.Random(0), t="Z")
    assert out.kind == TARGETED_MISS
    assert out.fci == fci
    assert out.distances["Z"] == pytest.approx(4.0)


def test_scripted_hits_and_misses():
    fci = fci_of([("T",)])
    d = UnifiedDistanceMap({"T": 16.0, "Absent": 1.0})
    rng = random.Random(0)
    for hit in (True, False, True, False, True):
        if hit:
            d = mutate_targeted(fci, d, rng, t="T").distances
        else:
            d = mutate_targeted([], d, rng, t="T").distances
    assert d["T"] == pytest.approx(16 * HIT_FACTOR ** 3 * MISS_FACTOR ** 2, rel=1e-9)


def test_distance_floor():
    fci = fci_of([("T",)])
    d = UnifiedDistanceMap({"T": 1.0})
    rng = random.Random(0)
    for _ in range(40):
        d = mutate_targeted(fci, d, rng, t="T").distances
    assert d["T"] == 0.25


def test_random_mutation_keeps_shape():
    fci = fci_of([("A",)] * 30)
    rng = random.Random(9)
    for _ in range(200):
        out = mutate_random(fci, rng)
        assert len(out) == len(fci)
        assert all(0 <= e.value <= 1000 and e.ei == f.ei for e, f in zip(out, fci))


def test_mutate_empty_fci():
    out = mutate([], frozenset({"k"}), None, random.Random(0), BASELINE)
    assert out.fci == [] and out.kind == RANDOM


@pytest.mark.parametrize("mode", [BASELINE, STR_OPT])
def test_non_targeted_modes_never_read_distances(mode):
    d = UnifiedDistanceMap({"A": 1.0})
    d.reads = d.writes = 0
    rng = random.Random(0)
    for _ in range(100):
        out = mutate(fci_of([("A",)] * 4), frozenset({"k"}), d, rng, mode)
        assert out.kind == RANDOM
    assert (d.reads, d.writes) == (0, 0)


def test_spoton_mixes_half_and_half():
    d = UnifiedDistanceMap({"A": 1.0})
    rng = random.Random(4)
    kinds = Counter()
    for _ in range(4000):
        out = mutate(fci_of([("A",)] * 4), frozenset({"k"}), d, rng, SPOTON)
        kinds[out.kind] += 1
        d = out.distances
    assert kinds[RANDOM] + kinds[TARGETED_HIT] == 4000
    assert abs(kinds[RANDOM] - 2000) < 3 * math.sqrt(1000)


def test_spoton_falls_back_once_everything_is_covered():
    d = UnifiedDistanceMap({"A": 1.0})
    rng = random.Random(0)
    kinds = {mutate(fci_of([("A",)]), frozenset(), d, rng, SPOTON).kind for _ in range(50)}
    assert kinds == {RANDOM}


def test_unknown_mode():
    with pytest.raises(ValueError):
        mutate([], frozenset(), None, random.Random(0), "afl")
