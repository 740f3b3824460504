"""Random and type-targeted mutation of choice sequences."""

from __future__ import annotations

import random
from typing import NamedTuple, Optional

from .analysis import UnifiedDistanceMap
from .generators import FciEntry

BASELINE = "baseline"
STR_OPT = "str-opt"
SPOTON = "spoton"
MODES = (BASELINE, STR_OPT, SPOTON)

HIT_FACTOR = 3 / 4
MISS_FACTOR = 4 / 3

RANDOM = "random"
TARGETED_HIT = "targeted-hit"
TARGETED_MISS = "targeted-miss"


class MutationOutcome(NamedTuple):
    fci: list
    distances: Optional[UnifiedDistanceMap]
    kind: str
    type: Optional[str] = None
    start: int = -1
    length: int = 0


def run_length(rng: random.Random, p: float = 0.5) -> int:
    """Geometric on {1, 2, ...} with success probability ``p``."""
    n = 1
    while rng.random() >= p:
        n += 1
    return n


def _reroll(fci: list, start: int, rng: random.Random) -> tuple:
    out = list(fci)
    n = min(run_length(rng), len(out) - start)
    rand = rng.random
    for i in range(start, start + n):
        e = out[i]
        out[i] = FciEntry(e.lo + int(rand() * (e.hi - e.lo + 1)), e.ei, e.types, e.lo, e.hi)
    return out, n


def mutate_random(fci: list, rng: random.Random) -> list:
    return mutate_random_outcome(fci, rng).fci


def mutate_random_outcome(fci: list, rng: random.Random, distances=None) -> MutationOutcome:
    if not fci:
        return MutationOutcome(list(fci), distances, RANDOM)
    start = int(rng.random() * len(fci))
    out, n = _reroll(fci, start, rng)
    return MutationOutcome(out, distances, RANDOM, None, start, n)


def select_type(d: UnifiedDistanceMap, rng: random.Random) -> str:
    """Sample a type with probability proportional to 1/distance."""
    items = d.items()
    if not items:
        raise ValueError("select_type on an empty distance map")
    weights = [1.0 / dist for _, dist in items]
    x = rng.random() * sum(weights)
    for (t, _), w in zip(items, weights):
        x -= w
        if x < 0:
            return t
    return items[-1][0]


def mutate_targeted(fci: list, d: UnifiedDistanceMap, rng: random.Random, t: Optional[str] = None) -> MutationOutcome:
    """Mutate a run starting at an entry generated under type ``t``.

    ``t`` defaults to a draw from :func:`select_type`.  A hit shrinks the
    type's distance by 3/4, a miss grows it by 4/3.
    """
    if t is None:
        t = select_type(d, rng)
    d_new = d.copy()
    matches = [i for i, e in enumerate(fci) if t in e.types]
    if not matches:
        d_new[t] = d[t] * MISS_FACTOR
        return MutationOutcome(list(fci), d_new, TARGETED_MISS, t)
    d_new[t] = d[t] * HIT_FACTOR
    start = matches[int(rng.random() * len(matches))]
    out, n = _reroll(fci, start, rng)
    return MutationOutcome(out, d_new, TARGETED_HIT, t, start, n)


def mutate(fci: list, uncovered, d: Optional[UnifiedDistanceMap], rng: random.Random, mode: str) -> MutationOutcome:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode != SPOTON or not uncovered or d is None or len(d) == 0:
        return mutate_random_outcome(fci, rng, d)
    if rng.random() < 0.5:
        return mutate_targeted(fci, d, rng)
    return mutate_random_outcome(fci, rng, d)
