"""Coverage-guided campaign loop over generator choice sequences."""

from __future__ import annotations

import random
import re
import statistics
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional

from .analysis import Analysis, UnifiedDistanceMap, analyze
from .generators import GenerationError, GeneratorRegistry, generate
from .interp import DEFAULT_STEP_BUDGET, CoverageSet, Interpreter, TestResult
from .ir import Program, enumerate_code_targets
from .mutation import BASELINE, MODES, SPOTON, STR_OPT, mutate

C_BASE = 20
C_MAX = 100
DEFAULT_P_CONST = 0.5
STEP_SECONDS = 1e-6  # nominal cost of one interpreter step on the deterministic clock


class CampaignError(Exception):
    pass


@dataclass
class Harness:
    """Everything needed to turn a choice sequence into a test result."""

    program: Program
    registry: GeneratorRegistry
    externs: dict = field(default_factory=dict)
    step_budget: int = DEFAULT_STEP_BUDGET
    root_type: Optional[str] = None

    def __post_init__(self):
        if self.root_type is None:
            self.root_type = self.program.input_type
        self.interpreter = Interpreter(self.program, self.externs)


@dataclass(frozen=True)
class Budget:
    tests: Optional[int] = None
    seconds: Optional[float] = None

    @classmethod
    def parse(cls, text: str) -> "Budget":
        m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([st])\s*", text)
        if not m:
            raise ValueError(f"budget must look like 500t or 60s, got {text!r}")
        n, unit = m.groups()
        if unit == "t":
            if "." in n:
                raise ValueError("test budget must be an integer")
            return cls(tests=int(n))
        return cls(seconds=float(n))

    @property
    def deterministic(self) -> bool:
        return self.tests is not None


@dataclass
class CorpusEntry:
    fci: list
    coverage: CoverageSet
    new_coverage: CoverageSet
    discovered_at: int  # test number
    discovered_s: float
    cost: float  # running mean cost of this entry's own test and its children
    runs: int = 1
    result: Optional[TestResult] = None
    seed: bool = False

    def record(self, cost: float) -> None:
        self.runs += 1
        self.cost += (cost - self.cost) / self.runs


@dataclass
class FailureEntry:
    fci: list
    kind: str
    message: str
    found_at: int
    result: Optional[TestResult] = None


@dataclass
class Corpus:
    successes: list = field(default_factory=list)  # CorpusEntry
    failures: list = field(default_factory=list)  # FailureEntry
    strings: tuple = ()
    p_const: float = DEFAULT_P_CONST


@dataclass
class CampaignState:
    total_coverage: CoverageSet
    uncovered: frozenset
    distances: Optional[UnifiedDistanceMap]
    tests: int = 0
    steps: int = 0
    elapsed: float = 0.0
    phases: dict = field(default_factory=lambda: dict.fromkeys(("mutation", "generation", "testing", "handling"), 0.0))
    mutation_kinds: Counter = field(default_factory=Counter)
    generation_errors: int = 0


@dataclass
class CampaignResult:
    corpus: Corpus
    state: CampaignState
    trace: list  # (elapsed, tests, app_cov, total_cov)
    first_cover: dict  # CodeTarget -> test number
    mode: str
    seed: int
    wall_time: float
    setup_time: float
    results: list = field(default_factory=list)  # per-test (fci, value, TestResult) when recording

    @property
    def report(self) -> dict:
        st = self.state
        return {
            "mode": self.mode,
            "seed": self.seed,
            "tests": st.tests,
            "app_coverage": len(st.total_coverage.app),
            "total_coverage": len(st.total_coverage),
            "uncovered": len(st.uncovered),
            "successes": len(self.corpus.successes),
            "failures": len(self.corpus.failures),
            "generation_errors": st.generation_errors,
            "phases": dict(st.phases),
            "wall_time": self.wall_time,
            "mean_generation_time": st.phases["generation"] / st.tests if st.tests else 0.0,
            "mutation_kinds": dict(st.mutation_kinds),
        }


def num_candidates(entry: CorpusEntry, median_cost: float, c_base: int = C_BASE, c_max: int = C_MAX) -> int:
    """Children per corpus entry, scaled down for entries slower than the median."""
    if entry.cost <= 0:
        return c_max
    return max(1, min(c_max, round(c_base * median_cost / entry.cost)))


def _costs(result: TestResult, cost: str) -> float:
    return result.wall_time if cost == "wall" else float(result.steps)


def fuzz_campaign(
    harness: Harness,
    mode: str,
    budget: Budget,
    seed: int,
    *,
    analysis: Optional[Analysis] = None,
    run_analysis: bool = True,
    p_const: float = DEFAULT_P_CONST,
    c_base: int = C_BASE,
    c_max: int = C_MAX,
    cost: str = "steps",
    clock: Optional[str] = None,
    stop_when: Optional[Callable[[CampaignState], bool]] = None,
    record_results: bool = False,
) -> CampaignResult:
    """Run one campaign; ``mode`` is one of baseline, str-opt, spoton.

    With a test-count budget and ``cost="steps"`` the campaign is a pure
    function of its arguments.  ``clock`` selects the time axis of the trace:
    ``"steps"`` (interpreter steps, reproducible) or ``"wall"``; it defaults
    to ``"steps"`` for test-count budgets.
    """
    if mode not in MODES:
        raise CampaignError(f"unknown mode {mode!r}")
    if clock is None:
        clock = "steps" if budget.deterministic else "wall"
    program = harness.program
    t_setup = time.perf_counter()
    if analysis is None and (run_analysis or mode != BASELINE):
        analysis = analyze(program)
    if analysis is not None:
        uncovered = analysis.uncovered
        distances = analysis.distances.copy()
        distances.reads = distances.writes = 0
        strings = tuple(analysis.strings) if mode in (STR_OPT, SPOTON) else ()
    else:
        uncovered = enumerate_code_targets(program)
        distances = None
        strings = ()
    try:
        harness.registry.check_covers(program, harness.root_type)
    except GenerationError as e:
        raise CampaignError(str(e)) from e
    setup_time = time.perf_counter() - t_setup

    mut_rng = random.Random(f"mutate:{seed}")
    gen_rng = random.Random(f"generate:{seed}")
    registry, root, interp = harness.registry, harness.root_type, harness.interpreter
    step_budget = harness.step_budget

    state = CampaignState(CoverageSet(), frozenset(uncovered), distances)
    corpus = Corpus(strings=strings, p_const=p_const)
    trace: list = []
    first_cover: dict = {}
    recorded: list = []
    phases = state.phases
    start = time.perf_counter()

    def now() -> float:
        if clock == "steps":
            return state.steps * STEP_SECONDS
        return time.perf_counter() - start

    def handle(fci: list, value, result: TestResult, parent: CorpusEntry) -> None:
        state.tests += 1
        state.steps += result.steps
        c = _costs(result, cost)
        parent.record(c)
        if record_results:
            recorded.append((fci, value, result))
        if not result.ok:
            corpus.failures.append(FailureEntry(fci, result.failure, result.message, state.tests, result))
            return
        new = result.coverage - state.total_coverage
        if not (new.app or new.extern):
            return
        corpus.successes.append(CorpusEntry(fci, result.coverage, new, state.tests, now(), c, result=result))
        state.total_coverage = state.total_coverage | result.coverage
        if new.app:
            state.uncovered = state.uncovered - new.app
            for k in new.app:
                first_cover[k] = state.tests
        trace.append((now(), state.tests, len(state.total_coverage.app), len(state.total_coverage)))

    def exhausted() -> bool:
        if budget.tests is not None and state.tests >= budget.tests:
            return True
        if budget.seconds is not None and time.perf_counter() - start >= budget.seconds:
            return True
        return stop_when is not None and stop_when(state)

    t0 = time.perf_counter()
    try:
        value, fci = generate(registry, root, (), gen_rng, strings, p_const)
    except GenerationError as e:
        raise CampaignError(f"initial generation failed: {e}") from e
    t1 = time.perf_counter()
    result = interp.run(value, step_budget)
    t2 = time.perf_counter()
    # the initial random input always seeds the corpus
    state.tests, state.steps = 1, result.steps
    if record_results:
        recorded.append((fci, value, result))
    seed_entry = CorpusEntry(fci, result.coverage, CoverageSet(), 1, now(), _costs(result, cost), result=result, seed=True)
    corpus.successes.append(seed_entry)
    if result.ok:
        seed_entry.new_coverage = result.coverage
        state.total_coverage = result.coverage
        state.uncovered = state.uncovered - result.coverage.app
        first_cover.update(dict.fromkeys(result.coverage.app, 1))
    else:
        corpus.failures.append(FailureEntry(fci, result.failure, result.message, 1, result))
    trace.append((now(), state.tests, len(state.total_coverage.app), len(state.total_coverage)))
    phases["generation"] += t1 - t0
    phases["testing"] += t2 - t1
    phases["handling"] += time.perf_counter() - t2

    uses_d = mode == SPOTON
    done = exhausted()
    while not done:
        entries = list(corpus.successes)
        for parent in entries:
            median_cost = statistics.median(e.cost for e in corpus.successes)
            for _ in range(num_candidates(parent, median_cost, c_base, c_max)):
                if exhausted():
                    done = True
                    break
                t0 = time.perf_counter()
                out = mutate(parent.fci, state.uncovered, distances if uses_d else None, mut_rng, mode)
                if uses_d:
                    distances = state.distances = out.distances
                state.mutation_kinds[out.kind] += 1
                t1 = time.perf_counter()
                try:
                    value, fci = generate(registry, root, out.fci, gen_rng, strings, p_const)
                except GenerationError:
                    state.generation_errors += 1
                    phases["mutation"] += t1 - t0
                    phases["generation"] += time.perf_counter() - t1
                    continue
                t2 = time.perf_counter()
                result = interp.run(value, step_budget)
                t3 = time.perf_counter()
                handle(fci, value, result, parent)
                t4 = time.perf_counter()
                phases["mutation"] += t1 - t0
                phases["generation"] += t2 - t1
                phases["testing"] += t3 - t2
                phases["handling"] += t4 - t3
            if done:
                break
        if not done:
            done = exhausted()

    wall = time.perf_counter() - start
    state.elapsed = now()
    last = trace[-1]
    final = (state.elapsed, state.tests, last[2], last[3])
    if final != last:
        trace.append(final)
    return CampaignResult(corpus, state, trace, first_cover, mode, seed, wall, setup_time, recorded)


def covered(targets) -> Callable[[CampaignState], bool]:
    """``stop_when`` predicate: all of ``targets`` are covered."""
    targets = frozenset(targets)
    return lambda st: targets <= st.total_coverage.app


def replay(
    harness: Harness,
    fci: list,
    strings=(),
    p_const: float = DEFAULT_P_CONST,
) -> tuple:
    """Regenerate and rerun a stored choice sequence; returns ``(value, result)``."""
    value, _ = generate(harness.registry, harness.root_type, fci, random.Random(0), strings, p_const)
    return value, harness.interpreter.run(value, harness.step_budget)
