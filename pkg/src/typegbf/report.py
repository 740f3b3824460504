"""Repeated campaigns, per-run CSV traces and cross-mode summaries."""

from __future__ import annotations

import csv
import importlib.util
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import mannwhitneyu

from .analysis import analyze, analysis_report
from .fuzzer import Budget, CampaignResult, Harness, fuzz_campaign
from .generators import GeneratorRegistry, structural_registry
from .interp import DEFAULT_STEP_BUDGET
from .ir import CodeTarget, Program, parse_program
from .mutation import MODES
from .storage import save_corpus

CSV_HEADER = ("elapsed_s", "tests", "app_cov", "total_cov")
SIGNIFICANCE = 0.05
CURVE_POINTS = 50


class ConfigError(Exception):
    pass


@dataclass
class Target:
    """A program plus everything needed to fuzz it."""

    name: str
    program: Program
    registry: GeneratorRegistry
    make_externs: object = dict
    hard_targets: tuple = ()

    def harness(self, step_budget: int = DEFAULT_STEP_BUDGET) -> Harness:
        return Harness(self.program, self.registry, self.make_externs(), step_budget)


def load_target(ref: str) -> Target:
    """``bench:<name>`` or a path to an ``.ir`` file.

    For a file, generators and stubs come from a sibling ``<stem>.py``
    defining ``make_registry()`` and optionally ``make_externs()``; without
    one, structural generators are derived from the record declarations.
    Raises ConfigError for a missing file or unknown benchmark; IR errors
    propagate.
    """
    if ref.startswith("bench:"):
        from .bench import load_benchmark

        try:
            b = load_benchmark(ref)
        except KeyError as e:
            raise ConfigError(str(e.args[0])) from None
        return Target(b.name, b.program, b.registry, b.make_externs, b.hard_targets)
    path = Path(ref)
    if not path.is_file():
        raise ConfigError(f"program file not found: {ref}")
    program = parse_program(path.read_text())
    sidecar = path.with_suffix(".py")
    if not sidecar.is_file():
        return Target(path.stem, program, structural_registry(program))
    mod_spec = importlib.util.spec_from_file_location(f"_fuzz_generators_{path.stem}", sidecar)
    mod = importlib.util.module_from_spec(mod_spec)
    try:
        mod_spec.loader.exec_module(mod)
    except Exception as e:
        raise ConfigError(f"{sidecar}: {type(e).__name__}: {e}") from e
    if not hasattr(mod, "make_registry"):
        raise ConfigError(f"{sidecar} does not define make_registry()")
    return Target(
        path.stem,
        program,
        mod.make_registry(),
        getattr(mod, "make_externs", dict),
        tuple(getattr(mod, "HARD_TARGETS", ())),
    )


@dataclass
class CampaignConfig:
    program: str
    modes: tuple
    budget: Budget
    reps: int = 1
    seed: int = 0
    out: Optional[str] = None
    step_budget: int = DEFAULT_STEP_BUDGET
    p_const: float = 0.5
    save_corpus: bool = True

    def __post_init__(self):
        if isinstance(self.modes, str):
            self.modes = tuple(m.strip() for m in self.modes.split(","))
        if isinstance(self.budget, str):
            try:
                self.budget = Budget.parse(self.budget)
            except ValueError as e:
                raise ConfigError(str(e)) from None
        for m in self.modes:
            if m not in MODES:
                raise ConfigError(f"unknown mode {m!r}; choose from {', '.join(MODES)}")
        if len(set(self.modes)) != len(self.modes):
            raise ConfigError("modes must be distinct")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.step_budget < 1:
            raise ConfigError("step budget must be positive")
        if not 0.0 <= self.p_const <= 1.0:
            raise ConfigError("p-const must lie in [0, 1]")

    def seeds(self) -> list:
        return [self.seed + i for i in range(self.reps)]


@dataclass
class RunRecord:
    mode: str
    rep: int
    seed: int
    series: list  # (elapsed_s, tests, app_cov, total_cov)
    covered: frozenset  # CodeTarget
    first_cover: dict  # CodeTarget -> test number
    phases: dict
    mean_generation_time: float
    tests: int
    failures: int

    @classmethod
    def from_campaign(cls, rep: int, r: CampaignResult) -> "RunRecord":
        return cls(
            mode=r.mode,
            rep=rep,
            seed=r.seed,
            series=list(r.trace),
            covered=r.state.total_coverage.app,
            first_cover=dict(r.first_cover),
            phases=dict(r.state.phases),
            mean_generation_time=r.report["mean_generation_time"],
            tests=r.state.tests,
            failures=len(r.corpus.failures),
        )

    @property
    def app_coverage(self) -> int:
        return len(self.covered)

    def app_cov_at(self, tests: int) -> int:
        """Application coverage after ``tests`` tests (step function of the trace)."""
        cov = 0
        for _, t, app, _ in self.series:
            if t > tests:
                break
            cov = app
        return cov


def write_csv(record: RunRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for elapsed, tests, app, total in record.series:
            w.writerow((f"{elapsed:.6f}", tests, app, total))


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    return [(float(e), int(t), int(a), int(c)) for e, t, a, c in rows[1:]]


def median_curve(records: list, points: int = CURVE_POINTS) -> list:
    """Median application coverage across runs at evenly spaced test counts."""
    if not records:
        return []
    horizon = max(r.tests for r in records)
    grid = sorted({int(round(x)) for x in np.linspace(1, max(horizon, 1), points)})
    values = np.array([[r.app_cov_at(t) for t in grid] for r in records], dtype=float)
    med = np.median(values, axis=0)
    return [[t, float(m)] for t, m in zip(grid, med)]


def partition(a: frozenset, b: frozenset) -> tuple:
    """``(common, only_a, only_b)`` sizes of two covered-target sets."""
    return len(a & b), len(a - b), len(b - a)


def compare_modes(recs_a: list, recs_b: list) -> dict:
    rows = [partition(ra.covered, rb.covered) for ra, rb in zip(recs_a, recs_b)]
    cov_a = [r.app_coverage for r in recs_a]
    cov_b = [r.app_coverage for r in recs_b]
    if len(set(cov_a) | set(cov_b)) <= 1:
        p = 1.0  # identical samples carry no evidence of a difference
    else:
        p = float(mannwhitneyu(cov_a, cov_b, alternative="two-sided").pvalue)
    mean = [float(np.mean([row[i] for row in rows])) for i in range(3)] if rows else [0.0, 0.0, 0.0]
    return {
        "per_rep": [list(r) for r in rows],
        "mean_common": mean[0],
        "mean_only_a": mean[1],
        "mean_only_b": mean[2],
        "p_value": p,
        "significant": p < SIGNIFICANCE,
    }


def target_stats(records: list, target: CodeTarget) -> dict:
    times = [r.first_cover[target] for r in records if target in r.first_cover]
    return {
        "covered_reps": len(times),
        "median_tests_to_cover": statistics.median(times) if times else None,
    }


def summarize(config: CampaignConfig, target: Target, records: dict, analysis=None) -> dict:
    modes = {}
    for mode, recs in records.items():
        covs = [r.app_coverage for r in recs]
        modes[mode] = {
            "reps": len(recs),
            "seeds": [r.seed for r in recs],
            "final_app_coverage": covs,
            "mean_app_coverage": float(np.mean(covs)),
            "median_app_coverage": float(np.median(covs)),
            "mean_generation_time": float(np.mean([r.mean_generation_time for r in recs])),
            "median_curve": median_curve(recs),
            "hard_targets": {str(k): target_stats(recs, k) for k in target.hard_targets},
        }
    out = {
        "program": config.program,
        "budget": {"tests": config.budget.tests, "seconds": config.budget.seconds},
        "code_targets": len(analysis.gamma) if analysis is not None else None,
        "modes": modes,
        "comparisons": {},
    }
    names = list(records)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            out["comparisons"][f"{a}_vs_{b}"] = compare_modes(records[a], records[b])
    return out


@dataclass
class SuiteResult:
    records: dict = field(default_factory=dict)  # mode -> [RunRecord]
    summary: dict = field(default_factory=dict)


def run_suite(config: CampaignConfig, target: Optional[Target] = None, log=None) -> SuiteResult:
    """Run every mode for ``config.reps`` repetitions and write CSVs plus summary.json."""
    if target is None:
        target = load_target(config.program)
    analysis = analyze(target.program)
    out = Path(config.out) if config.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    records: dict = {}
    for mode in config.modes:
        recs = []
        for rep, seed in enumerate(config.seeds()):
            harness = target.harness(config.step_budget)
            result = fuzz_campaign(
                harness,
                mode,
                config.budget,
                seed,
                analysis=analysis if mode != "baseline" else None,
                run_analysis=mode != "baseline",
                p_const=config.p_const,
            )
            rec = RunRecord.from_campaign(rep, result)
            recs.append(rec)
            if out is not None:
                d = out / mode
                d.mkdir(exist_ok=True)
                write_csv(rec, d / f"rep_{rep:03d}.csv")
                if config.save_corpus:
                    save_corpus(result.corpus, d / f"rep_{rep:03d}_corpus", target.program, target.registry)
            if log is not None:
                log(f"{mode} rep {rep} seed {seed}: {rec.tests} tests, app coverage {rec.app_coverage}")
        records[mode] = recs
    summary = summarize(config, target, records, analysis)
    if out is not None:
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out / "analysis.json").write_text(json.dumps(analysis_report(analysis), indent=2) + "\n")
    return SuiteResult(records, summary)
