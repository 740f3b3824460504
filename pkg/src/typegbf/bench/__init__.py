"""Bundled benchmark programs with their generators, extern stubs and witnesses.

``load_benchmark("thumbnail")`` (or the CLI spelling ``bench:thumbnail``)
returns a :class:`Benchmark`.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from ..fuzzer import Harness
from ..generators import GeneratorRegistry
from ..interp import DEFAULT_STEP_BUDGET
from ..ir import CodeTarget, Program, parse_program

BENCHMARKS = {
    "thumbnail": "thumbnail",
    "csv-loader": "csv_loader",
    "nikoshen": "nikoshen",
}


@dataclass
class Benchmark:
    name: str
    source: str
    program: Program
    registry: GeneratorRegistry
    make_externs: Callable[[], dict]
    hard_targets: tuple = ()
    witnesses: dict = field(default_factory=dict)  # CodeTarget -> input value

    def harness(self, step_budget: int = DEFAULT_STEP_BUDGET) -> Harness:
        return Harness(self.program, self.registry, self.make_externs(), step_budget)


def program_source(module: str) -> str:
    return resources.files(__name__).joinpath("programs", f"{module}.ir").read_text()


def load_benchmark(name: str) -> Benchmark:
    if name.startswith("bench:"):
        name = name[len("bench:"):]
    module = BENCHMARKS.get(name)
    if module is None:
        raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
    mod = importlib.import_module(f"{__name__}.{module}")
    src = program_source(module)
    program = parse_program(src)
    return Benchmark(
        name=name,
        source=src,
        program=program,
        registry=mod.make_registry(),
        make_externs=mod.make_externs,
        hard_targets=tuple(mod.HARD_TARGETS),
        witnesses=mod.witnesses(),
    )


__all__ = ["BENCHMARKS", "Benchmark", "CodeTarget", "load_benchmark", "program_source"]
