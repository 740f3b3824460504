"""Type-guided generator-based fuzzing over a small typed IR."""

from .analysis import Analysis, UnifiedDistanceMap, analyze, build_dependency_graph, collect_influencing_types, unify_types
from .fuzzer import Budget, CampaignResult, Harness, fuzz_campaign, replay
from .generators import FciEntry, GenerationError, GeneratorRegistry, Session, generate
from .interp import CoverageSet, Interpreter, Record, TestResult
from .ir import CodeTarget, IRError, Program, enumerate_code_targets, format_program, parse_program
from .mutation import BASELINE, MODES, SPOTON, STR_OPT, mutate, mutate_targeted, select_type

__version__ = "0.1.0"
