"""``fuzz`` command-line entry point.

Exit status: 0 on completion, 2 on a configuration error, 3 when the
program fails to parse or analyze.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import analyze, format_report
from .generators import GenerationError
from .fuzzer import CampaignError
from .interp import DEFAULT_STEP_BUDGET
from .ir import IRError
from .report import CampaignConfig, ConfigError, load_target, run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ANALYSIS = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fuzz", description="Type-guided generator-based fuzzing of mini-IR programs.")
    p.add_argument("--program", required=True, help="path to an .ir file, or bench:<name>")
    p.add_argument("--mode", help="baseline, str-opt or spoton; comma-separate to compare modes")
    p.add_argument("--budget", help="per-run budget: <n>t tests or <n>s seconds")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="base seed; repetition i uses seed + i")
    p.add_argument("--out", help="output directory for CSVs, corpora and summary.json")
    p.add_argument("--dump-analysis", action="store_true", help="print the static analysis report")
    p.add_argument("--p-const", type=float, default=0.5, help="probability of drawing a string from the constant table")
    p.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET, help="interpreter steps per test")
    p.add_argument("--no-corpus", action="store_true", help="skip writing corpus files")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        target = load_target(args.program)
    except ConfigError as e:
        print(f"fuzz: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except IRError as e:
        print(f"fuzz: {args.program}: {e}", file=sys.stderr)
        return EXIT_ANALYSIS
    try:
        analysis = analyze(target.program)
    except Exception as e:  # analysis is total on checked programs; report anything else as such
        print(f"fuzz: analysis failed: {e}", file=sys.stderr)
        return EXIT_ANALYSIS

    if args.dump_analysis:
        sys.stdout.write(format_report(analysis))
        if args.mode is None:
            return EXIT_OK

    missing = [flag for flag, v in (("--mode", args.mode), ("--budget", args.budget), ("--out", args.out)) if v is None]
    if missing:
        print(f"fuzz: missing {', '.join(missing)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = CampaignConfig(
            program=args.program,
            modes=args.mode,
            budget=args.budget,
            reps=args.reps,
            seed=args.seed,
            out=args.out,
            step_budget=args.step_budget,
            p_const=args.p_const,
            save_corpus=not args.no_corpus,
        )
        target.registry.check_covers(target.program, target.program.input_type)
    except (ConfigError, GenerationError) as e:
        print(f"fuzz: {e}", file=sys.stderr)
        return EXIT_CONFIG

    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        suite = run_suite(config, target, log=log)
    except CampaignError as e:
        print(f"fuzz: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"fuzz: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        brief = {m: {k: v[k] for k in ("mean_app_coverage", "final_app_coverage", "hard_targets")}
                 for m, v in suite.summary["modes"].items()}
        print(json.dumps(brief, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
