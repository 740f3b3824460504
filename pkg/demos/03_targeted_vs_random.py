"""Random versus type-targeted mutation on the thumbnail program.

Ten short campaigns per mode; prints how often the 2008 branch was reached
and how the Calendar/File distances evolved in one spoton run.
"""

import statistics
import sys

from typegbf.bench import load_benchmark
from typegbf.fuzzer import Budget, covered, fuzz_campaign

TESTS = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
REPS = 10

bench = load_benchmark("thumbnail")
(target,) = bench.hard_targets

for mode in ("baseline", "spoton"):
    hits = []
    for seed in range(REPS):
        r = fuzz_campaign(bench.harness(), mode, Budget(tests=TESTS), seed, stop_when=covered(bench.hard_targets))
        if target in r.first_cover:
            hits.append(r.first_cover[target])
    med = statistics.median(hits) if hits else None
    print(f"{mode:<9} covered {len(hits)}/{REPS}  median tests to cover: {med}")

r = fuzz_campaign(bench.harness(), "spoton", Budget(tests=2000), seed=0)
print()
print("spoton distances after 2000 tests:")
for t, d in sorted(r.state.distances.items(), key=lambda kv: kv[1]):
    print(f"  {t:<22} {d:g}")
print("mutation kinds:", dict(r.state.mutation_kinds))
