"""The constant string table on the S3 loader.

Only the key "uploads/grades.csv" is parsed.  Fresh random strings never
hit it; with the harvested string table it is found within a few tests.
"""

from typegbf.analysis import analyze
from typegbf.bench import load_benchmark
from typegbf.fuzzer import Budget, covered, fuzz_campaign

bench = load_benchmark("csv-loader")
print("harvested strings:", analyze(bench.program).strings)

for mode in ("baseline", "str-opt"):
    r = fuzz_campaign(bench.harness(), mode, Budget(tests=5000), seed=0, stop_when=covered(bench.hard_targets))
    k = bench.hard_targets[0]
    print(f"{mode:<8} {k}: first covered at test {r.first_cover.get(k)}  ({r.state.tests} tests run)")
