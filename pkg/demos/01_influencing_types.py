"""Which input types sit closest to a hard branch?

Runs the static analysis on the bundled thumbnail program and prints the
per-target influencing types and the unified distance table.
"""

from typegbf.analysis import analyze, format_report
from typegbf.bench import load_benchmark
from typegbf.ir import CodeTarget

bench = load_benchmark("thumbnail")
a = analyze(bench.program)

# the year check in main: Calendar is two hops away, File six
year_branch = CodeTarget("main", 20, "then")
for t, d in a.gamma[year_branch]:
    print(f"{year_branch}  {t:<22} {d}")

print()
print(format_report(a))
