"""Execution indices keep regenerated values in place.

A File draws three calendars in a loop.  Each random draw is keyed by the
(call-site label, invocation count) pairs of the generator stack, so the day
of the second calendar is always [13, 2, 23, 1] no matter how many draws came
before it.
"""

import random

from typegbf.bench import thumbnail
from typegbf.generators import FciEntry, generate

reg = thumbnail.make_registry()
value, fci = generate(reg, "File", rng=random.Random(3))

for e in fci:
    if e.ei[-2] in (thumbnail.AT_DAY, thumbnail.AT_YEAR_OFFSET):
        print(list(e.ei), e.types, e.value)

# shorten the file name: fewer characters are drawn, yet every calendar
# draw keeps its stored value because its execution index is unchanged
name_len = next(i for i, e in enumerate(fci) if e.ei[:2] == (4, 1) and e.ei[2] == 3)
e = fci[name_len]
edited = list(fci)
edited[name_len] = FciEntry(0, e.ei, e.types, e.lo, e.hi)
again, _ = generate(reg, "File", edited, rng=random.Random(99))

print()
print("name before:", repr(value["name"]), " after:", repr(again["name"]))
print("calendars unchanged:", [value[k] == again[k] for k in ("created", "accessed", "modified")])
