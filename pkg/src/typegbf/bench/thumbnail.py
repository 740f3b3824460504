"""Thumbnail mosaic over a folder of three files.

Each ``File`` draws three calendars in a loop (created, accessed, modified);
only the modified year decides whether a thumbnail is taken.
"""

from __future__ import annotations

from ..generators import GeneratorRegistry, Session
from ..interp import Record
from ..ir import CodeTarget

FILES_PER_FOLDER = 3
# 3 x (name + 256 content + 12 calendar) draws: all calendar draws stay
# under 5% of a choice sequence, the year-deciding ones under 1%.
CONTENT_SIZE = 256
TARGET_YEAR = 2008
# Years are drawn as REFERENCE_YEAR -/+ Geometric(1/5); the subtract
# direction is taken 3/4 of the time, so a fresh calendar lands on 2008 with
# probability 0.75 * 0.2 * 0.8 ** (REFERENCE_YEAR - 2008).  The reference
# year sets how rare the branch is; 2030 leaves a 50,000-test random
# campaign covering it in roughly a third of runs.
REFERENCE_YEAR = 2030
YEAR_STEP_P = 0.2
FUTURE_P = 0.25

HARD_TARGETS = (CodeTarget("main", 20, "then"),)

# call-site labels
AT_FILE = 3
AT_NAME = 4
AT_CONTENT = 6
AT_CALENDAR = 13
AT_DAY = 23
AT_MONTH = 24
AT_YEAR_OFFSET = 25
AT_YEAR_DIRECTION = 26


def gen_folder(s: Session) -> Record:
    return Record("Folder", {"files": [s.gen("File", at=AT_FILE) for _ in range(FILES_PER_FOLDER)]})


def gen_file(s: Session) -> Record:
    name = s.string(at=AT_NAME)
    content = s.choices(0, 255, CONTENT_SIZE, at=AT_CONTENT)
    dates = []
    while len(dates) < 3:
        dates.append(s.gen("Calendar", at=AT_CALENDAR))
    created, accessed, modified = dates
    return Record("File", {
        "name": name,
        "content": content,
        "created": created,
        "accessed": accessed,
        "modified": modified,
    })


def gen_calendar(s: Session) -> Record:
    day = s.choice(0, 30, at=AT_DAY) + 1
    month = s.choice(0, 11, at=AT_MONTH) + 1
    offset = s.geometric(YEAR_STEP_P, at=AT_YEAR_OFFSET)
    if s.bernoulli(FUTURE_P, at=AT_YEAR_DIRECTION):
        year = REFERENCE_YEAR + offset
    else:
        year = REFERENCE_YEAR - offset
    return Record("Calendar", {"day": day, "month": month, "year": year})


def make_registry() -> GeneratorRegistry:
    reg = GeneratorRegistry("thumbnail")
    reg.register("Folder", gen_folder)
    reg.register("File", gen_file)
    reg.register("Calendar", gen_calendar)
    return reg


def make_externs() -> dict:
    def to_path(ctx, f):
        return Record("Path", {"file": f})

    def read_attributes(ctx, path):
        f = path.fields["file"]
        size = len(f.fields["content"])
        ctx.cover("empty" if size == 0 else "sized")
        return Record("BasicFileAttributes", {
            "lastModified": Record("FileTime", {"calendar": f.fields["modified"]}),
            "size": size,
        })

    def last_modified_time(ctx, attrs):
        return attrs.fields["lastModified"]

    def to_calendar(ctx, ft):
        cal = ft.fields["calendar"]
        # lenient calendars roll day 31 of a short month into the next one
        if cal.fields["day"] > _days_in_month(cal.fields["month"], cal.fields["year"]):
            ctx.cover("rollover")
        return cal

    def add_thumbnail(ctx, f):
        thumbs = ctx.state.setdefault("thumbnails", [])
        thumbs.append(f.fields["name"])
        content = f.fields["content"]
        ctx.cover("jpeg-magic" if content[:2] == [0xFF, 0xD8] else "raw")

    def thumbnail_count(ctx):
        return len(ctx.state.get("thumbnails", ()))

    def regroup(ctx, n):
        ctx.cover(f"mosaic-{min(n, FILES_PER_FOLDER)}")

    def convert_to_jpeg(ctx, f):
        ctx.cover("convert")

    return {
        "toPath": to_path,
        "readAttributes": read_attributes,
        "lastModifiedTime": last_modified_time,
        "toCalendar": to_calendar,
        "addThumbnail": add_thumbnail,
        "thumbnailCount": thumbnail_count,
        "regroupInSingleImage": regroup,
        "convertToJpeg": convert_to_jpeg,
    }


def _days_in_month(month: int, year: int) -> int:
    if month == 2:
        leap = year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)
        return 29 if leap else 28
    return 30 if month in (4, 6, 9, 11) else 31


def _calendar(year: int, month: int = 6, day: int = 15) -> Record:
    return Record("Calendar", {"day": day, "month": month, "year": year})


def _file(name: str, modified_year: int) -> Record:
    return Record("File", {
        "name": name,
        "content": [0] * CONTENT_SIZE,
        "created": _calendar(2001),
        "accessed": _calendar(2020),
        "modified": _calendar(modified_year),
    })


def witnesses() -> dict:
    hit = Record("Folder", {"files": [_file("a.png", TARGET_YEAR), _file("b", 1999), _file("c", 2010)]})
    miss = Record("Folder", {"files": [_file("a", 2001), _file("b", 1999), _file("c", 2010)]})
    return {
        CodeTarget("main", 20, "then"): hit,
        CodeTarget("main", 20, "else"): miss,
        CodeTarget("main", 30, "then"): hit,
        CodeTarget("main", 30, "else"): miss,
        CodeTarget("checkFormat", 3, "then"): hit,
        CodeTarget("checkFormat", 3, "else"): miss,
    }


def year_probability(year: int, reference: int = None) -> float:
    """Closed-form probability that one fresh calendar has ``year``."""
    ref = REFERENCE_YEAR if reference is None else reference
    k = abs(ref - year)
    p_offset = YEAR_STEP_P * (1 - YEAR_STEP_P) ** k
    if year == ref:
        return p_offset
    return p_offset * (FUTURE_P if year > ref else 1 - FUTURE_P)
