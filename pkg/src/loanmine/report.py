"""Descriptive circulation reports and table rendering.

Every report returns a :class:`ReportTable` whose cells keep full
precision; rounding happens only in :func:`render`.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional

from .datamodel import (
    FACULTIES,
    CirculationRecord,
    ClassYear,
    Collection,
    GradeLevel,
    ItemRecord,
    LifespanBucket,
    PatronRecord,
    PatronType,
    StudentRecord,
    faculty_name,
)
from .ingest import LC_CLASSES
from .preprocess import academic_year, grade_level, lifespan_bucket, lifespan_years, try_parse_lc

UNCLASSIFIED = "Unclassified"


@dataclass
class ReportTable:
    """A captioned table.

    ``share_axis`` says how the columns listed in ``share_columns`` are
    normalised: ``"column"`` (each column is a share of its own total),
    ``"row"`` (the listed cells of each row share one total) or ``"grand"``
    (all listed cells share one total).  Groups whose cells are all zero are
    empty rather than normalised.
    """

    caption: str
    columns: list
    rows: list = field(default_factory=list)
    percent_columns: frozenset = frozenset()
    share_columns: tuple = ()
    share_axis: Optional[str] = None

    def __post_init__(self):
        self.percent_columns = frozenset(self.percent_columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row arity {len(row)} != {len(self.columns)} columns")

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def share_totals(self) -> list[float]:
        """Sum of every normalised group; each nonzero entry should be 100."""
        cols = list(self.share_columns)
        if self.share_axis == "column":
            return [sum(row[j] for row in self.rows) for j in cols]
        if self.share_axis == "row":
            return [sum(row[j] for j in cols) for row in self.rows]
        if self.share_axis == "grand":
            return [sum(row[j] for row in self.rows for j in cols)]
        return []


def _pct(part: float, whole: float) -> float:
    return 100.0 * part / whole if whole else 0.0


def round_half_up(value: float, places: int = 2) -> str:
    q = Decimal(1).scaleb(-places)
    d = Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP)
    if d.is_zero():
        d = abs(d)
    return f"{d:f}"


def format_cell(table: ReportTable, j: int, value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return round_half_up(value, 2 if j in table.percent_columns else 4)
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value) if value else "-"
    return str(value)


def formatted_rows(table: ReportTable) -> list[list[str]]:
    return [[format_cell(table, j, v) for j, v in enumerate(row)] for row in table.rows]


def _json_value(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def render(table: ReportTable, format: str) -> str:
    """Serialise a table as ``csv``, ``json`` or ``markdown``."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(table.columns)
        writer.writerows(formatted_rows(table))
        return buf.getvalue()
    if format == "json":
        doc = {
            "caption": table.caption,
            "columns": list(table.columns),
            "percent_columns": sorted(table.percent_columns),
            "rows": [[_json_value(v) for v in row] for row in table.rows],
            "formatted_rows": formatted_rows(table),
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if format == "markdown":
        def esc(text: str) -> str:
            return text.replace("|", "\\|")

        lines = [f"**{esc(table.caption)}**", ""]
        lines.append("| " + " | ".join(esc(str(c)) for c in table.columns) + " |")
        lines.append("|" + "|".join("---" for _ in table.columns) + "|")
        for row in formatted_rows(table):
            lines.append("| " + " | ".join(esc(c) for c in row) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}; expected csv, json or markdown")


FORMATS = ("csv", "json", "markdown")
EXTENSIONS = {"csv": "csv", "json": "json", "markdown": "md"}


# -- helpers -------------------------------------------------------------------------

def _in_year(row: CirculationRecord, year: Optional[int]) -> bool:
    return year is None or academic_year(row.checkout_date) == year


def _year_caption(year: Optional[int]) -> str:
    return "all years" if year is None else f"academic year {year} (1/8/{year} - 31/7/{year + 1})"


def _item_classes(items: Iterable[ItemRecord]) -> dict[str, Optional[str]]:
    out = {}
    for it in items:
        parsed = try_parse_lc(it.call_number)
        out[it.item_barcode] = parsed[0] if parsed else None
    return out


# -- reports -------------------------------------------------------------------------

def checkout_share_by_patron_type(
    circulation: Iterable[CirculationRecord],
    patrons: Iterable[PatronRecord],
    year: Optional[int] = None,
) -> ReportTable:
    """Share of the year's checkouts per patron type, with distinct borrowers per type."""
    ptype = {p.patron_barcode: p.patron_type for p in patrons}
    counts: Counter = Counter()
    borrowers: dict[PatronType, set] = defaultdict(set)
    for row in circulation:
        if _in_year(row, year) and row.patron_barcode in ptype:
            t = ptype[row.patron_barcode]
            counts[t] += 1
            borrowers[t].add(row.patron_barcode)
    total = sum(counts.values())
    caption = f"Total check-out distributed by patron type, {_year_caption(year)}"
    columns = ["Patron type", "% of total check-outs", "Patrons"]
    if total == 0:
        return ReportTable(caption + " (no check-outs in window)", columns, [], {1}, (1,), "column")
    rows = [[t.label, _pct(counts[t], total), len(borrowers[t])] for t in PatronType]
    return ReportTable(caption, columns, rows, {1}, (1,), "column")


def checkout_share_by_collection(
    circulation: Iterable[CirculationRecord],
    items: Iterable[ItemRecord],
    patrons: Iterable[PatronRecord],
    year: Optional[int] = None,
    group_by: str = "patron_type",
) -> ReportTable:
    """Collection x group percentage matrix; every nonempty group column sums to 100."""
    patron_by_id = {p.patron_barcode: p for p in patrons}
    collection_of = {it.item_barcode: it.collection for it in items}
    if group_by == "patron_type":
        groups = list(PatronType)

        def group(p: PatronRecord):
            return p.patron_type
    elif group_by == "class_year":
        groups = list(ClassYear)

        def group(p: PatronRecord):
            return p.class_year if p.patron_type is PatronType.UNDERGRADUATE else None
    else:
        raise ValueError(f"group_by must be 'patron_type' or 'class_year', got {group_by!r}")

    counts: dict = {g: Counter() for g in groups}
    for row in circulation:
        if not _in_year(row, year):
            continue
        p = patron_by_id.get(row.patron_barcode)
        coll = collection_of.get(row.item_barcode)
        if p is None or coll is None:
            continue
        g = group(p)
        if g is not None:
            counts[g][coll] += 1
    totals = {g: sum(c.values()) for g, c in counts.items()}
    rows = [
        [coll.label] + [_pct(counts[g][coll], totals[g]) for g in groups]
        for coll in Collection
    ]
    cols = list(range(1, len(groups) + 1))
    label = "patron type" if group_by == "patron_type" else "undergraduate class"
    return ReportTable(
        f"Check-out distribution by collection and {label}, {_year_caption(year)}",
        ["Collection"] + [g.label for g in groups],
        rows,
        cols,
        tuple(cols),
        "column",
    )


def top_faculties(
    circulation: Iterable[CirculationRecord],
    patrons: Iterable[PatronRecord],
    year: Optional[int] = None,
    top_n: int = 10,
) -> ReportTable:
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    faculty_of = {
        p.patron_barcode: p.faculty_id
        for p in patrons
        if p.patron_type is PatronType.UNDERGRADUATE
    }
    counts = Counter(
        faculty_of[row.patron_barcode]
        for row in circulation
        if _in_year(row, year) and row.patron_barcode in faculty_of
    )
    total = sum(counts.values())
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    rows = [[faculty_name(fid), _pct(n, total)] for fid, n in ranked[:top_n]]
    caption = f"Total check-out distributed by undergraduate's faculty, {_year_caption(year)}"
    if total:
        rest = sum(n for _, n in ranked[top_n:])
        rows.append(["Others", _pct(rest, total)])
    return ReportTable(caption, [f"Top {top_n} Faculty", "% of total check-out"], rows, {1}, (1,), "column")


def faculty_category_matrix(
    circulation: Iterable[CirculationRecord],
    items: Iterable[ItemRecord],
    patrons: Iterable[PatronRecord],
    year: Optional[int] = None,
) -> ReportTable:
    """LC class x faculty loan percentages; each faculty column sums to 100 if it has loans."""
    faculty_of = {p.patron_barcode: p.faculty_id for p in patrons}
    class_of = _item_classes(items)
    counts: dict[int, Counter] = {fid: Counter() for fid in FACULTIES}
    for row in circulation:
        fid = faculty_of.get(row.patron_barcode)
        cls = class_of.get(row.item_barcode)
        if fid is None or cls is None or not _in_year(row, year):
            continue
        counts[fid][cls] += 1
    totals = {fid: sum(c.values()) for fid, c in counts.items()}
    rows = [
        [cls] + [_pct(counts[fid][cls], totals[fid]) for fid in FACULTIES]
        for cls in LC_CLASSES
    ]
    cols = list(range(1, len(FACULTIES) + 1))
    return ReportTable(
        f"Percentage of patron loan by faculty and LC class, {_year_caption(year)}",
        ["IDs"] + [str(fid) for fid in FACULTIES],
        rows,
        cols,
        tuple(cols),
        "column",
    )


def category_influencers(matrix: ReportTable, min_share: float = 1.0) -> ReportTable:
    """Per LC class, the faculties whose loan share reaches ``min_share``, largest first."""
    if min_share < 0:
        raise ValueError("min_share must be non-negative")
    fac_cols = [(j, int(c)) for j, c in enumerate(matrix.columns) if j > 0]
    rows = []
    for row in matrix.rows:
        cls = row[0]
        hits = [(row[j], fid) for j, fid in fac_cols if row[j] >= min_share]
        hits.sort(key=lambda vf: (-vf[0], vf[1]))
        desc = LC_CLASSES.get(cls, "")
        rows.append([cls, desc, tuple(fid for _, fid in hits)])
    return ReportTable(
        f"ID influencer per LC class (faculty share >= {min_share:g}%)",
        ["ID", "Category", "ID Influencer"],
        rows,
    )


def grade_category_distribution(
    circulation: Iterable[CirculationRecord],
    items: Iterable[ItemRecord],
    students: Iterable[StudentRecord],
    year: Optional[int] = None,
) -> ReportTable:
    """LC class x grade level, as percentages of all student checkouts."""
    grade_of = {s.student_id: grade_level(s.cgpa) for s in students}
    class_of = _item_classes(items)
    counts: Counter = Counter()
    for row in circulation:
        g = grade_of.get(row.patron_barcode)
        cls = class_of.get(row.item_barcode)
        if g is None or cls is None or not _in_year(row, year):
            continue
        counts[cls, g] += 1
    total = sum(counts.values())
    grades = list(GradeLevel)
    rows = [[cls] + [_pct(counts[cls, g], total) for g in grades] for cls in LC_CLASSES]
    cols = list(range(1, len(grades) + 1))
    return ReportTable(
        f"Percentage of items check-out by grade level and LC category, {_year_caption(year)}",
        ["LC class"] + [g.label for g in grades],
        rows,
        cols,
        tuple(cols),
        "grand",
    )


def checkouts_vs_cgpa(
    circulation: Iterable[CirculationRecord],
    students: Iterable[StudentRecord],
    year: Optional[int] = None,
) -> ReportTable:
    """Per borrowing student: number of checkouts and CGPA (scatter data)."""
    cgpa = {s.student_id: s.cgpa for s in students}
    counts = Counter(
        row.patron_barcode
        for row in circulation
        if row.patron_barcode in cgpa and _in_year(row, year)
    )
    rows = [[sid, n, cgpa[sid]] for sid, n in sorted(counts.items())]
    return ReportTable(
        f"Number of items check-out and CGPA per student, {_year_caption(year)}",
        ["student_id", "checkouts", "cgpa"],
        rows,
    )


def _class_key(item: ItemRecord) -> str:
    parsed = try_parse_lc(item.call_number)
    return parsed[0] if parsed else UNCLASSIFIED


def category_usage(items: Iterable[ItemRecord]) -> ReportTable:
    """Circulated versus never-circulated items per LC class."""
    total: Counter = Counter()
    circulated: Counter = Counter()
    for it in items:
        key = _class_key(it)
        total[key] += 1
        if it.total_checkouts > 0:
            circulated[key] += 1
    keys = list(LC_CLASSES) + ([UNCLASSIFIED] if total[UNCLASSIFIED] else [])
    rows = []
    for key in keys:
        n, c = total[key], circulated[key]
        rows.append([key, n, c, n - c, _pct(c, n), _pct(n - c, n)])
    return ReportTable(
        "Check-out distribution by LC category",
        ["LC class", "Items", "Circulated", "Uncirculated", "% circulated", "% uncirculated"],
        rows,
        {4, 5},
        (4, 5),
        "row",
    )


def lifespan_distribution(items: Iterable[ItemRecord], remove_uncirculated: bool = False) -> ReportTable:
    """Lifespan bucket counts per LC class.

    With ``remove_uncirculated`` the never-checked-in items are dropped and
    each remaining class is split into 0-10 and 11-20 year bands as percentages.
    """
    counts: dict[str, Counter] = defaultdict(Counter)
    for it in items:
        years = lifespan_years(it)
        key = _class_key(it)
        counts[key][lifespan_bucket(years) if years is not None else None] += 1
    buckets = list(LifespanBucket)
    keys = list(LC_CLASSES) + ([UNCLASSIFIED] if counts.get(UNCLASSIFIED) else [])

    if not remove_uncirculated:
        rows = [
            [key] + [counts[key][b] for b in buckets] + [counts[key][None]]
            for key in keys
        ]
        return ReportTable(
            "LC category lifespan distribution",
            ["LC class"] + [f"{b.label} years" for b in buckets] + ["Uncirculated"],
            rows,
        )

    rows = []
    for key in keys:
        c = counts[key]
        young = c[LifespanBucket.Y0_5] + c[LifespanBucket.Y6_10]
        old = c[LifespanBucket.Y11_15] + c[LifespanBucket.Y16_20]
        if young + old == 0:
            continue
        rows.append([key, _pct(young, young + old), _pct(old, young + old)])
    return ReportTable(
        "Percentage LC category lifespan distribution (uncirculated items removed)",
        ["LC class", "0-10 years", "11-20 years"],
        rows,
        {1, 2},
        (1, 2),
        "row",
    )
