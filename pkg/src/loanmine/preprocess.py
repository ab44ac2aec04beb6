"""Derivations from raw records to mining inputs."""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional

from .datamodel import (
    CirculationRecord,
    GradeLevel,
    ItemRecord,
    LifespanBucket,
    PatronRecord,
    StudentRecord,
    faculty_name,
)
from .ingest import LC_CLASSES

_LEADING_LETTERS = re.compile(r"^([A-Z]+)")


class UnclassifiableError(ValueError):
    def __init__(self, call_number: str):
        super().__init__(f"unclassifiable call number {call_number!r}")
        self.call_number = call_number


def grade_level(cgpa: float) -> GradeLevel:
    if not 0.0 <= cgpa <= 4.0:
        raise ValueError(f"cgpa {cgpa} outside [0, 4]")
    # compare on the 2-decimal value so 3.495 and 3.4951 land together
    g = Decimal(repr(float(cgpa))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    if g >= Decimal("3.50"):
        return GradeLevel.EXCELLENT
    if g >= Decimal("3.00"):
        return GradeLevel.VERY_GOOD
    if g >= Decimal("2.50"):
        return GradeLevel.GOOD
    if g >= Decimal("2.00"):
        return GradeLevel.AVERAGE
    return GradeLevel.POOR


def parse_lc(call_number: str) -> tuple[str, str]:
    """Split an LC call number into ``(class, subclass)``.

    >>> parse_lc("QA76.73 R87")
    ('Q', 'QA')
    """
    m = _LEADING_LETTERS.match(call_number.strip())
    if m is None or len(m.group(1)) > 3 or m.group(1)[0] not in LC_CLASSES:
        raise UnclassifiableError(call_number)
    subclass = m.group(1)
    return subclass[0], subclass


def try_parse_lc(call_number: str) -> Optional[tuple[str, str]]:
    try:
        return parse_lc(call_number)
    except UnclassifiableError:
        return None


def lifespan_years(item: ItemRecord) -> Optional[int]:
    if item.last_checkin_date is None:
        return None
    days = (item.last_checkin_date - item.catalog_date).days
    return int(days // 365.25)


def lifespan_bucket(years: int) -> LifespanBucket:
    if years < 0:
        raise ValueError(f"negative lifespan {years}")
    if years <= 5:
        return LifespanBucket.Y0_5
    if years <= 10:
        return LifespanBucket.Y6_10
    if years <= 15:
        return LifespanBucket.Y11_15
    return LifespanBucket.Y16_20


def academic_year(date: dt.date) -> int:
    """Label of the 1 Aug - 31 Jul academic year containing ``date``."""
    return date.year if date.month >= 8 else date.year - 1


def in_window(date: dt.date, window: Optional[tuple[dt.date, dt.date]]) -> bool:
    return window is None or window[0] <= date <= window[1]


# -- baskets ---------------------------------------------------------------------

def faculty_tag(faculty_id: int) -> str:
    return f"FAC{faculty_id}"


@dataclass(frozen=True)
class Basket:
    student_id: str
    labels: frozenset


def build_baskets(
    circulation: Iterable[CirculationRecord],
    items: Iterable[ItemRecord],
    students: Iterable[StudentRecord],
    faculty_filter: Optional[int] = None,
    window: Optional[tuple[dt.date, dt.date]] = None,
) -> list[Basket]:
    """One basket per student with at least one classifiable checkout.

    Labels are the student's faculty tag plus every distinct subclass borrowed.
    Baskets are ordered by student id.
    """
    subclass_of = {}
    for it in items:
        parsed = try_parse_lc(it.call_number)
        if parsed is not None:
            subclass_of[it.item_barcode] = parsed[1]
    faculty_of = {
        s.student_id: s.faculty_id
        for s in students
        if faculty_filter is None or s.faculty_id == faculty_filter
    }
    borrowed: dict[str, set[str]] = {}
    for row in circulation:
        if row.patron_barcode not in faculty_of or not in_window(row.checkout_date, window):
            continue
        sub = subclass_of.get(row.item_barcode)
        if sub is not None:
            borrowed.setdefault(row.patron_barcode, set()).add(sub)
    return [
        Basket(sid, frozenset(subs | {faculty_tag(faculty_of[sid])}))
        for sid, subs in sorted(borrowed.items())
    ]


# -- cluster instances -------------------------------------------------------------

class SchemaKind(str, enum.Enum):
    FACULTY_SUBCLASS_LIFESPAN = "fsl"
    FACULTY_SUBCLASS_GRADE = "fsg"
    SUBCLASS_GRADE = "sg"

    @classmethod
    def parse(cls, value) -> "SchemaKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "FacultySubclassLifespan": cls.FACULTY_SUBCLASS_LIFESPAN,
            "FacultySubclassGrade": cls.FACULTY_SUBCLASS_GRADE,
            "SubclassGrade": cls.SUBCLASS_GRADE,
        }
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown schema kind {value!r}") from None


SCHEMA_ATTRIBUTES = {
    SchemaKind.FACULTY_SUBCLASS_LIFESPAN: ("Faculty", "Subcategory", "Book Lifespan"),
    SchemaKind.FACULTY_SUBCLASS_GRADE: ("Faculty", "Subcategory", "Grade Level"),
    SchemaKind.SUBCLASS_GRADE: ("Subcategory", "Grade Level"),
}


def build_cluster_instances(
    circulation: Iterable[CirculationRecord],
    items: Iterable[ItemRecord],
    students: Iterable[StudentRecord],
    schema_kind,
    patrons: Iterable[PatronRecord] = (),
    window: Optional[tuple[dt.date, dt.date]] = None,
) -> list[tuple[str, ...]]:
    """One nominal instance per usable circulation row, in circulation order.

    Values use display labels: faculty names, subclass codes, lifespan bands
    such as ``"16-20"`` and grade labels such as ``"Very Good"``.  For the
    lifespan schema the borrower's faculty comes from the student record,
    falling back to ``patrons``; rows whose item has no lifespan are skipped.
    """
    kind = SchemaKind.parse(schema_kind)
    item_by_id = {it.item_barcode: it for it in items}
    student_by_id = {s.student_id: s for s in students}
    patron_faculty = {p.patron_barcode: p.faculty_id for p in patrons}

    out = []
    for row in circulation:
        if not in_window(row.checkout_date, window):
            continue
        item = item_by_id.get(row.item_barcode)
        if item is None:
            continue
        parsed = try_parse_lc(item.call_number)
        if parsed is None:
            continue
        subclass = parsed[1]
        student = student_by_id.get(row.patron_barcode)

        if kind is SchemaKind.FACULTY_SUBCLASS_LIFESPAN:
            fid = student.faculty_id if student else patron_faculty.get(row.patron_barcode)
            years = lifespan_years(item)
            if fid is None or years is None:
                continue
            out.append((faculty_name(fid), subclass, lifespan_bucket(years).label))
            continue

        if student is None:
            continue
        grade = grade_level(student.cgpa).label
        if kind is SchemaKind.FACULTY_SUBCLASS_GRADE:
            out.append((faculty_name(student.faculty_id), subclass, grade))
        else:
            out.append((subclass, grade))
    return out
