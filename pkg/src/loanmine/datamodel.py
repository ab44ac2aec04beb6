"""Record types, enumerations and dataset validation.

Every other module consumes these types.  Records are frozen dataclasses;
range checks live in :func:`validate_dataset` so that bad rows can be
reported instead of raised.
"""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

FACULTIES: dict[int, str] = {
    1: "Faculty of Agro-Industry",
    2: "Faculty of Dentistry",
    3: "Faculty of Economics",
    4: "Faculty of Engineering",
    5: "Faculty of Law",
    6: "Faculty of Liberal Arts",
    7: "Faculty of Management Sciences",
    8: "Faculty of Medical Technology",
    9: "Faculty of Medicine",
    10: "Faculty of Natural Resources",
    11: "Faculty of Nursing",
    12: "Faculty of Pharmaceutical Sciences",
    13: "Faculty of Science",
    14: "Faculty of Traditional Thai Medicine",
    15: "Faculty of Veterinary Science",
    16: "International College",
    17: "Faculty of SINO-Thai",
}

FACULTY_ID_RANGE = range(1, 18)

_CATEGORY_CODE = re.compile(r"^[A-Z]{1,3}$")


class _ExternalEnum(str, enum.Enum):
    """String enum whose value is the external (CSV) form."""

    @classmethod
    def parse(cls, text: str):
        try:
            return cls(text)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"{text!r} is not a valid {cls.__name__} ({valid})") from None

    def __str__(self) -> str:
        return self.value


class PatronType(_ExternalEnum):
    UNDERGRADUATE = "Undergraduate"
    GRADUATE = "Graduate"
    ACADEMIC_STAFF = "AcademicStaff"
    OTHER = "Other"

    @property
    def label(self) -> str:
        return {"AcademicStaff": "Academic Staff", "Other": "Others"}.get(self.value, self.value)


class ClassYear(_ExternalEnum):
    FRESHMAN = "Freshman"
    SOPHOMORE = "Sophomore"
    JUNIOR = "Junior"
    SENIOR = "Senior"

    @property
    def label(self) -> str:
        return self.value


class Collection(_ExternalEnum):
    BOOKS = "Books"
    MULTIMEDIA = "Multimedia"
    SERIALS = "Serials"
    PROJECTS = "Projects"
    THESES = "Theses"
    FICTIONS = "Fictions"
    JUVENILE = "Juvenile"
    FACILITIES_EQUIPMENT = "FacilitiesEquipment"
    OTHERS = "Others"

    @property
    def label(self) -> str:
        return "Facilities & Equipment" if self is Collection.FACILITIES_EQUIPMENT else self.value


class GradeLevel(_ExternalEnum):
    """Academic achievement level; declaration order is best to worst."""

    EXCELLENT = "Excellent"
    VERY_GOOD = "VeryGood"
    GOOD = "Good"
    AVERAGE = "Average"
    POOR = "Poor"

    @property
    def label(self) -> str:
        return "Very Good" if self is GradeLevel.VERY_GOOD else self.value

    @property
    def rank(self) -> int:
        # higher is better
        return len(GradeLevel) - list(GradeLevel).index(self)

    def __lt__(self, other):
        if not isinstance(other, GradeLevel):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other):
        if not isinstance(other, GradeLevel):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other):
        if not isinstance(other, GradeLevel):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other):
        if not isinstance(other, GradeLevel):
            return NotImplemented
        return self.rank >= other.rank


class LifespanBucket(_ExternalEnum):
    Y0_5 = "Y0_5"
    Y6_10 = "Y6_10"
    Y11_15 = "Y11_15"
    Y16_20 = "Y16_20"

    @property
    def label(self) -> str:
        return self.value[1:].replace("_", "-")


@dataclass(frozen=True)
class PatronRecord:
    patron_barcode: str
    patron_type: PatronType
    faculty_id: int
    class_year: Optional[ClassYear] = None


@dataclass(frozen=True)
class ItemRecord:
    item_barcode: str
    title: str
    collection: Collection
    call_number: str
    catalog_date: dt.date
    last_checkin_date: Optional[dt.date] = None
    last_checkout_date: Optional[dt.date] = None
    total_checkouts: int = 0


@dataclass(frozen=True)
class CirculationRecord:
    patron_barcode: str
    item_barcode: str
    checkout_date: dt.date


@dataclass(frozen=True)
class StudentRecord:
    student_id: str
    faculty_id: int
    cgpa: float


@dataclass(frozen=True)
class CategoryRecord:
    category_code: str
    description: str

    def __post_init__(self):
        if not _CATEGORY_CODE.match(self.category_code):
            raise ValueError(f"category code must be 1-3 uppercase letters: {self.category_code!r}")


@dataclass(frozen=True)
class FacultyRecord:
    faculty_id: int
    name: str


def faculty_name(faculty_id: int) -> str:
    return FACULTIES[faculty_id]


def faculty_records() -> list[FacultyRecord]:
    return [FacultyRecord(fid, name) for fid, name in FACULTIES.items()]


# -- validation ---------------------------------------------------------------

class Reason(str, enum.Enum):
    DUPLICATE_ID = "duplicate id"
    EMPTY_ID = "empty id"
    FACULTY_RANGE = "faculty id range"
    CLASS_YEAR = "class year mismatch"
    CGPA_RANGE = "cgpa range"
    CHECKIN_BEFORE_CATALOG = "checkin before catalog"
    NEGATIVE_CHECKOUTS = "negative checkouts"
    CHECKOUT_WITHOUT_COUNT = "checkout date without checkouts"
    DANGLING_PATRON = "dangling patron"
    DANGLING_ITEM = "dangling item"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Rejection:
    kind: str
    record: object
    reason: Reason


@dataclass
class ValidationReport:
    patrons: list[PatronRecord] = field(default_factory=list)
    items: list[ItemRecord] = field(default_factory=list)
    circulation: list[CirculationRecord] = field(default_factory=list)
    students: list[StudentRecord] = field(default_factory=list)
    rejected: list[Rejection] = field(default_factory=list)

    @property
    def accepted_counts(self) -> dict[str, int]:
        return {
            "patrons": len(self.patrons),
            "items": len(self.items),
            "circulation": len(self.circulation),
            "students": len(self.students),
        }

    @property
    def n_accepted(self) -> int:
        return sum(self.accepted_counts.values())

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)

    def reasons(self) -> list[Reason]:
        return [r.reason for r in self.rejected]


def _patron_problem(p: PatronRecord) -> Optional[Reason]:
    if not p.patron_barcode:
        return Reason.EMPTY_ID
    if p.faculty_id not in FACULTY_ID_RANGE:
        return Reason.FACULTY_RANGE
    if (p.class_year is not None) != (p.patron_type is PatronType.UNDERGRADUATE):
        return Reason.CLASS_YEAR
    return None


def _item_problem(it: ItemRecord) -> Optional[Reason]:
    if not it.item_barcode:
        return Reason.EMPTY_ID
    if it.last_checkin_date is not None and it.last_checkin_date < it.catalog_date:
        return Reason.CHECKIN_BEFORE_CATALOG
    if it.total_checkouts < 0:
        return Reason.NEGATIVE_CHECKOUTS
    if it.total_checkouts == 0 and it.last_checkout_date is not None:
        return Reason.CHECKOUT_WITHOUT_COUNT
    return None


def _student_problem(s: StudentRecord) -> Optional[Reason]:
    if not s.student_id:
        return Reason.EMPTY_ID
    if s.faculty_id not in FACULTY_ID_RANGE:
        return Reason.FACULTY_RANGE
    if not 0.0 <= s.cgpa <= 4.0:
        return Reason.CGPA_RANGE
    return None


_PROBLEM_CHECKS = {}


def record_problem(record) -> Optional[Reason]:
    """Return the first single-record invariant violation, or None."""
    return _PROBLEM_CHECKS[type(record)](record)


def _screen(kind, records, key, check, report):
    seen = set()
    accepted = []
    for rec in records:
        reason = check(rec)
        if reason is None and key(rec) in seen:
            reason = Reason.DUPLICATE_ID
        if reason is None:
            seen.add(key(rec))
            accepted.append(rec)
        else:
            report.rejected.append(Rejection(kind, rec, reason))
    return accepted


_PROBLEM_CHECKS.update({
    PatronRecord: _patron_problem,
    ItemRecord: _item_problem,
    StudentRecord: _student_problem,
    CirculationRecord: lambda _row: None,
})


def validate_dataset(
    patrons: Iterable[PatronRecord] = (),
    items: Iterable[ItemRecord] = (),
    circulation: Iterable[CirculationRecord] = (),
    students: Iterable[StudentRecord] = (),
) -> ValidationReport:
    """Split the four collections into accepted records and rejections.

    Nothing is raised.  Duplicate ids keep their first occurrence.
    Circulation rows are checked against the *accepted* patrons and items,
    so re-validating the accepted subset never rejects anything.
    """
    report = ValidationReport()
    report.patrons = _screen("patron", patrons, lambda p: p.patron_barcode, _patron_problem, report)
    report.items = _screen("item", items, lambda i: i.item_barcode, _item_problem, report)
    report.students = _screen("student", students, lambda s: s.student_id, _student_problem, report)

    patron_ids = {p.patron_barcode for p in report.patrons}
    item_ids = {i.item_barcode for i in report.items}
    for row in circulation:
        if row.patron_barcode not in patron_ids:
            report.rejected.append(Rejection("circulation", row, Reason.DANGLING_PATRON))
        elif row.item_barcode not in item_ids:
            report.rejected.append(Rejection("circulation", row, Reason.DANGLING_ITEM))
        else:
            report.circulation.append(row)
    return report
