"""CSV loading/writing, the embedded LC class table and a seeded data generator."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .datamodel import (
    FACULTIES,
    CategoryRecord,
    CirculationRecord,
    ClassYear,
    Collection,
    FacultyRecord,
    ItemRecord,
    PatronRecord,
    PatronType,
    StudentRecord,
    record_problem,
)

# -- LC classification ----------------------------------------------------------

LC_CLASSES: dict[str, str] = {
    "A": "General Works",
    "B": "Philosophy, Psychology, Religion",
    "C": "Auxiliary Science of History",
    "D": "World History",
    "E": "History of the Americas",
    "F": "History of the Americas",
    "G": "Geography, Anthropology, Recreation",
    "H": "Social Sciences",
    "J": "Political Sciences",
    "K": "Law",
    "L": "Education",
    "M": "Music and Books on Music",
    "N": "Fine Arts",
    "P": "Language and Literature",
    "Q": "Science",
    "R": "Medicine",
    "S": "Agriculture",
    "T": "Technology",
    "U": "Military Science",
    "V": "Naval Science",
    "Z": "Bibliography, Library Science",
}

LC_SUBCLASSES: dict[str, str] = {
    "QA": "Mathematics",
    "QC": "Physics",
    "QD": "Chemistry",
    "QH": "Biology",
    "QL": "Zoology",
    "QM": "Human Anatomy",
    "QP": "Physiology",
    "QR": "Microbiology",
    "TA": "Civil Engineering",
    "TJ": "Mechanical Engineering",
    "TK": "Electrical Engineering",
    "HB": "Economic Theory, Demography",
    "HD": "Industries, Land Use, Labor",
    "HF": "Commerce",
    "HG": "Finance",
    "KP": "Law in Asia & Eurasia, Africa, Pacific Asia & Antarctica",
    "PE": "English",
}


def builtin_lc_table() -> list[CategoryRecord]:
    """The 21 top-level LC classes followed by the named subclasses."""
    return [CategoryRecord(code, desc) for code, desc in {**LC_CLASSES, **LC_SUBCLASSES}.items()]


def lc_description(code: str) -> str:
    """Description for a class or subclass code; unknown subclasses fall back to their class."""
    if code in LC_SUBCLASSES:
        return LC_SUBCLASSES[code]
    return LC_CLASSES[code[0]]


# Dominant LC class per faculty, taken from the column maxima of the
# faculty x class loan matrix.
FACULTY_CLASS: dict[int, str] = {
    1: "T", 2: "Q", 3: "H", 4: "T", 5: "K", 6: "P", 7: "H", 8: "Q", 9: "Q",
    10: "S", 11: "Q", 12: "Q", 13: "Q", 14: "Q", 15: "Q", 16: "T", 17: "Q",
}

# Borrowing-student counts per faculty for the 2015-2018 window; used as
# default generator weights.
FACULTY_STUDENT_COUNTS: dict[int, int] = {
    1: 183, 2: 75, 3: 170, 4: 970, 5: 293, 6: 387, 7: 741, 8: 139, 9: 390,
    10: 442, 11: 409, 12: 351, 13: 1641, 14: 276, 15: 49, 16: 16, 17: 2,
}


# -- CSV I/O ---------------------------------------------------------------------

class IngestError(Exception):
    """Fatal loading problem: unreadable file or unusable header."""


class MissingColumnError(IngestError):
    def __init__(self, path, column: str):
        super().__init__(f"{path}: missing column {column!r}")
        self.column = column


SCHEMAS: dict[str, tuple[str, ...]] = {
    "patrons": ("patron_barcode", "patron_type", "class_year", "faculty_id"),
    "items": (
        "item_barcode", "title", "collection", "call_number", "catalog_date",
        "last_checkin_date", "last_checkout_date", "total_checkouts",
    ),
    "circulation": ("patron_barcode", "item_barcode", "checkout_date"),
    "students": ("student_id", "faculty_id", "cgpa"),
    "categories": ("category_code", "description"),
    "faculties": ("faculty_id", "name"),
}

FILENAMES = {kind: f"{kind}.csv" for kind in ("patrons", "items", "circulation", "students")}


class RowError(ValueError):
    pass


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise RowError("bad date") from None


def _opt_date(text: str) -> Optional[dt.date]:
    return _date(text) if text else None


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise RowError("bad integer") from None


def _float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise RowError("bad number") from None
    if not math.isfinite(value):
        raise RowError("bad number")
    return value


def _enum(cls, text: str):
    try:
        return cls(text)
    except ValueError:
        raise RowError(f"bad {cls.__name__}") from None


def _parse_patron(row):
    year = row["class_year"]
    return PatronRecord(
        patron_barcode=row["patron_barcode"],
        patron_type=_enum(PatronType, row["patron_type"]),
        faculty_id=_int(row["faculty_id"]),
        class_year=_enum(ClassYear, year) if year else None,
    )


def _parse_item(row):
    return ItemRecord(
        item_barcode=row["item_barcode"],
        title=row["title"],
        collection=_enum(Collection, row["collection"]),
        call_number=row["call_number"],
        catalog_date=_date(row["catalog_date"]),
        last_checkin_date=_opt_date(row["last_checkin_date"]),
        last_checkout_date=_opt_date(row["last_checkout_date"]),
        total_checkouts=_int(row["total_checkouts"]),
    )


def _parse_circulation(row):
    return CirculationRecord(row["patron_barcode"], row["item_barcode"], _date(row["checkout_date"]))


def _parse_student(row):
    return StudentRecord(row["student_id"], _int(row["faculty_id"]), _float(row["cgpa"]))


def _parse_category(row):
    try:
        return CategoryRecord(row["category_code"], row["description"])
    except ValueError:
        raise RowError("bad category code") from None


def _parse_faculty(row):
    return FacultyRecord(_int(row["faculty_id"]), row["name"])


_PARSERS = {
    "patrons": _parse_patron,
    "items": _parse_item,
    "circulation": _parse_circulation,
    "students": _parse_student,
    "categories": _parse_category,
    "faculties": _parse_faculty,
}


@dataclass(frozen=True)
class RowRejection:
    line: int
    reason: str
    row: dict


@dataclass
class LoadResult:
    records: list
    rejected: list[RowRejection] = field(default_factory=list)


def load_csv(path, schema_kind: str) -> LoadResult:
    """Parse one CSV file of the given kind.

    Malformed rows are collected with their 1-based line number (the header
    is line 1); single-record invariants such as the faculty id range are
    checked here too.  Unreadable files and missing columns raise
    :class:`IngestError`.
    """
    if schema_kind not in SCHEMAS:
        raise ValueError(f"unknown schema kind {schema_kind!r}")
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"{path}: cannot read ({exc.strerror})") from exc

    parse = _PARSERS[schema_kind]
    result = LoadResult(records=[])
    with handle:
        reader = csv.DictReader(handle)
        try:
            header = reader.fieldnames
        except UnicodeDecodeError as exc:
            raise IngestError(f"{path}: not UTF-8") from exc
        if header is None:
            raise IngestError(f"{path}: empty file, expected header row")
        for column in SCHEMAS[schema_kind]:
            if column not in header:
                raise MissingColumnError(path, column)
        try:
            for row in reader:
                line = reader.line_num
                if None in row or any(v is None for v in row.values()):
                    result.rejected.append(RowRejection(line, "wrong field count", row))
                    continue
                try:
                    record = parse(row)
                except RowError as exc:
                    result.rejected.append(RowRejection(line, str(exc), row))
                    continue
                problem = _single_record_problem(record)
                if problem is not None:
                    result.rejected.append(RowRejection(line, problem, row))
                    continue
                result.records.append(record)
        except UnicodeDecodeError as exc:
            raise IngestError(f"{path}: not UTF-8") from exc
    return result


def _single_record_problem(record) -> Optional[str]:
    if isinstance(record, FacultyRecord):
        return None if record.faculty_id in FACULTIES else "faculty id range"
    if isinstance(record, CategoryRecord):
        return None
    problem = record_problem(record)
    return None if problem is None else str(problem)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row_values(kind: str, record) -> list[str]:
    return [_cell(getattr(record, col)) for col in SCHEMAS[kind]]


def write_csv(path, schema_kind: str, records) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SCHEMAS[schema_kind])
        for record in records:
            writer.writerow(_row_values(schema_kind, record))


@dataclass
class Dataset:
    patrons: list[PatronRecord]
    items: list[ItemRecord]
    circulation: list[CirculationRecord]
    students: list[StudentRecord]

    def __iter__(self):
        return iter((self.patrons, self.items, self.circulation, self.students))


def write_dataset(directory, dataset: Dataset) -> dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = {}
    for kind, records in zip(("patrons", "items", "circulation", "students"), dataset):
        path = directory / FILENAMES[kind]
        write_csv(path, kind, records)
        written[kind] = path
    return written


def load_dataset(directory) -> tuple[Dataset, dict[str, list[RowRejection]]]:
    """Load the four CSV files of a data directory."""
    directory = Path(directory)
    loaded, rejected = {}, {}
    for kind, name in FILENAMES.items():
        result = load_csv(directory / name, kind)
        loaded[kind] = result.records
        rejected[kind] = result.rejected
    return Dataset(**loaded), rejected


# -- synthetic generator -----------------------------------------------------------

DEFAULT_REFERENCE_DATE = dt.date(2019, 7, 31)
DEFAULT_WINDOW_START = dt.date(2015, 8, 1)

_COLLECTION_WEIGHTS = {
    Collection.BOOKS: 0.70,
    Collection.MULTIMEDIA: 0.04,
    Collection.SERIALS: 0.03,
    Collection.PROJECTS: 0.01,
    Collection.THESES: 0.04,
    Collection.FICTIONS: 0.07,
    Collection.JUVENILE: 0.01,
    Collection.FACILITIES_EQUIPMENT: 0.08,
    Collection.OTHERS: 0.02,
}

_OTHER_PATRON_TYPES = (PatronType.GRADUATE, PatronType.ACADEMIC_STAFF, PatronType.OTHER)
_OTHER_PATRON_WEIGHTS = (0.5, 0.15, 0.35)


def _default_faculty_weights() -> dict[int, float]:
    total = sum(FACULTY_STUDENT_COUNTS.values())
    return {fid: n / total for fid, n in FACULTY_STUDENT_COUNTS.items()}


@dataclass(frozen=True)
class PlantedRule:
    antecedent: frozenset
    consequent: str
    probability: float

    def __init__(self, antecedent, consequent: str, probability: float):
        object.__setattr__(self, "antecedent", frozenset(antecedent))
        object.__setattr__(self, "consequent", consequent)
        object.__setattr__(self, "probability", float(probability))


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of :func:`generate_synthetic`.

    ``n_checkouts`` is the number of base checkouts; planted rules add
    extra checkouts on top.  ``n_other_patrons`` adds graduate, staff and
    other patrons that borrow but never appear in the student records.
    """

    seed: int = 0
    n_students: int = 500
    n_items: int = 2000
    n_checkouts: int = 5000
    faculty_weights: dict = field(default_factory=_default_faculty_weights)
    subject_affinity: float = 0.8
    planted_rules: tuple = ()
    n_other_patrons: int = 0
    reference_date: dt.date = DEFAULT_REFERENCE_DATE
    window_start: dt.date = DEFAULT_WINDOW_START
    max_item_age_years: int = 20

    def __post_init__(self):
        for name in ("n_students", "n_items", "n_checkouts", "n_other_patrons"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 <= self.subject_affinity <= 1.0:
            raise ValueError("subject_affinity must lie in [0, 1]")
        weights = self.faculty_weights
        if any(fid not in FACULTIES for fid in weights):
            raise ValueError("faculty_weights keys must be faculty ids 1..17")
        if any(not 0.0 <= w <= 1.0 for w in weights.values()):
            raise ValueError("faculty weights must lie in [0, 1]")
        if abs(sum(weights.values()) - 1.0) > 1e-9:
            raise ValueError("faculty_weights must sum to 1")
        rules = tuple(r if isinstance(r, PlantedRule) else PlantedRule(*r) for r in self.planted_rules)
        object.__setattr__(self, "planted_rules", rules)
        for rule in rules:
            if not 0.0 <= rule.probability <= 1.0:
                raise ValueError("planted rule probability must lie in [0, 1]")
            for code in (*rule.antecedent, rule.consequent):
                if code not in _SUBCLASS_POOL:
                    raise ValueError(f"planted rule uses unknown subclass {code!r}")
            if rule.consequent in rule.antecedent:
                raise ValueError("planted rule consequent must not be in its antecedent")
        if self.window_start > self.reference_date:
            raise ValueError("window_start must not be after reference_date")
        if self.max_item_age_years < 0:
            raise ValueError("max_item_age_years must be non-negative")


# Subclasses the generator draws from: the described subclasses of a class,
# otherwise the bare class letter.
_CLASS_SUBCLASSES: dict[str, list[str]] = {}
for _code in LC_CLASSES:
    _named = [s for s in LC_SUBCLASSES if s[0] == _code]
    _CLASS_SUBCLASSES[_code] = _named or [_code]
_SUBCLASS_POOL = [s for subs in _CLASS_SUBCLASSES.values() for s in subs]


def _call_number(rng: np.random.Generator, subclass: str) -> str:
    number = rng.integers(1, 9999)
    cutter = chr(ord("A") + int(rng.integers(0, 26)))
    return f"{subclass}{number}.{cutter}{int(rng.integers(10, 99))}"


def _generate_items(cfg: SyntheticConfig, rng: np.random.Generator) -> tuple[list[dict], dict[str, list[int]]]:
    collections = list(_COLLECTION_WEIGHTS)
    coll_p = np.array(list(_COLLECTION_WEIGHTS.values()))
    coll_p = coll_p / coll_p.sum()
    max_age_days = int(cfg.max_item_age_years * 365.25)
    classes = list(LC_CLASSES)

    items = []
    by_subclass: dict[str, list[int]] = {s: [] for s in _SUBCLASS_POOL}
    for i in range(cfg.n_items):
        if i < len(_SUBCLASS_POOL):
            # cover every subclass once before random draws
            subclass = _SUBCLASS_POOL[i]
            collection = Collection.BOOKS
        else:
            cls = classes[int(rng.integers(0, len(classes)))]
            subs = _CLASS_SUBCLASSES[cls]
            subclass = subs[int(rng.integers(0, len(subs)))]
            collection = collections[int(rng.choice(len(collections), p=coll_p))]
        age = int(rng.integers(0, max_age_days + 1))
        catalog = cfg.reference_date - dt.timedelta(days=age)
        if collection is Collection.FACILITIES_EQUIPMENT:
            call_number = f"EQUIP-{i:05d}"
            subclass = None
        else:
            call_number = _call_number(rng, subclass)
            by_subclass[subclass].append(i)
        items.append({
            "item_barcode": f"I{i:07d}",
            "title": f"Synthetic title {i}",
            "collection": collection,
            "call_number": call_number,
            "catalog_date": catalog,
            "subclass": subclass,
            "checkouts": [],
        })
    return items, by_subclass


def _checkout_date(cfg, rng, catalog_date: dt.date) -> dt.date:
    start = max(cfg.window_start, catalog_date)
    span = (cfg.reference_date - start).days
    return start + dt.timedelta(days=int(rng.integers(0, span + 1)))


def generate_synthetic(config: SyntheticConfig):
    """Generate ``(patrons, items, circulation, students)`` deterministically from the seed.

    Each base checkout goes to a uniformly chosen patron.  With probability
    ``subject_affinity`` the item comes from the dominant LC class of the
    borrower's faculty, otherwise from the whole catalogue.  Planted rules
    are then enforced on student baskets: among students holding the whole
    antecedent, enough are given a consequent item that the implication holds
    for at least the configured fraction of them.
    """
    cfg = config
    if cfg.n_checkouts > 0 and cfg.n_items == 0:
        raise ValueError("cannot generate checkouts without items")
    rng = np.random.default_rng(cfg.seed)

    fids = sorted(cfg.faculty_weights)
    fac_p = np.array([cfg.faculty_weights[f] for f in fids], dtype=float)
    fac_p = fac_p / fac_p.sum()
    years = list(ClassYear)

    students, patrons = [], []
    for i in range(cfg.n_students):
        fid = fids[int(rng.choice(len(fids), p=fac_p))]
        cgpa = round(float(np.clip(rng.normal(2.9, 0.5), 0.0, 4.0)), 2)
        sid = f"S{i:06d}"
        students.append(StudentRecord(sid, fid, cgpa))
        patrons.append(PatronRecord(sid, PatronType.UNDERGRADUATE, fid, years[int(rng.integers(0, 4))]))
    for i in range(cfg.n_other_patrons):
        fid = fids[int(rng.choice(len(fids), p=fac_p))]
        ptype = _OTHER_PATRON_TYPES[int(rng.choice(3, p=_OTHER_PATRON_WEIGHTS))]
        patrons.append(PatronRecord(f"P{i:06d}", ptype, fid, None))

    items, by_subclass = _generate_items(cfg, rng)
    by_class: dict[str, list[int]] = {c: [] for c in LC_CLASSES}
    for sub, idx in by_subclass.items():
        by_class[sub[0]].extend(idx)
    for idx in by_class.values():
        idx.sort()

    rows: list[tuple[dt.date, str, str]] = []

    def checkout(patron: str, item_index: int) -> None:
        item = items[item_index]
        day = _checkout_date(cfg, rng, item["catalog_date"])
        item["checkouts"].append(day)
        rows.append((day, patron, item["item_barcode"]))

    if patrons:
        for _ in range(cfg.n_checkouts):
            patron = patrons[int(rng.integers(0, len(patrons)))]
            pool = by_class[FACULTY_CLASS[patron.faculty_id]]
            if pool and rng.random() < cfg.subject_affinity:
                idx = pool[int(rng.integers(0, len(pool)))]
            else:
                idx = int(rng.integers(0, len(items)))
            checkout(patron.patron_barcode, idx)

    if cfg.planted_rules and students:
        holdings: dict[str, set[str]] = {s.student_id: set() for s in students}
        for _, patron, barcode in rows:
            if patron in holdings:
                sub = items[int(barcode[1:])]["subclass"]
                if sub is not None:
                    holdings[patron].add(sub)
        order = sorted(holdings)
        changed = True
        while changed:
            changed = False
            for rule in cfg.planted_rules:
                holders = [s for s in order if rule.antecedent <= holdings[s]]
                missing = [s for s in holders if rule.consequent not in holdings[s]]
                pool = by_subclass[rule.consequent]
                if not missing or not pool:
                    continue
                need = math.ceil(rule.probability * len(holders)) - (len(holders) - len(missing))
                if need <= 0:
                    continue
                chosen = rng.choice(len(missing), size=need, replace=False)
                for pos in sorted(int(c) for c in chosen):
                    sid = missing[pos]
                    checkout(sid, pool[int(rng.integers(0, len(pool)))])
                    holdings[sid].add(rule.consequent)
                changed = True

    item_records = []
    for item in items:
        dates = item["checkouts"]
        if dates:
            last_out = max(dates)
            loan = dt.timedelta(days=int(rng.integers(1, 29)))
            last_in = min(last_out + loan, cfg.reference_date)
        else:
            last_out = last_in = None
        item_records.append(ItemRecord(
            item_barcode=item["item_barcode"],
            title=item["title"],
            collection=item["collection"],
            call_number=item["call_number"],
            catalog_date=item["catalog_date"],
            last_checkin_date=last_in,
            last_checkout_date=last_out,
            total_checkouts=len(dates),
        ))

    rows.sort()
    circulation = [CirculationRecord(p, i, d) for d, p, i in rows]
    return Dataset(patrons, item_records, circulation, students)
