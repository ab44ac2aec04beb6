import datetime as dt
import json

import pytest
from hypothesis import given, strategies as st

from loanmine.datamodel import (
    CirculationRecord,
    ClassYear,
    Collection,
    ItemRecord,
    PatronRecord,
    PatronType,
    StudentRecord,
)
from loanmine.ingest import SyntheticConfig, generate_synthetic
from loanmine.report import (
    ReportTable,
    category_influencers,
    category_usage,
    checkout_share_by_collection,
    checkout_share_by_patron_type,
    checkouts_vs_cgpa,
    faculty_category_matrix,
    grade_category_distribution,
    lifespan_distribution,
    render,
    round_half_up,
    top_faculties,
)
from oracles import round_half_up_2

D = dt.date
DAY = D(2016, 3, 1)  # academic year 2015


def loan(p, i, day=DAY):
    return CirculationRecord(p, i, day)


def book(bc, call="QA1", coll=Collection.BOOKS, catalog=D(2000, 1, 1), checkin=D(2016, 1, 1), total=1):
    return ItemRecord(bc, "t", coll, call, catalog, checkin, checkin, total)


PATRONS = [
    PatronRecord("u1", PatronType.UNDERGRADUATE, 13, ClassYear.FRESHMAN),
    PatronRecord("u2", PatronType.UNDERGRADUATE, 4, ClassYear.SENIOR),
    PatronRecord("g1", PatronType.GRADUATE, 5),
    PatronRecord("s1", PatronType.ACADEMIC_STAFF, 13),
]


def test_patron_type_share():
    circ = [loan("u1", "i")] * 2 + [loan("u2", "i"), loan("g1", "i"), loan("s1", "i")]
    table = checkout_share_by_patron_type(circ, PATRONS, 2015)
    rows = {r[0]: r[1:] for r in table.rows}
    assert rows["Undergraduate"] == [60.0, 2]
    assert rows["Graduate"] == [20.0, 1]
    assert rows["Academic Staff"] == [20.0, 1]
    assert rows["Others"] == [0.0, 0]
    assert "60.00" in render(table, "csv")


def test_patron_type_share_respects_year():
    circ = [loan("u1", "i", D(2016, 7, 31)), loan("g1", "i", D(2016, 8, 1))]
    table = checkout_share_by_patron_type(circ, PATRONS, 2016)
    assert dict((r[0], r[1]) for r in table.rows)["Graduate"] == 100.0


def test_patron_type_share_empty_window():
    table = checkout_share_by_patron_type([loan("u1", "i")], PATRONS, 2019)
    assert table.rows == []
    assert table.caption.endswith("(no check-outs in window)")


def test_collection_share_by_patron_type():
    items = [book("b1"), book("e1", "EQUIP-1", Collection.FACILITIES_EQUIPMENT)]
    circ = [loan("u1", "b1"), loan("u1", "b1"), loan("u2", "b1"), loan("u2", "e1"), loan("g1", "e1")]
    table = checkout_share_by_collection(circ, items, PATRONS, 2015)
    col = table.columns.index("Undergraduate")
    by_coll = {r[0]: r for r in table.rows}
    assert by_coll["Books"][col] == 75.0
    assert by_coll["Facilities & Equipment"][col] == 25.0
    grad = table.columns.index("Graduate")
    assert by_coll["Facilities & Equipment"][grad] == 100.0
    totals = table.share_totals()
    assert all(t == 0 or abs(t - 100) <= 0.01 for t in totals)


def test_collection_share_by_class_year():
    items = [book("b1")]
    circ = [loan("u1", "b1"), loan("g1", "b1")]
    table = checkout_share_by_collection(circ, items, PATRONS, 2015, group_by="class_year")
    assert table.columns[1:] == [c.label for c in ClassYear]
    assert {r[0]: r[1] for r in table.rows}["Books"] == 100.0
    with pytest.raises(ValueError):
        checkout_share_by_collection(circ, items, PATRONS, 2015, group_by="nope")


def test_top_faculties():
    circ = [loan("u1", "i")] * 7 + [loan("u2", "i")] * 3 + [loan("g1", "i")] * 50
    table = top_faculties(circ, PATRONS, 2015, top_n=10)
    assert table.rows == [["Faculty of Science", 70.0], ["Faculty of Engineering", 30.0], ["Others", 0.0]]
    one = top_faculties(circ, PATRONS, 2015, top_n=1)
    assert one.rows == [["Faculty of Science", 70.0], ["Others", 30.0]]


def test_faculty_category_matrix_and_influencers():
    items = [book("k1", "KPT1"), book("q1", "QA1"), book("q2", "QD1")]
    circ = [loan("g1", "k1"), loan("u1", "q1"), loan("u1", "q2"), loan("u2", "q2")]
    matrix = faculty_category_matrix(circ, items, PATRONS, 2015)
    assert matrix.columns[:3] == ["IDs", "1", "2"]
    law = matrix.columns.index("5")
    rows = {r[0]: r for r in matrix.rows}
    assert rows["K"][law] == 100.0
    assert rows["Q"][matrix.columns.index("13")] == 100.0
    assert rows["Q"][matrix.columns.index("4")] == 100.0
    for t in matrix.share_totals():
        assert t == 0 or abs(t - 100) <= 0.01

    infl = {r[0]: r for r in category_influencers(matrix).rows}
    assert infl["Q"][2] == (4, 13)
    assert infl["K"][2] == (5,)
    assert infl["A"][2] == ()
    assert "| A | General Works | - |" in render(category_influencers(matrix), "markdown")


def test_influencers_order_by_share():
    matrix = ReportTable("m", ["IDs", "1", "2", "3"], [["Q", 10.0, 60.0, 0.5]])
    assert category_influencers(matrix).rows[0][2] == (2, 1)
    assert category_influencers(matrix, min_share=0.5).rows[0][2] == (2, 1, 3)
    with pytest.raises(ValueError):
        category_influencers(matrix, min_share=-1)


def test_grade_category_distribution():
    students = [StudentRecord("u1", 13, 3.7), StudentRecord("u2", 4, 2.2)]
    items = [book("q1", "QA1"), book("t1", "TA1")]
    circ = [loan("u1", "q1"), loan("u1", "q1"), loan("u2", "t1")]
    table = grade_category_distribution(circ, items, students, 2015)
    rows = {r[0]: r for r in table.rows}
    assert rows["Q"][table.columns.index("Excellent")] == pytest.approx(200 / 3)
    assert rows["T"][table.columns.index("Average")] == pytest.approx(100 / 3)
    assert table.share_totals() == [pytest.approx(100.0)]
    csv_text = render(table, "csv")
    assert "66.67" in csv_text and "33.33" in csv_text


def test_checkouts_vs_cgpa():
    students = [StudentRecord("u1", 13, 3.7), StudentRecord("u2", 4, 2.2)]
    circ = [loan("u1", "x"), loan("u1", "y"), loan("u2", "x"), loan("g1", "x")]
    assert checkouts_vs_cgpa(circ, students).rows == [["u1", 2, 3.7], ["u2", 1, 2.2]]


def test_category_usage():
    items = [book("a"), book("b"), book("c"), book("d", total=0, checkin=None),
             book("e", "EQUIP-1", Collection.FACILITIES_EQUIPMENT)]
    table = category_usage(items)
    rows = {r[0]: r for r in table.rows}
    assert rows["Q"][1:] == [4, 3, 1, 75.0, 25.0]
    assert rows["Unclassified"][1:4] == [1, 1, 0]
    assert rows["A"][1:] == [0, 0, 0, 0.0, 0.0]


def test_lifespan_distribution():
    items = [
        book("a", catalog=D(2013, 1, 1), checkin=D(2016, 6, 1)),   # 3 years
        book("b", catalog=D(2004, 1, 1), checkin=D(2016, 6, 1)),   # 12 years
        book("c", total=0, checkin=None),
    ]
    raw = {r[0]: r for r in lifespan_distribution(items).rows}
    assert raw["Q"][1:] == [1, 0, 1, 0, 1]
    pct = lifespan_distribution(items, remove_uncirculated=True)
    assert pct.rows == [["Q", 50.0, 50.0]]


@pytest.mark.parametrize("value", ["63.1391", "63.135", "0.005", "2.675", "99.995", "0.0"])
def test_round_half_up_matches_oracle(value):
    assert round_half_up(float(value)) == round_half_up_2(value)


@given(st.decimals(0, 100, places=4))
def test_round_half_up_property(value):
    assert round_half_up(float(str(value))) == round_half_up_2(str(value))


def test_render_formats():
    table = ReportTable("Cap|tion", ["a", "b"], [["x", 63.1391], ["y", (1, 2)]], {1}, (1,), "column")
    assert render(table, "csv") == "a,b\r\nx,63.14\r\ny,\"1,2\"\r\n"
    doc = json.loads(render(table, "json"))
    assert doc["rows"][0][1] == 63.1391 and doc["formatted_rows"][0][1] == "63.14"
    assert render(table, "markdown").startswith("**Cap\\|tion**")
    with pytest.raises(ValueError):
        render(table, "xlsx")


def test_row_arity_checked():
    with pytest.raises(ValueError):
        ReportTable("c", ["a", "b"], [["x"]])


def _all_reports(data, year=None):
    circ, items, patrons, students = data.circulation, data.items, data.patrons, data.students
    matrix = faculty_category_matrix(circ, items, patrons, year)
    return [
        checkout_share_by_patron_type(circ, patrons, year),
        checkout_share_by_collection(circ, items, patrons, year),
        checkout_share_by_collection(circ, items, patrons, year, "class_year"),
        top_faculties(circ, patrons, year),
        matrix,
        category_influencers(matrix),
        grade_category_distribution(circ, items, students, year),
        checkouts_vs_cgpa(circ, students, year),
        category_usage(items),
        lifespan_distribution(items),
        lifespan_distribution(items, True),
    ]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_share_columns_sum_to_100_on_synthetic(seed):
    data = generate_synthetic(SyntheticConfig(seed=seed, n_students=120, n_other_patrons=40, n_checkouts=1500))
    for year in (None, 2016):
        for table in _all_reports(data, year):
            for total in table.share_totals():
                assert total == 0 or abs(total - 100) <= 0.01, table.caption
            for fmt in ("csv", "json", "markdown"):
                assert render(table, fmt) == render(table, fmt)
