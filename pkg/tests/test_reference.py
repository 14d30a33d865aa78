from fractions import Fraction

import pytest

from rigorquad.interval import Interval
from rigorquad.muskat import TWO_D_TERMS
from rigorquad.reference import (
    REGION_COLUMNS,
    SECOND_DERIVATIVE_REFERENCE,
    SIGN_REFERENCES,
    decimal_interval,
    decode_shorthand,
    degenerate_references,
    expansion_orders,
    reference_literals,
    reference_table,
)

F = Fraction


@pytest.mark.parametrize(
    ("text", "lo", "hi"),
    [
        ("-21.93^{58}_{09}", "-21.9358", "-21.9309"),
        ("1^{4.9}_{5.1}", "14.9", "15.1"),
        ("68^{5.1}_{7.2}", "685.1", "687.2"),
        ("-13.35^{59}_{12}", "-13.3559", "-13.3512"),
        ("0.000^{01}_{27}", "0.00001", "0.00027"),
        ("-0.000^{28}_{02}", "-0.00028", "-0.00002"),
        ("0.04^{29}_{29}", "0.0429", "0.0429"),
    ],
)
def test_decode_shorthand(text, lo, hi):
    assert decode_shorthand(text) == (F(lo), F(hi))


def test_decoded_cells_from_the_table():
    table = reference_table()
    assert table[("B11", "bounded-region")].contains(F("-21.9358"))
    assert table[("B11", "bounded-region")].contains(F("-21.9309"))
    assert table[("B47", "singularity-z-axis")] == decimal_interval("3.7", "4.7")
    assert table[("B16", "bounded-region")] == decimal_interval("14.9", "15.1")
    assert table[("B71", "singularity-center")] == decimal_interval("-8.1e-10", "8.0e-10")
    assert table[("B45", "singularity-z-axis")] == decimal_interval("-4.2", "-3.8")


def test_decimal_enclosures_are_outward():
    iv = decimal_interval("0.1", "0.3")
    assert iv.contains(F(1, 10)) and iv.contains(F(3, 10))
    assert decimal_interval("0.5") == Interval(0.5, 0.5)


def test_table_is_complete():
    table = reference_table()
    assert len(table) == 41 * 4
    assert {t for t, _ in table} == set(TWO_D_TERMS)
    assert {c for _, c in table} == set(REGION_COLUMNS)
    for key, iv in table.items():
        assert iv.lo <= iv.hi, key
    assert set(reference_literals()) == set(table)


def test_table_midpoints_sum_inside_published_total():
    mids = sum((F(iv.lo) + F(iv.hi)) / 2 for iv in reference_table().values())
    assert SECOND_DERIVATIVE_REFERENCE.contains(mids)


def test_degenerate_cell_is_flagged():
    assert degenerate_references() == [("B75", "singularity-z-axis")]
    assert reference_table()[("B75", "singularity-z-axis")].width < 1e-15


def test_duplicate_rows():
    table = reference_table()
    for a, b in (("B21", "B14"), ("B31", "B15")):
        assert all(table[(a, c)] == table[(b, c)] for c in REGION_COLUMNS)


def test_sign_references():
    assert SIGN_REFERENCES["1.08050"] == decimal_interval("0.00001", "0.00027")
    assert SIGN_REFERENCES["1.08055"] == decimal_interval("-0.00028", "-0.00002")


def test_expansion_orders_table():
    orders = expansion_orders()
    assert set(orders) == set(TWO_D_TERMS)
    assert orders["B11"] == (6, 4, 2, 4)
    assert orders["B47"] == orders["B55"] == (2, 12, 2, 12)
