"""Published reference enclosures and expansion orders, loaded from package data."""

from __future__ import annotations

import re
from fractions import Fraction
from functools import cache
from importlib import resources

from .interval import Interval

__all__ = [
    "REGION_COLUMNS",
    "decode_shorthand",
    "decimal_interval",
    "reference_table",
    "expansion_orders",
    "SIGN_REFERENCES",
    "SECOND_DERIVATIVE_REFERENCE",
    "SECOND_DERIVATIVE_LOWER_BOUND",
]

# Column order of the per-term reference layout (also the CSV report layout).
REGION_COLUMNS = ("bounded-region", "singularity-center", "singularity-y-axis", "singularity-z-axis")

_SHORTHAND = re.compile(r"(-?)([0-9.]*)\^\{([0-9.]+)\}_\{([0-9.]+)\}")
_BRACKET = re.compile(r"\[([^,\]]+),([^,\]]+)\]")


def decimal_interval(lo: str | Fraction, hi: str | Fraction | None = None) -> Interval:
    """Tightest machine interval containing the decimal interval ``[lo, hi]``."""
    a = Fraction(lo)
    b = a if hi is None else Fraction(hi)
    if a > b:
        a, b = b, a
    return Interval.coerce(a).hull(Interval.coerce(b))


def decode_shorthand(text: str) -> tuple[Fraction, Fraction]:
    """Exact endpoints of ``base^{sup}_{sub}`` or ``[lo,hi]``.

    The superscript and subscript replace the trailing digits of ``base``;
    the endpoints are returned in increasing order.

    >>> decode_shorthand("-21.93^{58}_{09}")
    (Fraction(-219358, 10000), Fraction(-219309, 10000))
    """
    s = text.replace(" ", "").replace("−", "-")
    m = _SHORTHAND.fullmatch(s)
    if m:
        sign, base, sup, sub = m.groups()
        a = Fraction(sign + base + sup)
        b = Fraction(sign + base + sub)
        return min(a, b), max(a, b)
    m = _BRACKET.fullmatch(s)
    if m:
        a, b = Fraction(m.group(1)), Fraction(m.group(2))
        if a > b:
            raise ValueError(f"reversed interval literal {text!r}")
        return a, b
    raise ValueError(f"unrecognized enclosure literal {text!r}")


def _data_lines(name: str):
    text = resources.files("rigorquad.data").joinpath(name).read_text(encoding="utf-8")
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


@cache
def _raw_table() -> dict[str, tuple[str, ...]]:
    rows = {}
    for line in _data_lines("reference_enclosures.txt"):
        term, *cells = (c.strip() for c in line.split("|"))
        if len(cells) != len(REGION_COLUMNS):
            raise ValueError(f"malformed reference row for {term}")
        rows[term] = tuple(cells)
    return rows


@cache
def reference_table() -> dict[tuple[str, str], Interval]:
    """Map ``(term, region column)`` to the published enclosure."""
    table = {}
    for term, cells in _raw_table().items():
        for column, cell in zip(REGION_COLUMNS, cells):
            lo, hi = decode_shorthand(cell)
            table[(term, column)] = decimal_interval(lo, hi)
    return table


def reference_literals() -> dict[tuple[str, str], str]:
    return {(t, col): c for t, cells in _raw_table().items() for col, c in zip(REGION_COLUMNS, cells)}


def degenerate_references() -> list[tuple[str, str]]:
    """Reference cells printed with zero width (likely typesetting slips)."""
    out = []
    for (term, column), literal in reference_literals().items():
        lo, hi = decode_shorthand(literal)
        if lo == hi:
            out.append((term, column))
    return out


@cache
def expansion_orders() -> dict[str, tuple[int, int, int, int]]:
    """``term -> (num_y, num_z, den_y, den_z)`` for the two-variable terms."""
    orders = {}
    for line in _data_lines("expansion_orders.txt"):
        term, *vals = line.split()
        orders[term] = tuple(int(v) for v in vals)
    return orders


# One-variable sign checks, keyed by the amplitude parameter.
SIGN_REFERENCES = {
    "1.08050": decimal_interval("0.00001", "0.00027"),
    "1.08055": decimal_interval("-0.00028", "-0.00002"),
}
SECOND_DERIVATIVE_REFERENCE = decimal_interval("38.706", "48.787")
SECOND_DERIVATIVE_LOWER_BOUND = 30.0
