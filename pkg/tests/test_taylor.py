from math import factorial

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigorquad.interval import DivisionByZeroInterval, Interval
from rigorquad.taylor import MAX_ORDER, Jet, derivative_enclosure, jet_var, jet_vars

mpmath.mp.dps = 40


# mpmath.diff/diffs differentiate numerically; at 40 digits their error is
# around 1e-40, so oracle values carry this allowance
ORACLE_SLACK = mpmath.mpf("1e-30")


def encloses(iv: Interval, x, slack=ORACLE_SLACK) -> bool:
    return mpmath.mpf(iv.lo) - slack <= x <= mpmath.mpf(iv.hi) + slack


def test_seeding():
    x = jet_var(Interval(0, 0), 2)
    assert x.coeffs == [Interval(0, 0), Interval(1, 1), Interval(0, 0)]
    d = 1e-3
    x = jet_var(Interval(-d, d), 4)
    assert x.coeffs == [Interval(-d, d), Interval(1, 1)] + [Interval(0, 0)] * 3
    with pytest.raises(ValueError):
        jet_var(Interval(0, 1), MAX_ORDER + 1)


def test_maclaurin_examples():
    s = jet_var(Interval(0, 0), 3).sin()
    for c, exact in zip(s.coeffs, (0, 1, 0, mpmath.mpf(-1) / 6)):
        assert encloses(c, exact, slack=0)
        assert c.width < 1e-15
    c = jet_var(Interval(0, 0), 2).cosh()
    for got, exact in zip(c.coeffs, (1, 0, mpmath.mpf(1) / 2)):
        assert encloses(got, exact, slack=0)


def test_identity_quotient():
    x = jet_var(Interval(1, 1), 4)
    q = x / x
    assert q.coeffs[0].contains(1)
    for c in q.coeffs[1:]:
        assert c.contains(0) and c.width < 1e-14


def test_division_needs_invertible_constant_term():
    x = jet_var(Interval(-1, 1), 3)
    with pytest.raises(DivisionByZeroInterval):
        derivative_enclosure(lambda t: 1 / t, Interval(-1, 1), 2)
    assert not np.all(np.isfinite((1 / x).lo))


EXPRESSIONS = {
    "sin": (lambda t: t.sin(), mpmath.sin),
    "cos*sinh": (lambda t: t.cos() * t.sinh(), lambda t: mpmath.cos(t) * mpmath.sinh(t)),
    "cosh-cos": (lambda t: t.cosh() - t.cos(), lambda t: mpmath.cosh(t) - mpmath.cos(t)),
    "rational": (lambda t: (t * t + 3) / (t.scale(2.0) + 5), lambda t: (t * t + 3) / (2 * t + 5)),
    "nested": (lambda t: (t.sin() * 3).cos(), lambda t: mpmath.cos(3 * mpmath.sin(t))),
    "power": (lambda t: (t - 0.5) ** 5, lambda t: (t - mpmath.mpf(0.5)) ** 5),
}


def exact_coeffs(g, x0, n):
    return [d / factorial(k) for k, d in enumerate(mpmath.diffs(g, x0, n))]


@pytest.mark.parametrize("name", sorted(EXPRESSIONS))
@given(x0=st.floats(-1.5, 1.5))
def test_point_coefficient_containment(name, x0):
    f, g = EXPRESSIONS[name]
    n = 8
    jet = f(jet_var(Interval(x0, x0), n))
    for got, exact in zip(jet.coeffs, exact_coeffs(g, mpmath.mpf(x0), n)):
        assert encloses(got, exact)


def test_sin_coefficients_at_point_three():
    jet = jet_var(Interval.point(0.3), 10).sin()
    for got, exact in zip(jet.coeffs, exact_coeffs(mpmath.sin, mpmath.mpf(0.3), 10)):
        assert encloses(got, exact)
        assert got.width < 1e-14


@pytest.mark.parametrize("name", sorted(EXPRESSIONS))
@given(lo=st.floats(-1.5, 1.4), w=st.floats(0, 0.1))
def test_box_coefficients_enclose_every_point(name, lo, w):
    f, g = EXPRESSIONS[name]
    n = 6
    box = Interval(lo, lo + w)
    jet = f(jet_var(box, n))
    for x in (box.lo, box.midpoint, box.hi):
        for got, exact in zip(jet.coeffs, exact_coeffs(g, mpmath.mpf(x), n)):
            assert encloses(got, exact)


@given(lo=st.floats(-1, 1), w=st.floats(0, 0.5), grow=st.floats(0, 0.5))
def test_box_isotonicity(lo, w, grow):
    f = EXPRESSIONS["rational"][0]
    inner = f(jet_var(Interval(lo, lo + w), 5))
    outer = f(jet_var(Interval(lo - grow, lo + w + grow), 5))
    for a, b in zip(inner.coeffs, outer.coeffs):
        assert b.lo <= a.lo and a.hi <= b.hi


@given(lo=st.floats(-2, 2), w=st.floats(0, 0.3), k=st.integers(0, 6))
def test_derivative_enclosure(lo, w, k):
    box = Interval(lo, lo + w)
    d = derivative_enclosure(lambda t: t.sin() * t.cosh(), box, k)
    g = lambda t: mpmath.sin(t) * mpmath.cosh(t)
    for x in (box.lo, box.midpoint, box.hi):
        assert encloses(d, mpmath.diff(g, mpmath.mpf(x), k))


def test_bivariate_coefficients():
    y0, z0 = 0.4, -0.7
    y, z = jet_vars(Interval.point(y0), Interval.point(z0), 4, 4)
    jet = (y - z).sin() * (y * z).cosh()
    g = lambda a, b: mpmath.sin(a - b) * mpmath.cosh(a * b)
    for j in range(5):
        for k in range(5):
            exact = mpmath.diff(g, (mpmath.mpf(y0), mpmath.mpf(z0)), (j, k)) / (factorial(j) * factorial(k))
            assert encloses(jet.interval(j, k), exact), (j, k)


def test_order_zero_variable_is_a_constant():
    _, z = jet_vars(Interval(0.1, 0.2), Interval(1.0, 1.5), 3, 0)
    assert z.extent == (1, 1)
    assert z.interval(0, 0) == Interval(1.0, 1.5)


def test_batched_matches_scalar():
    boxes = np.array([0.1, 0.5, 1.2]), np.array([0.2, 0.6, 1.25])
    batched = jet_var(boxes, 5).sin() * 2
    for i in range(3):
        single = jet_var(Interval(boxes[0][i], boxes[1][i]), 5).sin() * 2
        for j in range(6):
            lo, hi = batched.coeff(j)
            assert (lo[i], hi[i]) == (single.interval(j).lo, single.interval(j).hi)


def test_from_coeffs_round_trip():
    j = Jet.from_coeffs([Interval(1, 2), 0.5, Interval(-1, 0)])
    assert j.coeffs == [Interval(1, 2), Interval(0.5, 0.5), Interval(-1, 0)]
    with pytest.raises(IndexError):
        j.coeff(3)
