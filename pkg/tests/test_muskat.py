import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigorquad import muskat, oracle
from rigorquad.interval import PI, Interval
from rigorquad.muskat import (
    A_RANGE,
    EPS_RANGE,
    ONE_D_TERMS,
    SPECIAL_TERMS,
    TWO_D_TERMS,
    Block,
    CurveParams,
    PlanConfig,
    UnknownTerm,
    curve_eval,
    get_term,
    region_plan,
    registry,
    validate_orders,
)
from rigorquad.quad import Region, adaptive_integrate
from rigorquad.reference import (
    SIGN_REFERENCES,
    decimal_interval,
    expansion_orders,
    reference_table,
)
from rigorquad.taylor import Jet

POINT_050 = CurveParams(eps=Interval(0, 0), A=decimal_interval("1.08050"))


def mp_fraction(x) -> Fraction:
    x = mpmath.mpf(x)
    man, exp = x.man_exp  # unsigned mantissa
    return (-1 if x < 0 else 1) * Fraction(int(man)) * Fraction(2) ** exp


# ---------------------------------------------------------------------------
# curve


def test_curve_at_origin():
    a = decimal_interval("1.08052")
    c = curve_eval(CurveParams(eps=Interval(0, 0), A=a), 0.0)
    assert c["z1"] == Interval(0, 0) and c["z1_x"] == Interval(0, 0) and c["z2"] == Interval(0, 0)
    assert c["z2_x"].contains(2 * Fraction("1.08052"))
    assert c["z2_x"].width <= 4 * math.ulp(2.2)


def test_curve_slope_at_origin_is_minus_eps():
    eps = 1e-7
    c = curve_eval(CurveParams(eps=Interval(eps, eps), A=A_RANGE), 0.0)
    # 1 - (1 + eps) cancels, so the width is governed by ulp(1)
    assert c["z1_x"].contains(Fraction(-eps)) and c["z1_x"].width <= 2 * math.ulp(1.0)


def test_curve_at_pi():
    eps = 5e-7
    c = curve_eval(CurveParams(eps=Interval(eps, eps), A=A_RANGE), PI)
    assert c["z1_x"].contains(Fraction(2) + Fraction(eps))
    assert c["z1_x"].width < 1e-14


@given(x=st.floats(-4, 4), eps=st.floats(0, 1e-6))
def test_curve_closed_forms(x, eps):
    p = CurveParams(eps=Interval(eps, eps), A=decimal_interval("1.08053"))
    c = curve_eval(p, x)
    mpmath.mp.dps = 40
    X, E, A = mpmath.mpf(x), mpmath.mpf(eps), mpmath.mpf("1.08053")
    exact = {
        "z1": X - (1 + E) * mpmath.sin(X),
        "z1_x": 1 - (1 + E) * mpmath.cos(X),
        "z1_xx": (1 + E) * mpmath.sin(X),
        "z1_xxx": (1 + E) * mpmath.cos(X),
        "z2": A * mpmath.sin(2 * X),
        "z2_x": 2 * A * mpmath.cos(2 * X),
        "z2_xx": -4 * A * mpmath.sin(2 * X),
    }
    for k, v in exact.items():
        assert c[k].contains(mp_fraction(v)), k


@given(x=st.floats(0, 4))
def test_curve_is_odd(x):
    p = CurveParams()
    plus, minus = curve_eval(p, x), curve_eval(p, -x)
    for k in ("z1", "z2", "z1_xx", "z2_xx"):
        assert minus[k] == -plus[k]
    for k in ("z1_x", "z1_xxx", "z2_x"):
        assert minus[k] == plus[k]


def test_curve_params_validation():
    with pytest.raises(ValueError):
        CurveParams(eps=Interval(-1e-9, 0))
    with pytest.raises(ValueError):
        CurveParams(eps=Interval(0, 2e-6))
    with pytest.raises(ValueError):
        CurveParams(A=Interval(1.0, 1.1))
    assert CurveParams.at("1.08055").eps == EPS_RANGE


# ---------------------------------------------------------------------------
# registry


def test_registry_counts_and_ids():
    reg = registry()
    assert ONE_D_TERMS == ("A1", "A2", "A3")
    expected = [f"B{g}{k}" for g, n in ((1, 6), (2, 5), (3, 5), (4, 7), (5, 5), (6, 7), (7, 6))
                for k in range(1, n + 1)]
    assert list(TWO_D_TERMS) == expected
    assert len(reg) == 44
    assert all(reg[t].arity == 1 for t in ONE_D_TERMS)
    assert all(reg[t].arity == 2 for t in TWO_D_TERMS)


def test_declared_orders():
    table = expansion_orders()
    for term in TWO_D_TERMS:
        assert get_term(term).orders == table[term]
    assert [get_term(t).orders[0::2] for t in ONE_D_TERMS] == [(2, 2), (2, 2), (4, 4)]


def test_block_structure_reproduces_order_table():
    table = expansion_orders()
    assert {t: get_term(t).derived_orders() for t in TWO_D_TERMS} == table


@pytest.mark.parametrize("term", list(ONE_D_TERMS) + list(TWO_D_TERMS))
def test_vanishing_orders(term):
    assert validate_orders(term) == []


def test_validation_detects_wrong_orders(monkeypatch):
    spec = get_term("B11")
    wrong = muskat.IntegrandSpec("B11x", 2, spec.factor, spec.outer, spec.inner, (6, 4, 3, 4), 2)
    reg = {**registry(), "B11x": wrong}
    monkeypatch.setattr(muskat, "registry", lambda: reg)
    problems = validate_orders("B11x")
    assert any("denominator" in msg and "does not vanish" in msg for msg in problems)


def test_unknown_term():
    with pytest.raises(UnknownTerm) as info:
        get_term("B99")
    assert "B99" in str(info.value)


def test_block_parse_round_trip():
    b = Block.parse("S*d1x^2/D")
    assert str(Block.parse(str(b))) == str(b)
    with pytest.raises(ValueError):
        Block.parse("S*bogus/D")


def test_factors():
    assert get_term("A3").factor == -2 and get_term("A3").symmetry_factor == 1
    assert get_term("B47").factor == 2 and get_term("B47").symmetry_factor == 2
    assert get_term("B47").multiplier == 4.0


# ---------------------------------------------------------------------------
# region plans


def test_one_d_plan():
    plan = region_plan(1, "A1", PlanConfig.one_d())
    assert [e.column for e in plan] == ["singular", "nonsingular"]
    (s, n) = (e.region for e in plan)
    assert s.box_y == Interval(0, 2.0**-9) and s.method == "taylor_singular" and s.max_depth == 12
    assert n.ends("y")[0] == Interval(2.0**-9, 2.0**-9) and n.ends("y")[1] == PI
    assert n.method == "gauss_legendre" and n.max_depth == 18


def test_two_d_plan_counts():
    cfg = PlanConfig.two_d()
    plan = region_plan(2, "B11", cfg)
    columns = [e.column for e in plan]
    assert columns.count("bounded-region") == 2
    assert columns.count("singularity-center") == 1
    assert columns.count("singularity-y-axis") == 2
    assert columns.count("singularity-z-axis") == 3
    z_axis = [e.region for e in plan if e.column == "singularity-z-axis"]
    assert [r.split_y for r in z_axis] == ["arithmetic", "arithmetic", "geometric"]
    assert all(r.max_depth == 9 for r in z_axis)
    for term in SPECIAL_TERMS:
        z_axis = [e.region for e in region_plan(2, term, cfg) if e.column == "singularity-z-axis"]
        assert len(z_axis) == 6 and all(r.max_depth == 10 for r in z_axis)
        assert [r.split_y for r in z_axis][-2:] == ["geometric", "geometric"]
        assert [r.ends("y")[0].lo for r in z_axis] == [2.0**-5, 0.325, 0.65, 0.775, 0.95, 1.5]


@pytest.mark.parametrize("term", ["B11", "B47"])
def test_two_d_plan_tiles_the_domain(term):
    cfg = PlanConfig.two_d()
    d = cfg.delta
    plan = region_plan(2, term, cfg)
    area = Fraction(0)
    boxes = []
    for e in plan:
        (ya, yb), (za, zb) = e.region.ends("y"), e.region.ends("z")
        # exact rectangles, with pi replaced by a symbol-free stand-in of 4
        to_f = lambda end: Fraction(4) if end == PI else -Fraction(4) if end == -PI else Fraction(end.lo)
        box = (to_f(ya), to_f(yb), to_f(za), to_f(zb))
        assert box[0] < box[1] and box[2] < box[3]
        boxes.append(box)
        area += (box[1] - box[0]) * (box[3] - box[2])
    assert area == 4 * 8
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            overlap_y = min(a[1], b[1]) - max(a[0], b[0])
            overlap_z = min(a[3], b[3]) - max(a[2], b[2])
            assert overlap_y <= 0 or overlap_z <= 0
    centers = [e.region for e in plan if e.column == "singularity-center"]
    assert centers[0].box_y == Interval(0, d) and centers[0].box_z == Interval(-d, d)


def test_plan_validation():
    with pytest.raises(UnknownTerm):
        region_plan(2, "C1", PlanConfig.two_d())
    with pytest.raises(ValueError):
        PlanConfig.two_d(abs_tol=0)
    with pytest.raises(ValueError):
        PlanConfig.two_d(delta=1.0)


def test_manifest():
    m = muskat.manifest()
    assert m["schema"] == "rigorquad.manifest/1"
    assert len(m["terms"]) == 44
    b47 = next(t for t in m["terms"] if t["id"] == "B47")
    assert b47["orders"] == {"num_y": 2, "num_z": 12, "den_y": 2, "den_z": 12}
    assert sum(r["column"] == "singularity-z-axis" for r in b47["regions"]) == 6


# ---------------------------------------------------------------------------
# integrals against the oracle


# tanh-sinh at 20 digits is far more accurate than a float enclosure is wide
ORACLE_SLACK = Fraction(1, 10**18)


def oracle_contained(enc: Interval, exact) -> bool:
    x = mp_fraction(exact)
    slack = ORACLE_SLACK * max(1, abs(x))
    return Fraction(enc.lo) - slack <= x <= Fraction(enc.hi) + slack


def _point(spec, y, z):
    jy = Jet.constant(Interval(y, y), 0, 0)
    if spec.arity == 1:
        return spec.value(POINT_050, jy).interval()
    return spec.value(POINT_050, jy, Jet.constant(Interval(z, z), 0, 0)).interval()


@pytest.mark.parametrize("term", list(ONE_D_TERMS) + list(TWO_D_TERMS))
def test_point_values_match_oracle(term):
    spec = get_term(term)
    for y, z in ((0.3, 0.9), (1.7, -2.2), (2.9, 0.05)):
        exact = oracle.integrand_value(term, y, None if spec.arity == 1 else z, eps=0, A="1.08050")
        assert _point(spec, y, z).contains(mp_fraction(exact)), (term, y, z)


@pytest.mark.parametrize("term", ONE_D_TERMS)
def test_one_d_cell_against_oracle(term):
    f = get_term(term).integrand(POINT_050)
    got = adaptive_integrate(f, Region(Interval(0.5, 0.625), max_depth=4), 1e-12, 1e-12).enclosure
    assert oracle_contained(got, oracle.integrate_box(term, (0.5, 0.625), eps=0, A="1.08050"))


def test_a3_singular_cell_against_oracle():
    f = get_term("A3").integrand(POINT_050)
    h = 2.0**-9
    got = adaptive_integrate(f, Region(Interval(0, h), method="taylor_singular", max_depth=0), 1.0, 1.0)
    exact = oracle.integrate_box("A3", (0, h), A="1.08050", eps=0)
    assert oracle_contained(got.enclosure, exact)


def test_b24_cell_against_oracle():
    f = get_term("B24").integrand(POINT_050)
    got = adaptive_integrate(f, Region(Interval(1, 1.1), Interval(1, 1.1), max_depth=3), 1e-9, 1e-9)
    exact = oracle.integrate_box("B24", (1, 1.1), (1, 1.1), A="1.08050", eps=0, degree=4)
    assert oracle_contained(got.enclosure, exact)


@pytest.mark.parametrize(("amp", "sign"), [("1.08050", 1), ("1.08055", -1)])
def test_first_derivative_sign(amp, sign):
    res = muskat.dtx_at_zero(CurveParams.at(amp))
    enc = res.enclosure
    assert enc.is_positive() if sign > 0 else enc.is_negative()
    assert enc.intersects(SIGN_REFERENCES[amp])


def test_b11_singular_center_matches_reference():
    res = muskat.integrate_term("B11", CurveParams(), PlanConfig.two_d(), columns=["singularity-center"])
    enc = res["singularity-center"].enclosure
    assert enc.intersects(reference_table()[("B11", "singularity-center")])
    assert math.isfinite(enc.lo) and math.isfinite(enc.hi)


@settings(max_examples=25, deadline=None)
@given(term=st.sampled_from(TWO_D_TERMS), y=st.floats(0.05, 3.0), z=st.floats(0.05, 3.0), flip=st.booleans())
def test_integrand_enclosures_contain_point_values(term, y, z, flip):
    z = -z if flip else z
    exact = oracle.integrand_value(term, y, z, eps=0, A="1.08050")
    assert _point(get_term(term), y, z).contains(mp_fraction(exact))


def test_b45_z_axis_matches_reference():
    res = muskat.integrate_term("B45", CurveParams(), PlanConfig.two_d(), columns=["singularity-z-axis"])
    enc = res["singularity-z-axis"].enclosure
    assert enc.intersects(Interval(-4.2, -3.8))
