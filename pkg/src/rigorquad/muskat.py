"""Interface-curve integrals of the Muskat stability-shifting computation.

The initial interface is ``z1(x) = x - (1 + eps) sin x``, ``z2(x) = A sin 2x``.
The first time derivative of the slope at the origin is a sum of three
one-variable integrals (A1..A3); the second time derivative is a sum of 41
two-variable integrals (B11..B76). Every integrand is built from the same few
blocks evaluated on differences of the curve between a base point and a
shifted point:

    S, C   = sin, cos of the z1-difference
    SH, CH = sinh, cosh of the z2-difference
    D      = CH - C                       (vanishes quadratically at the singularity)
    d1x, d1xx, d1xxx, d2x, d2xx           differences of the curve derivatives
    BR     = SH * d2x + S * d1x

A two-variable term is ``factor * P(y) * (Q(0, z) - Q(-y, z))`` where ``P``
uses the outer difference (base 0, shift -y) and ``Q(b, z)`` the inner one
(base b, shift b - z). ``P`` and ``Q`` are quotients ``product / D**k``,
written in a small expression syntax such as ``"S*d1x^2/D"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import cache, cached_property

import numpy as np

from . import quad
from .interval import PI, Interval, fsum_bounds
from .quad import Integrand, QuadResult, Region
from .reference import decimal_interval, expansion_orders
from .taylor import Jet, jet_vars

__all__ = [
    "CurveParams",
    "CurveJet",
    "curve_eval",
    "Block",
    "IntegrandSpec",
    "PlanConfig",
    "PlanEntry",
    "registry",
    "get_term",
    "region_plan",
    "integrate_term",
    "integrate_entry",
    "combine",
    "dtx_at_zero",
    "dttx_at_zero",
    "validate_orders",
    "manifest",
    "UnknownTerm",
    "ONE_D_TERMS",
    "TWO_D_TERMS",
    "SPECIAL_TERMS",
]


class UnknownTerm(KeyError):
    """Raised for a term id outside the registry."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown term"


# ---------------------------------------------------------------------------
# curve family

EPS_RANGE = Interval(0.0, decimal_interval("1e-6").hi)
A_RANGE = decimal_interval("1.08050", "1.08055")


@dataclass(frozen=True)
class CurveParams:
    """Perturbation size ``eps`` and amplitude ``A`` of the initial curve."""

    eps: Interval = EPS_RANGE
    A: Interval = A_RANGE

    def __post_init__(self):
        if self.eps.lo < 0 or self.eps.hi > EPS_RANGE.hi:
            raise ValueError(f"eps must lie in [0, 1e-6], got {self.eps}")
        if not (A_RANGE.lo <= self.A.lo and self.A.hi <= A_RANGE.hi):
            raise ValueError(f"A must lie in [1.08050, 1.08055], got {self.A}")

    @classmethod
    def at(cls, A: str, eps: Interval | None = None) -> CurveParams:
        """Parameters with amplitude given as a decimal string, e.g. ``"1.08050"``."""
        return cls(eps=EPS_RANGE if eps is None else eps, A=decimal_interval(A))


@dataclass(frozen=True)
class CurveJet:
    """Curve value and derivatives at a point (or over a jet)."""

    z1: Jet
    z1_x: Jet
    z1_xx: Jet
    z1_xxx: Jet
    z2: Jet
    z2_x: Jet
    z2_xx: Jet


def curve_eval(p: CurveParams, x):
    """Curve and derivatives at ``x``.

    ``x`` may be a :class:`Jet` (the result holds jets) or a scalar/Interval
    (the result holds Intervals).
    """
    scalar = not isinstance(x, Jet)
    if scalar:
        x = Jet.constant(Interval.coerce(x), 0, 0)
    one_eps = 1.0 + Jet.constant(p.eps, x.ny, x.nz)
    s, c = x.sincos()
    s2, c2 = x.scale(2.0).sincos()
    a = Jet.constant(p.A, x.ny, x.nz)
    out = CurveJet(
        z1=x - one_eps * s,
        z1_x=1.0 - one_eps * c,
        z1_xx=one_eps * s,
        z1_xxx=one_eps * c,
        z2=a * s2,
        z2_x=(a * c2).scale(2.0),
        z2_xx=(a * s2).scale(-4.0),
    )
    if scalar:
        return {k: getattr(out, k).interval() for k in out.__dataclass_fields__}
    return out


# ---------------------------------------------------------------------------
# difference kernels


class Kernel:
    """Blocks built from ``curve(b) - curve(b - h)``.

    The differences use sum-to-product forms, e.g.
    ``sin b - sin(b - h) = 2 cos(b - h/2) sin(h/2)``, so they vanish exactly
    at ``h = 0`` even when ``b`` is a wide interval. The arithmetic hooks
    (``_sin``, ``_sincos``, ``_sinhcosh``, ``_const``) let other number types
    reuse the same formulas.
    """

    def __init__(self, p: CurveParams, base, h):
        self.p = p
        self.base = base
        self.h = h

    # number-type hooks

    def _const(self, value):
        return Jet.constant(value, self.h.ny, self.h.nz)

    @staticmethod
    def _sin(x):
        return x.sin()

    @staticmethod
    def _sincos(x):
        return x.sincos()

    @staticmethod
    def _sinhcosh(x):
        return x.sinhcosh()

    # differences of sin x, cos x, sin 2x, cos 2x

    @cached_property
    def _mid(self):
        return self.base - self.h * 0.5

    @cached_property
    def _diff1(self):
        s, c = self._sincos(self._mid)
        half = 2 * self._sin(self.h * 0.5)
        return c * half, -(s * half)

    @cached_property
    def _diff2(self):
        s, c = self._sincos(self._mid * 2.0)
        full = 2 * self._sin(self.h)
        return c * full, -(s * full)

    @cached_property
    def _one_eps(self):
        return 1 + self._const(self.p.eps)

    @cached_property
    def _amp(self):
        return self._const(self.p.A)

    @cached_property
    def d1(self):
        return self.h - self._one_eps * self._diff1[0]

    @cached_property
    def d2(self):
        return self._amp * self._diff2[0]

    @cached_property
    def d1x(self):
        return -(self._one_eps * self._diff1[1])

    @cached_property
    def d1xx(self):
        return self._one_eps * self._diff1[0]

    @cached_property
    def d1xxx(self):
        return self._one_eps * self._diff1[1]

    @cached_property
    def d2x(self):
        return 2 * (self._amp * self._diff2[1])

    @cached_property
    def d2xx(self):
        return -4 * (self._amp * self._diff2[0])

    # blocks

    @cached_property
    def _sc(self):
        return self._sincos(self.d1)

    @cached_property
    def _shch(self):
        return self._sinhcosh(self.d2)

    @property
    def S(self):
        return self._sc[0]

    @property
    def C(self):
        return self._sc[1]

    @property
    def SH(self):
        return self._shch[0]

    @property
    def CH(self):
        return self._shch[1]

    @cached_property
    def D(self):
        return self.CH - self.C

    @cached_property
    def BR(self):
        return self.SH * self.d2x + self.S * self.d1x

    def atom(self, name: str):
        return getattr(self, name)

    @cached_property
    def _powers_of_d(self) -> dict:
        return {1: self.D}

    def d_power(self, k: int):
        cache = self._powers_of_d
        if k not in cache:
            cache[k] = self.d_power(k - 1) * self.D
        return cache[k]


class ReducedKernel(Kernel):
    """Outer kernel at the origin with the curve's parity applied.

    For the odd quantities ``f(0) - f(-y) = f(y)``; the even ones become
    squared sines, e.g. ``z1_x(0) - z1_x(y) = -2 (1 + eps) sin(y/2)**2``.
    """

    def __init__(self, p: CurveParams, y):
        super().__init__(p, None, y)

    @cached_property
    def _odd(self):
        return self._sincos(self.h)

    @cached_property
    def _half_sq(self):
        s = self._sin(self.h * 0.5)
        return s * s

    @cached_property
    def _sin_sq(self):
        s = self._odd[0]
        return s * s

    @cached_property
    def _double(self):
        return self._sincos(self.h * 2.0)

    @cached_property
    def d1(self):
        return self.h - self._one_eps * self._odd[0]

    @cached_property
    def d2(self):
        return self._amp * self._double[0]

    @cached_property
    def d1x(self):
        return -2 * (self._one_eps * self._half_sq)

    @cached_property
    def d1xx(self):
        return self._one_eps * self._odd[0]

    @cached_property
    def d1xxx(self):
        return 2 * (self._one_eps * self._half_sq)

    @cached_property
    def d2x(self):
        return 4 * (self._amp * self._sin_sq)

    @cached_property
    def d2xx(self):
        return -4 * (self._amp * self._double[0])


# ---------------------------------------------------------------------------
# expression blocks

ATOMS = ("S", "C", "SH", "CH", "d1x", "d1xx", "d1xxx", "d2x", "d2xx", "BR")
_FACTOR = re.compile(r"([A-Za-z0-9]+?)(?:\^(\d+))?")


@dataclass(frozen=True)
class Block:
    """A quotient ``prod(atoms) / D**d_power``."""

    atoms: tuple[tuple[str, int], ...]
    d_power: int

    @classmethod
    def parse(cls, text: str) -> Block:
        num, _, den = text.replace(" ", "").partition("/")
        atoms = []
        for part in num.split("*"):
            m = _FACTOR.fullmatch(part)
            if not m or m.group(1) not in ATOMS:
                raise ValueError(f"bad factor {part!r} in {text!r}")
            atoms.append((m.group(1), int(m.group(2) or 1)))
        d_power = 0
        if den:
            m = _FACTOR.fullmatch(den)
            if not m or m.group(1) != "D":
                raise ValueError(f"denominator must be a power of D in {text!r}")
            d_power = int(m.group(2) or 1)
        return cls(tuple(atoms), d_power)

    def __str__(self) -> str:
        num = "*".join(a if k == 1 else f"{a}^{k}" for a, k in self.atoms)
        if not self.d_power:
            return num
        return f"{num}/D" + (f"^{self.d_power}" if self.d_power > 1 else "")

    def numerator(self, k: Kernel) -> Jet:
        out = None
        for name, power in self.atoms:
            term = k.atom(name) ** power if power > 1 else k.atom(name)
            out = term if out is None else out * term
        return out

    def denominator(self, k: Kernel) -> Jet | None:
        return k.d_power(self.d_power) if self.d_power else None

    def value(self, k: Kernel) -> Jet:
        den = self.denominator(k)
        num = self.numerator(k)
        return num if den is None else num / den

    def order(self, atom_orders: dict) -> tuple[int, int]:
        """Vanishing orders ``(numerator, denominator)`` from per-atom orders."""
        num = sum(atom_orders[a] * p for a, p in self.atoms)
        return num, atom_orders["D"] * self.d_power


# Vanishing order of each block at the singular point, along the outer
# variable (curve parity makes the even-derivative differences quadratic)
# and along the inner variable (every difference is at least linear).
OUTER_ATOM_ORDERS = {"S": 1, "C": 0, "SH": 1, "CH": 0, "D": 2, "d1x": 2, "d1xx": 1, "d1xxx": 2,
                     "d2x": 2, "d2xx": 1, "BR": 3}
INNER_ATOM_ORDERS = {"S": 1, "C": 0, "SH": 1, "CH": 0, "D": 2, "d1x": 1, "d1xx": 1, "d1xxx": 1,
                     "d2x": 1, "d2xx": 1, "BR": 2}


# ---------------------------------------------------------------------------
# integrand registry

_ONE_D = {
    "A1": (2, "S*d1xx/D", (2, 0, 2, 0)),
    "A2": (2, "C*d1x^2/D", (2, 0, 2, 0)),
    "A3": (-2, "S*d1x*BR/D^2", (4, 0, 4, 0)),
}

# term: (factor, outer block P, inner block Q)
_TWO_D = {
    "B11": (-1, "S*d1x^2/D", "S*d1x/D"),
    "B12": (1, "C*d1xx/D", "S*d1x/D"),
    "B13": (-1, "C*d1x*BR/D^2", "S*d1x/D"),
    "B14": (1, "C*d1x/D", "C*d1x^2/D"),
    "B15": (1, "C*d1x/D", "S*d1xx/D"),
    "B16": (-1, "C*d1x/D", "S*d1x*BR/D^2"),
    "B21": (1, "C*d1x/D", "C*d1x^2/D"),
    "B22": (-1, "S*BR/D^2", "C*d1x^2/D"),
    "B23": (-1, "S/D", "S*d1x^3/D"),
    "B24": (2, "S/D", "C*d1xx*d1x/D"),
    "B25": (-1, "S/D", "C*d1x^2*BR/D^2"),
    "B31": (1, "C*d1x/D", "S*d1xx/D"),
    "B32": (-1, "S*BR/D^2", "S*d1xx/D"),
    "B33": (1, "S/D", "C*d1xx*d1x/D"),
    "B34": (1, "S/D", "S*d1xxx/D"),
    "B35": (-1, "S/D", "S*d1xx*BR/D^2"),
    "B41": (-1, "C*d1x/D", "S*d1x*SH*d2x/D^2"),
    "B42": (1, "S*BR/D^2", "S*d1x*SH*d2x/D^2"),
    "B43": (-1, "S/D", "C*d1x^2*SH*d2x/D^2"),
    "B44": (-1, "S/D", "S*d1xx*SH*d2x/D^2"),
    "B45": (-1, "S/D", "S*d1x*CH*d2x^2/D^2"),
    "B46": (-1, "S/D", "S*d1x*SH*d2xx/D^2"),
    "B47": (2, "S/D", "S*d1x*SH*d2x*BR/D^3"),
    "B51": (-1, "C*d1x/D", "S^2*d1x^2/D^2"),
    "B52": (1, "S*BR/D^2", "S^2*d1x^2/D^2"),
    "B53": (-2, "S/D", "S*C*d1x^3/D^2"),
    "B54": (-2, "S/D", "S^2*d1x*d1xx/D^2"),
    "B55": (2, "S/D", "S^2*d1x^2*BR/D^3"),
    "B61": (-1, "C*d1x^2*SH/D^2", "S*d2x/D"),
    "B62": (-1, "S*d1xx*SH/D^2", "S*d2x/D"),
    "B63": (-1, "S*d1x*CH*d2x/D^2", "S*d2x/D"),
    "B64": (2, "S*d1x*SH*BR/D^3", "S*d2x/D"),
    "B65": (-1, "S*d1x*SH/D^2", "C*d1x*d2x/D"),
    "B66": (-1, "S*d1x*SH/D^2", "S*d2xx/D"),
    "B67": (1, "S*d1x*SH/D^2", "S*d2x*BR/D^2"),
    "B71": (-2, "S*C*d1x^2/D^2", "S*d1x/D"),
    "B72": (-1, "S^2*d1xx/D^2", "S*d1x/D"),
    "B73": (2, "S^2*d1x*BR/D^3", "S*d1x/D"),
    "B74": (-1, "S^2*d1x/D^2", "C*d1x^2/D"),
    "B75": (-1, "S^2*d1x/D^2", "S*d1xx/D"),
    "B76": (1, "S^2*d1x/D^2", "S*d1x*BR/D^2"),
}

ONE_D_TERMS = tuple(_ONE_D)
TWO_D_TERMS = tuple(_TWO_D)
# Terms whose z-axis region needs the finer six-piece plan.
SPECIAL_TERMS = ("B47", "B55")


class _Workspace:
    """Kernels shared by all blocks of one evaluation."""

    def __init__(self, p: CurveParams, y: Jet, z: Jet | None, reduced: bool):
        self.p = p
        self.y = y
        self.z = z
        self.reduced = reduced

    @cached_property
    def outer(self) -> Kernel:
        if self.reduced:
            return ReducedKernel(self.p, self.y)
        return Kernel(self.p, Jet.constant(0.0, self.y.ny, self.y.nz), self.y)

    @cached_property
    def inner_at_zero(self) -> Kernel:
        return Kernel(self.p, Jet.constant(0.0, self.z.ny, self.z.nz), self.z)

    @cached_property
    def inner_at_minus_y(self) -> Kernel:
        return Kernel(self.p, -self.y, self.z)


@dataclass(frozen=True)
class IntegrandSpec:
    """One integral of the campaign.

    ``factor`` is the multiplier in front of the integral as written;
    ``symmetry_factor`` accounts for integrating over half of the outer
    variable's period. Reported enclosures include both.
    """

    id: str
    arity: int
    factor: int
    outer: Block
    inner: Block | None
    orders: tuple[int, int, int, int]
    symmetry_factor: int = 1

    @property
    def multiplier(self) -> float:
        return float(self.factor * self.symmetry_factor)

    # jet-level evaluation

    def _workspace(self, p, y, z) -> _Workspace:
        return _Workspace(p, y, z, reduced=self.arity == 1)

    def value(self, p: CurveParams, y: Jet, z: Jet | None = None) -> Jet:
        ws = self._workspace(p, y, z)
        v = self.outer.value(ws.outer)
        if self.arity == 2:
            v = v * (self.inner.value(ws.inner_at_zero) - self.inner.value(ws.inner_at_minus_y))
        return v.scale(self.multiplier)

    def parts(self, p: CurveParams, y: Jet, z: Jet | None = None) -> tuple[Jet, Jet]:
        """Numerator and denominator, each a polynomial in the blocks."""
        ws = self._workspace(p, y, z)
        num = self.outer.numerator(ws.outer)
        den = self.outer.denominator(ws.outer)
        if self.arity == 2:
            k0, k1 = ws.inner_at_zero, ws.inner_at_minus_y
            n0, n1 = self.inner.numerator(k0), self.inner.numerator(k1)
            d0, d1 = self.inner.denominator(k0), self.inner.denominator(k1)
            num = num * (n0 * d1 - n1 * d0)
            inner_den = d0 * d1
            den = inner_den if den is None else den * inner_den
        if den is None:
            den = Jet.constant(1.0, num.ny, num.nz)
        return num.scale(self.multiplier), den

    def integrand(self, p: CurveParams) -> Integrand:
        if self.arity == 1:
            return Integrand(self.id, 1, lambda y, z: self.value(p, y), lambda y, z: self.parts(p, y), self.orders)
        return Integrand(self.id, 2, lambda y, z: self.value(p, y, z), lambda y, z: self.parts(p, y, z),
                         self.orders)

    def derived_orders(self) -> tuple[int, int, int, int]:
        """Vanishing orders implied by the block structure."""
        pn, pd = self.outer.order(OUTER_ATOM_ORDERS)
        if self.arity == 1:
            return pn, 0, pd, 0
        qn, qd = self.inner.order(INNER_ATOM_ORDERS)
        # the inner difference Q(0,z) - Q(-y,z) adds one power of y
        return pn + 1, qn + qd, pd, 2 * qd

    def describe(self) -> dict:
        return {
            "id": self.id,
            "arity": self.arity,
            "factor": self.factor,
            "symmetry_factor": self.symmetry_factor,
            "outer": str(self.outer),
            "inner": None if self.inner is None else str(self.inner),
            "orders": dict(zip(("num_y", "num_z", "den_y", "den_z"), self.orders)),
        }


@cache
def registry() -> dict[str, IntegrandSpec]:
    specs = {}
    for tid, (factor, outer, orders) in _ONE_D.items():
        specs[tid] = IntegrandSpec(tid, 1, factor, Block.parse(outer), None, orders, symmetry_factor=1)
    table = expansion_orders()
    for tid, (factor, outer, inner) in _TWO_D.items():
        specs[tid] = IntegrandSpec(tid, 2, factor, Block.parse(outer), Block.parse(inner), table[tid],
                                   symmetry_factor=2)
    return specs


def get_term(term: str) -> IntegrandSpec:
    try:
        return registry()[term]
    except KeyError:
        raise UnknownTerm(f"unknown term {term!r}") from None


# ---------------------------------------------------------------------------
# vanishing-order validation


def _check_coeffs(jet: Jet, below_y: int, below_z: int, what: str, leading: bool, problems: list):
    for j in range(jet.ny + 1):
        for k in range(jet.nz + 1):
            if j < below_y or k < below_z:
                lo, hi = jet.coeff(j, k)
                if not (np.all(lo <= 0) and np.all(hi >= 0)):
                    problems.append(f"{what}: coefficient ({j}, {k}) does not vanish")
    if leading:
        lo, hi = jet.coeff(below_y, below_z)
        if np.any((lo <= 0) & (hi >= 0)):
            problems.append(f"{what}: leading coefficient ({below_y}, {below_z}) contains zero")


def validate_orders(term: str, p: CurveParams | None = None) -> list[str]:
    """Check the declared vanishing orders against jets at the singular set.

    The two-variable terms are checked at the origin and along both singular
    axes (at a few fixed points of the other variable). Returns a list of
    problems, empty when all checks pass.
    """
    spec = get_term(term)
    p = p or CurveParams()
    num_y, num_z, den_y, den_z = spec.orders
    problems: list[str] = []
    if spec.arity == 1:
        y, _ = jet_vars(0.0, 0.0, max(num_y, den_y), 0)
        num, den = spec.parts(p, y)
        _check_coeffs(num, num_y, 0, f"{term} numerator", False, problems)
        _check_coeffs(den, den_y, 0, f"{term} denominator", True, problems)
        return problems
    probes = [
        ((0.0, 0.0), (num_y, num_z, den_y, den_z), "origin"),
        ((0.0, 0.7), (num_y, 0, den_y, 0), "y-axis z=0.7"),
        ((0.0, -2.1), (num_y, 0, den_y, 0), "y-axis z=-2.1"),
        ((0.4, 0.0), (0, num_z, 0, den_z), "z-axis y=0.4"),
        ((2.6, 0.0), (0, num_z, 0, den_z), "z-axis y=2.6"),
    ]
    for (y0, z0), (ny, nz, dy, dz), where in probes:
        y, z = jet_vars(y0, z0, max(ny, dy), max(nz, dz))
        num, den = spec.parts(p, y, z)
        _check_coeffs(num, ny, nz, f"{term} numerator at {where}", False, problems)
        _check_coeffs(den, dy, dz, f"{term} denominator at {where}", True, problems)
    return problems


# ---------------------------------------------------------------------------
# region plans

REGION_TAXONOMY = {
    # reported column -> region class
    "bounded-region": "nonsingular",
    "singularity-center": "singular-center",
    "singularity-y-axis": "singular-first",
    "singularity-z-axis": "singular-second",
}


@dataclass(frozen=True)
class PlanConfig:
    """Subdivision parameters of one campaign."""

    delta: float
    abs_tol: float
    rel_tol: float
    depth_nonsingular: int
    depth_singular: int = 12
    depth_singular_first: int = 8
    depth_singular_center: int = 8
    depth_singular_second: int = 9
    depth_singular_second_special: int = 10
    second_axis_breaks: tuple[float, ...] = (0.65, 0.95)
    second_axis_breaks_special: tuple[float, ...] = (0.325, 0.65, 0.775, 0.95, 1.5)
    geometric_from: float = 0.95
    rel_basis: str = "midpoint"

    @classmethod
    def one_d(cls, **overrides) -> PlanConfig:
        base = cls(delta=2.0**-9, abs_tol=1e-6, rel_tol=1e-6, depth_nonsingular=18, depth_singular=12)
        return replace(base, **overrides)

    @classmethod
    def two_d(cls, **overrides) -> PlanConfig:
        base = cls(delta=2.0**-5, abs_tol=1e-4, rel_tol=1e-4, depth_nonsingular=10)
        return replace(base, **overrides)

    def __post_init__(self):
        if not (0 < self.delta < 0.5):
            raise ValueError("delta must lie in (0, 0.5)")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class PlanEntry:
    column: str
    region: Region


def region_plan(arity: int, term: str, cfg: PlanConfig) -> list[PlanEntry]:
    """Tiling of the reduced domain for ``term``.

    One variable: ``[0, delta]`` (singular) and ``[delta, pi]``. Two
    variables: ``[0, pi] x [-pi, pi]`` cut at ``delta`` along both axes.
    """
    get_term(term)
    d = cfg.delta
    if arity == 1:
        return [
            PlanEntry("singular", Region.spanning((0.0, d), max_depth=cfg.depth_singular,
                                                  method="taylor_singular", label="singular")),
            PlanEntry("nonsingular", Region.spanning((d, PI), max_depth=cfg.depth_nonsingular,
                                                     method="gauss_legendre", label="nonsingular")),
        ]
    if arity != 2:
        raise ValueError("arity must be 1 or 2")
    plan = []
    for z_side, label in (((d, PI), "upper"), ((-PI, -d), "lower")):
        plan.append(PlanEntry("bounded-region", Region.spanning(
            (d, PI), z_side, split_y="geometric", split_z="geometric",
            max_depth=cfg.depth_nonsingular, method="gauss_legendre", label=f"nonsingular-{label}")))
    plan.append(PlanEntry("singularity-center", Region.spanning(
        (0.0, d), (-d, d), max_depth=cfg.depth_singular_center, method="taylor_singular",
        label="singular-center")))
    for z_side, label in (((d, PI), "upper"), ((-PI, -d), "lower")):
        plan.append(PlanEntry("singularity-y-axis", Region.spanning(
            (0.0, d), z_side, max_depth=cfg.depth_singular_first, method="taylor_singular",
            label=f"singular-first-{label}")))
    special = term in SPECIAL_TERMS
    breaks = cfg.second_axis_breaks_special if special else cfg.second_axis_breaks
    depth = cfg.depth_singular_second_special if special else cfg.depth_singular_second
    edges = [Interval(d, d)] + [Interval(b, b) for b in breaks] + [PI]
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        split_y = "geometric" if a.lo >= cfg.geometric_from else "arithmetic"
        plan.append(PlanEntry("singularity-z-axis", Region.spanning(
            (a, b), (-d, d), split_y=split_y, split_z="arithmetic", max_depth=depth,
            method="taylor_singular", label=f"singular-second-{i + 1}")))
    return plan


# ---------------------------------------------------------------------------
# campaign drivers


def combine(results: list[QuadResult]) -> QuadResult:
    """Interval sum of results in the given order, with merged statistics."""
    lo, hi = fsum_bounds([r.enclosure.lo for r in results], [r.enclosure.hi for r in results])
    return QuadResult(
        Interval(lo, hi),
        sum(r.cells_evaluated for r in results),
        sum(r.cells_rejected_then_split for r in results),
        sum(r.fallbacks_used for r in results),
        any(r.max_depth_reached for r in results),
    )


def integrate_entry(term: str, entry: PlanEntry, p: CurveParams, cfg: PlanConfig) -> QuadResult:
    spec = get_term(term)
    return quad.adaptive_integrate(spec.integrand(p), entry.region, cfg.abs_tol, cfg.rel_tol,
                                   context=f"{term} {entry.region.label}", rel_basis=cfg.rel_basis)


def integrate_term(term: str, p: CurveParams, cfg: PlanConfig, columns=None) -> dict[str, QuadResult]:
    """Per-column enclosures of one term (sub-regions summed)."""
    spec = get_term(term)
    grouped: dict[str, list[QuadResult]] = {}
    for entry in region_plan(spec.arity, term, cfg):
        if columns is not None and entry.column not in columns:
            continue
        grouped.setdefault(entry.column, []).append(integrate_entry(term, entry, p, cfg))
    return {col: combine(rs) for col, rs in grouped.items()}


def dtx_at_zero(p: CurveParams, cfg: PlanConfig | None = None) -> QuadResult:
    """Enclosure of the first time derivative of the slope at the origin (A1 + A2 + A3)."""
    cfg = cfg or PlanConfig.one_d()
    parts = []
    for term in ONE_D_TERMS:
        parts.extend(integrate_term(term, p, cfg).values())
    return combine(parts)


def dttx_at_zero(p: CurveParams, cfg: PlanConfig | None = None, terms=None, columns=None):
    """Per-(term, column) enclosures and their total for the two-variable terms."""
    cfg = cfg or PlanConfig.two_d()
    terms = list(TWO_D_TERMS if terms is None else terms)
    if not terms:
        raise ValueError("at least one term is required")
    results = {}
    for term in terms:
        if get_term(term).arity != 2:
            raise UnknownTerm(f"{term} is not a two-variable term")
        for col, res in integrate_term(term, p, cfg, columns).items():
            results[(term, col)] = res
    total = combine(list(results.values())).enclosure
    return results, total


def manifest(cfg1: PlanConfig | None = None, cfg2: PlanConfig | None = None) -> dict:
    """Machine-readable description of every registered term and its plan."""
    cfg1 = cfg1 or PlanConfig.one_d()
    cfg2 = cfg2 or PlanConfig.two_d()
    terms = []
    for tid, spec in registry().items():
        cfg = cfg1 if spec.arity == 1 else cfg2
        info = spec.describe()
        info["regions"] = [
            {
                "column": e.column,
                "label": e.region.label,
                "box_y": str(e.region.box_y),
                "box_z": None if e.region.box_z is None else str(e.region.box_z),
                "split_y": e.region.split_y,
                "split_z": e.region.split_z,
                "max_depth": e.region.max_depth,
                "method": e.region.method,
            }
            for e in region_plan(spec.arity, tid, cfg)
        ]
        terms.append(info)
    return {"schema": "rigorquad.manifest/1", "terms": terms}
