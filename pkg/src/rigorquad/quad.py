"""Rigorous quadrature: two-point Gauss-Legendre with Lagrange remainder,
Taylor-quotient integration of removable singularities, and adaptive
subdivision.

Everything is batched. A batch of cells is described by endpoint enclosures
``(lo, hi)`` arrays for each side, so a cell edge that is not a machine number
(for instance the domain edge at pi) is carried as an interval and the
quadrature formulas stay valid for every point of it.

Integrands are :class:`Integrand` objects whose callables take jets
(:class:`~rigorquad.taylor.Jet`) and return jets; a zero-order jet is just a
batch of intervals.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import interval as iv
from .interval import SQRT3_OVER_3, Interval
from .taylor import Jet

__all__ = [
    "Integrand",
    "Region",
    "QuadResult",
    "CellUnresolvable",
    "ZeroInDenominatorCoefficient",
    "gl2_1d",
    "gl2_2d",
    "taylor_singular_1d",
    "taylor_singular_2d",
    "adaptive_integrate",
    "SPLIT_STRATEGIES",
    "METHODS",
    "REL_BASES",
]

SPLIT_STRATEGIES = ("arithmetic", "geometric", "none")
METHODS = ("gauss_legendre", "taylor_singular")
REL_BASES = ("midpoint", "mignitude")


class ZeroInDenominatorCoefficient(ArithmeticError):
    """The leading denominator coefficient of a singular quotient contains zero."""


class CellUnresolvable(RuntimeError):
    """A cell could not be evaluated even at the maximum subdivision depth."""

    def __init__(self, message: str, cell_y: Interval, cell_z: Interval | None = None, context: str = ""):
        super().__init__(message)
        self.cell_y = cell_y
        self.cell_z = cell_z
        self.context = context

    def __str__(self) -> str:
        where = f"y={self.cell_y}" + (f", z={self.cell_z}" if self.cell_z is not None else "")
        prefix = f"{self.context}: " if self.context else ""
        return f"{prefix}{self.args[0]} ({where})"


@dataclass(frozen=True)
class Integrand:
    """A one- or two-variable integrand in jet form.

    ``value(y, z)`` returns the integrand. ``parts(y, z)`` returns
    ``(num, den)`` with ``value == num / den`` and is only needed for the
    singular method; ``orders`` gives the vanishing orders
    ``(num_y, num_z, den_y, den_z)`` of ``num`` and ``den`` at the origin. For
    one-variable integrands ``z`` is ``None`` and the z-orders are ignored.
    """

    name: str
    arity: int
    value: Callable
    parts: Callable | None = None
    orders: tuple[int, int, int, int] = (0, 0, 0, 0)

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError("arity must be 1 or 2")


@dataclass(frozen=True)
class Region:
    """Axis-aligned integration box with its subdivision policy.

    ``box_y``/``box_z`` are the machine-number hulls that get subdivided.
    ``y_ends``/``z_ends`` optionally give enclosures of the true endpoints
    when these are not machine numbers; they must lie inside the hull and
    default to the hull's own endpoints. With ``refine_off_axis`` the
    singular method also runs the quadrature rule on cells that stay clear
    of the singular axes and keeps the intersection.
    """

    box_y: Interval
    box_z: Interval | None = None
    split_y: str = "arithmetic"
    split_z: str = "arithmetic"
    max_depth: int = 10
    method: str = "gauss_legendre"
    y_ends: tuple[Interval, Interval] | None = None
    z_ends: tuple[Interval, Interval] | None = None
    label: str = ""
    refine_off_axis: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        for axis, box, strategy in (("y", self.box_y, self.split_y), ("z", self.box_z, self.split_z)):
            if box is None:
                continue
            if strategy not in SPLIT_STRATEGIES:
                raise ValueError(f"unknown split strategy {strategy!r}")
            if not box.lo < box.hi:
                raise ValueError(f"empty {axis}-box {box}")
            if strategy == "geometric" and not (box.lo > 0 or box.hi < 0):
                raise ValueError(f"geometric splitting needs a sign-definite {axis}-box, got {box}")
        if self.box_z is None:
            object.__setattr__(self, "split_z", "none")
        for box, ends in ((self.box_y, self.y_ends), (self.box_z, self.z_ends)):
            if ends is not None:
                a, b = ends
                if not (a.lo == box.lo and b.hi == box.hi and a.hi < b.lo):
                    raise ValueError(f"endpoint enclosures {a}, {b} do not match the hull {box}")

    @classmethod
    def spanning(cls, y: tuple, z: tuple | None = None, **kwargs) -> Region:
        """Region between endpoint enclosures, e.g. ``spanning((0.0, PI))``."""
        ya, yb = (Interval.coerce(e) for e in y)
        kw = dict(box_y=Interval(ya.lo, yb.hi), y_ends=(ya, yb))
        if z is not None:
            za, zb = (Interval.coerce(e) for e in z)
            kw.update(box_z=Interval(za.lo, zb.hi), z_ends=(za, zb))
        return cls(**kw, **kwargs)

    @property
    def arity(self) -> int:
        return 1 if self.box_z is None else 2

    def ends(self, axis: str) -> tuple[Interval, Interval]:
        box = self.box_y if axis == "y" else self.box_z
        given = self.y_ends if axis == "y" else self.z_ends
        if given is not None:
            return given
        return Interval(box.lo, box.lo), Interval(box.hi, box.hi)


@dataclass
class QuadResult:
    enclosure: Interval
    cells_evaluated: int = 0
    cells_rejected_then_split: int = 0
    fallbacks_used: int = 0
    max_depth_reached: bool = False
    cells: list | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "enclosure": str(self.enclosure),
            "cells_evaluated": self.cells_evaluated,
            "cells_rejected_then_split": self.cells_rejected_then_split,
            "fallbacks_used": self.fallbacks_used,
            "max_depth_reached": self.max_depth_reached,
        }


# ---------------------------------------------------------------------------
# batched cell formulas
#
# An axis of a batch of cells is the tuple (alo, ahi, blo, bhi): enclosures of
# the left and right endpoints.


def _axis(cell) -> tuple:
    """Normalize an Interval / pair-of-Intervals / 4-tuple of arrays to an axis tuple."""
    if isinstance(cell, Interval):
        return (np.float64(cell.lo),) * 2 + (np.float64(cell.hi),) * 2
    if len(cell) == 2:
        a, b = (Interval.coerce(e) for e in cell)
        return tuple(np.float64(v) for v in (a.lo, a.hi, b.lo, b.hi))
    return tuple(np.asarray(v, dtype=float) for v in cell)


def _geometry(ax):
    """Length, midpoint and node offset of a batch of cells along one axis."""
    alo, ahi, blo, bhi = ax
    length = iv.sub(blo, bhi, alo, ahi)
    mid = iv.scale(*iv.add(alo, ahi, blo, bhi), 0.5)
    half = iv.scale(*length, 0.5)
    offset = iv.mul(*half, SQRT3_OVER_3.lo, SQRT3_OVER_3.hi)
    nodes = (iv.sub(*mid, *offset), iv.add(*mid, *offset))
    return length, half, nodes


def _eval(fn, y, z):
    out = fn(y, z)
    if not isinstance(out, Jet):
        out = Jet.constant(out, y.ny, y.nz)
    return out


def _point_jets(ylo, yhi, zlo=None, zhi=None):
    y = Jet.constant((ylo, yhi), 0, 0)
    z = None if zlo is None else Jet.constant((zlo, zhi), 0, 0)
    return y, z


def _remainder_coeff(f: Integrand, box_y, box_z, axis: str):
    """Enclosure of the 4th Taylor coefficient along ``axis`` over the box."""
    if axis == "y":
        ny, nz = 4, 0
    else:
        ny, nz = 0, 4
    ylo, yhi = box_y
    y = _seed(ylo, yhi, ny, nz, along_y=True, active=ny > 0)
    if box_z is None:
        out = _eval(f.value, y, None)
    else:
        zlo, zhi = box_z
        z = _seed(zlo, zhi, ny, nz, along_y=False, active=nz > 0)
        out = _eval(f.value, y, z)
    return out.coeff(4, 0) if axis == "y" else out.coeff(0, 4)


def _seed(lo, hi, ny, nz, *, along_y: bool, active: bool) -> Jet:
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    shape = ((2, 1) if along_y else (1, 2)) if active else (1, 1)
    clo = np.zeros(lo.shape + shape)
    chi = np.zeros(lo.shape + shape)
    clo[..., 0, 0], chi[..., 0, 0] = lo, hi
    if active:
        idx = (..., 1, 0) if along_y else (..., 0, 1)
        clo[idx] = chi[idx] = 1.0
    return Jet(clo, chi, ny, nz)


def _finite(lo, hi):
    ok = np.isfinite(lo) & np.isfinite(hi)
    return np.where(ok, lo, np.nan), np.where(ok, hi, np.nan)


def _node_sum_by_expansion(f: Integrand, ax, half, c4):
    """Second enclosure of ``f(m - o) + f(m + o)`` at the two Gauss nodes.

    Expanding about the midpoint, odd powers of ``o`` cancel and
    ``o**2 = half**2 / 3`` is rational, so the sum lies in
    ``2*c0 + 2*c2*o**2 + 2*c4(cell)*o**4``. Unlike direct evaluation at the
    irrational nodes this is exact for cubics up to rounding.
    """
    mid = iv.scale(*iv.add(*ax), 0.5)
    jet = _eval(f.value, _seed(*mid, 3, 0, along_y=True, active=True), None)
    o2 = iv.divide_by(*iv.sqr(*half), 3.0)
    even = iv.add(*jet.coeff(0, 0), *iv.mul(*jet.coeff(2, 0), *o2))
    tail = iv.mul(*c4, *iv.sqr(*o2))
    return iv.scale(*iv.add(*even, *tail), 2.0)


def gl2_1d_batch(f: Integrand, ax):
    """Two-point Gauss-Legendre enclosures for a batch of 1-D cells.

    Failed cells (undefined or non-finite evaluation) come back as NaN.
    """
    length, half, (n1, n2) = _geometry(ax)
    nlo = np.stack(np.broadcast_arrays(n1[0], n2[0]))
    nhi = np.stack(np.broadcast_arrays(n1[1], n2[1]))
    vals = _eval(f.value, *_point_jets(nlo, nhi))
    vlo, vhi = vals.coeff(0, 0)
    s = iv.add(vlo[0], vhi[0], vlo[1], vhi[1])
    # (b-a)^5/4320 * f''''(cell) = (b-a)^5 * c4 / 180 with c4 = f''''/24
    c4 = _remainder_coeff(f, (ax[0], ax[3]), None, "y")
    s = _intersect(*s, *_node_sum_by_expansion(f, ax, half, c4))
    quad = iv.mul(*half, *s)
    l5 = iv.ipow(*length, 5)
    rem = iv.divide_by(*iv.mul(*l5, *c4), 180.0)
    return _finite(*iv.add(*quad, *rem))


def gl2_2d_batch(f: Integrand, ay, az):
    """Tensor-product two-point Gauss-Legendre enclosures for a batch of 2-D cells."""
    ly, hy, (y1, y2) = _geometry(ay)
    lz, hz, (z1, z2) = _geometry(az)
    ys = [y1, y1, y2, y2]
    zs = [z1, z2, z1, z2]
    ylo = np.stack(np.broadcast_arrays(*[p[0] for p in ys]))
    yhi = np.stack(np.broadcast_arrays(*[p[1] for p in ys]))
    zlo = np.stack(np.broadcast_arrays(*[p[0] for p in zs]))
    zhi = np.stack(np.broadcast_arrays(*[p[1] for p in zs]))
    ylo, yhi, zlo, zhi = np.broadcast_arrays(ylo, yhi, zlo, zhi)
    vals = _eval(f.value, *_point_jets(ylo, yhi, zlo, zhi))
    vlo, vhi = iv.total(*vals.coeff(0, 0), axis=0)
    quad = iv.mul(*iv.mul(*hy, *hz), vlo, vhi)
    box_y = (ay[0], ay[3])
    box_z = (az[0], az[3])
    cy = _remainder_coeff(f, box_y, box_z, "y")
    cz = _remainder_coeff(f, box_y, box_z, "z")
    rem_y = iv.mul(*iv.mul(*iv.ipow(*ly, 5), *lz), *cy)
    rem_z = iv.mul(*iv.mul(*ly, *iv.ipow(*lz, 5)), *cz)
    rem = iv.divide_by(*iv.add(*rem_y, *rem_z), 180.0)
    return _finite(*iv.add(*quad, *rem))


def _power_integral(ax, p: int):
    """Enclosure of the integral of ``t**p`` between the cell's endpoints."""
    alo, ahi, blo, bhi = ax
    upper = iv.ipow(blo, bhi, p + 1)
    lower = iv.ipow(alo, ahi, p + 1)
    return iv.divide_by(*iv.sub(*upper, *lower), float(p + 1))


def _one_sided(ax):
    alo, _, _, bhi = ax
    return (alo >= 0) | (bhi <= 0)


def _expansion_box(ax, singular: bool):
    alo, _, _, bhi = ax
    if not singular:
        return alo, bhi
    return np.minimum(alo, 0.0), np.maximum(bhi, 0.0)


def taylor_singular_batch(f: Integrand, ay, az=None, *, singular_y=True, singular_z=True):
    """Taylor-quotient enclosures for a batch of cells.

    Returns ``(lo, hi, status)`` with status 0 = ok, 1 = the leading
    denominator coefficient contains zero (or the evaluation failed), 2 = a
    cell straddles the singular axis and must be split first.
    """
    if f.parts is None:
        raise ValueError(f"integrand {f.name} has no numerator/denominator split")
    num_y, num_z, den_y, den_z = f.orders
    if not singular_y:
        num_y = den_y = 0
    if az is None or not singular_z:
        num_z = den_z = 0
    py, pz = num_y - den_y, num_z - den_z
    if py < 0 or pz < 0:
        raise ValueError(f"{f.name}: numerator order below denominator order")
    ny, nz = max(num_y, den_y), max(num_z, den_z)

    straddle = np.zeros(np.broadcast(*ay).shape, bool)
    if singular_y:
        straddle |= ~_one_sided(ay)
    if az is not None and singular_z:
        straddle |= ~_one_sided(az)

    ylo, yhi = _expansion_box(ay, singular_y)
    y = _seed(ylo, yhi, ny, nz, along_y=True, active=ny > 0)
    z = None
    if az is not None:
        zlo, zhi = _expansion_box(az, singular_z)
        z = _seed(zlo, zhi, ny, nz, along_y=False, active=nz > 0)
    num, den = f.parts(y, z)
    if not isinstance(num, Jet):
        num = Jet.constant(num, ny, nz)
    if not isinstance(den, Jet):
        den = Jet.constant(den, ny, nz)
    ratio = iv.div(*num.coeff(num_y, num_z), *den.coeff(den_y, den_z))
    res = iv.mul(*ratio, *_power_integral(ay, py))
    if az is not None:
        res = iv.mul(*res, *_power_integral(az, pz))
    lo, hi = _finite(*res)
    bad = ~(np.isfinite(lo) & np.isfinite(hi))
    status = np.where(straddle, 2, np.where(bad, 1, 0))
    lo = np.where(status == 0, lo, np.nan)
    hi = np.where(status == 0, hi, np.nan)
    return lo, hi, status


# ---------------------------------------------------------------------------
# scalar entry points


def _scalar_result(lo, hi, what: str) -> Interval:
    lo, hi = float(np.asarray(lo).reshape(-1)[0]), float(np.asarray(hi).reshape(-1)[0])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise iv.DivisionByZeroInterval(f"{what}: integrand evaluation is undefined on this cell")
    return Interval(lo, hi)


def _as_integrand(f, arity: int) -> Integrand:
    if isinstance(f, Integrand):
        return f
    if arity == 1:
        return Integrand(getattr(f, "__name__", "f"), 1, lambda y, z: f(y))
    return Integrand(getattr(f, "__name__", "f"), 2, f)


def gl2_1d(f, cell) -> Interval:
    """Enclosure of the integral of ``f`` over ``cell`` by two-point Gauss-Legendre.

    ``f`` is an :class:`Integrand` or a callable on jets. ``cell`` is an
    :class:`Interval` or a pair of endpoint enclosures.
    """
    lo, hi = gl2_1d_batch(_as_integrand(f, 1), _axis(cell))
    return _scalar_result(lo, hi, "gl2_1d")


def gl2_2d(f, cell_y, cell_z) -> Interval:
    lo, hi = gl2_2d_batch(_as_integrand(f, 2), _axis(cell_y), _axis(cell_z))
    return _scalar_result(lo, hi, "gl2_2d")


def _parts_integrand(num, den, orders, arity) -> Integrand:
    if arity == 1:
        return Integrand("quotient", 1, lambda y, z: num(y) / den(y), lambda y, z: (num(y), den(y)), orders)
    return Integrand("quotient", 2, lambda y, z: num(y, z) / den(y, z),
                     lambda y, z: (num(y, z), den(y, z)), orders)


def _raise_status(status, what: str):
    status = int(np.asarray(status).reshape(-1)[0])
    if status == 2:
        raise ValueError(f"{what}: cell straddles the singular point; split it at zero first")
    if status == 1:
        raise ZeroInDenominatorCoefficient(f"{what}: leading denominator coefficient contains zero")


def taylor_singular_1d(num, den, num_ord: int, den_ord: int, cell) -> Interval:
    """Integral of ``num/den`` over a cell touching (or avoiding) the singular point 0.

    ``num`` and ``den`` map a jet to a jet and vanish at 0 to orders
    ``num_ord`` and ``den_ord``.
    """
    f = _parts_integrand(num, den, (num_ord, 0, den_ord, 0), 1)
    lo, hi, status = taylor_singular_batch(f, _axis(cell))
    _raise_status(status, "taylor_singular_1d")
    return Interval(float(lo), float(hi))


def taylor_singular_2d(num, den, orders, cell_y, cell_z, *, singular_y=True, singular_z=True) -> Interval:
    """Two-variable version; set ``singular_y``/``singular_z`` False for the
    edge regions where only one coordinate is expanded."""
    f = _parts_integrand(num, den, tuple(orders), 2)
    lo, hi, status = taylor_singular_batch(f, _axis(cell_y), _axis(cell_z),
                                           singular_y=singular_y, singular_z=singular_z)
    _raise_status(status, "taylor_singular_2d")
    return Interval(float(lo), float(hi))


# ---------------------------------------------------------------------------
# adaptive integration


@dataclass
class _Cells:
    """Struct-of-arrays batch of cells (endpoint enclosures per axis)."""

    y: tuple
    z: tuple | None

    def __len__(self):
        return len(self.y[0])

    def take(self, idx) -> _Cells:
        return _Cells(tuple(a[idx] for a in self.y), None if self.z is None else tuple(a[idx] for a in self.z))

    @staticmethod
    def concat(parts: list[_Cells]) -> _Cells:
        y = tuple(np.concatenate([p.y[i] for p in parts]) for i in range(4))
        z = None if parts[0].z is None else tuple(np.concatenate([p.z[i] for p in parts]) for i in range(4))
        return _Cells(y, z)


def _split_axis(ax, strategy: str):
    """Children of each cell along one axis: (left, right) axis tuples."""
    alo, ahi, blo, bhi = ax
    m = 0.5 * alo + 0.5 * bhi
    if strategy == "geometric":
        sign_def = ((alo > 0) & (bhi > 0)) | ((alo < 0) & (bhi < 0))
        with np.errstate(invalid="ignore"):
            g = np.copysign(np.sqrt(alo * bhi), alo)
        ok = sign_def & (g > ahi) & (g < blo)
        m = np.where(ok, g, m)
    left = (alo, ahi, m, m)
    right = (m, m, blo, bhi)
    return left, right


def _children(cells: _Cells, split_y: str, split_z: str) -> _Cells:
    ys = [cells.y] if split_y == "none" else list(_split_axis(cells.y, split_y))
    if cells.z is None:
        return _Cells.concat([_Cells(y, None) for y in ys])
    zs = [cells.z] if split_z == "none" else list(_split_axis(cells.z, split_z))
    return _Cells.concat([_Cells(y, z) for y in ys for z in zs])


def _chunk_size(f: Integrand, region: Region) -> int:
    if region.method == "taylor_singular":
        return 512 if region.arity == 2 else 4096
    return 2048 if region.arity == 2 else 8192


def _intersect(alo, ahi, blo, bhi):
    """Intersection of two enclosures of the same values; NaN marks "unknown"."""
    lo = np.fmax(alo, blo)
    hi = np.fmin(ahi, bhi)
    if np.any(lo > hi):
        raise ArithmeticError("disjoint enclosures of the same integral")
    return lo, hi


def _evaluate(f: Integrand, region: Region, cells: _Cells, singular_axes, stats):
    """Enclosures for a batch of cells; NaN marks a failed cell."""
    n = len(cells)
    lo = np.empty(n)
    hi = np.empty(n)
    step = _chunk_size(f, region)
    for start in range(0, n, step):
        part = cells.take(slice(start, start + step))
        if region.method == "gauss_legendre":
            if region.arity == 1:
                plo, phi = gl2_1d_batch(f, part.y)
            else:
                plo, phi = gl2_2d_batch(f, part.y, part.z)
        else:
            plo, phi, status = taylor_singular_batch(f, part.y, part.z, singular_y=singular_axes[0],
                                                     singular_z=singular_axes[1])
            stats["fallbacks_used"] += int(np.count_nonzero(status == 1))
            # Cells clear of every singular axis also get the quadrature
            # rule; both enclosures are rigorous, so they are intersected.
            clear = status != 2
            for axis, singular in zip((part.y, part.z), singular_axes):
                if singular:
                    clear &= (axis[0] > 0) | (axis[3] < 0)
            if not region.refine_off_axis:
                clear &= status == 1
            idx = np.flatnonzero(clear | (status == 1))
            if idx.size:
                sub = part.take(idx)
                if region.arity == 1:
                    glo, ghi = gl2_1d_batch(f, sub.y)
                else:
                    glo, ghi = gl2_2d_batch(f, sub.y, sub.z)
                plo[idx], phi[idx] = _intersect(plo[idx], phi[idx], glo, ghi)
        lo[start : start + step] = plo
        hi[start : start + step] = phi
    return lo, hi


def adaptive_integrate(f, region: Region, abs_tol: float, rel_tol: float, *, keep_cells: bool = False,
                       context: str = "", rel_basis: str = "midpoint") -> QuadResult:
    """Adaptive enclosure of the integral of ``f`` over ``region``.

    A cell is accepted when its enclosure width is at most ``abs_tol`` or at
    most ``rel_tol * scale``, or unconditionally at ``region.max_depth``. The
    scale is the magnitude of the enclosure's midpoint (``rel_basis="midpoint"``)
    or its smallest magnitude (``"mignitude"``, zero for enclosures around 0).
    Rejected and failed cells are split by the region's per-axis strategy.
    Cells are processed a generation at a time, which accepts exactly the
    same cells as a depth-first traversal. The accepted enclosures are summed
    exactly and rounded outward, so the result does not depend on processing
    order.
    """
    if abs_tol <= 0 or rel_tol <= 0:
        raise ValueError("tolerances must be positive")
    if rel_basis not in REL_BASES:
        raise ValueError(f"rel_basis must be one of {REL_BASES}")
    f = _as_integrand(f, region.arity)
    if f.arity != region.arity:
        raise ValueError(f"{f.name} has arity {f.arity} but the region has arity {region.arity}")
    singular_axes = (
        region.box_y.lo <= 0 <= region.box_y.hi,
        region.box_z is not None and region.box_z.lo <= 0 <= region.box_z.hi,
    )

    def axis_arrays(axis):
        a, b = region.ends(axis)
        return tuple(np.array([v]) for v in (a.lo, a.hi, b.lo, b.hi))

    cells = _Cells(axis_arrays("y"), axis_arrays("z") if region.box_z is not None else None)
    stats = {"cells_evaluated": 0, "cells_rejected_then_split": 0, "fallbacks_used": 0}
    accepted = []
    reached = False
    for depth in range(region.max_depth + 1):
        if len(cells) == 0:
            break
        lo, hi = _evaluate(f, region, cells, singular_axes, stats)
        stats["cells_evaluated"] += len(cells)
        ok = np.isfinite(lo) & np.isfinite(hi)
        if depth == region.max_depth:
            reached = True
            if not ok.all():
                i = int(np.flatnonzero(~ok)[0])
                cy = Interval(float(cells.y[0][i]), float(cells.y[3][i]))
                cz = None if cells.z is None else Interval(float(cells.z[0][i]), float(cells.z[3][i]))
                raise CellUnresolvable(f"integrand of {f.name} cannot be evaluated at maximum depth",
                                       cy, cz, context)
            accept = ok
        else:
            width = hi - lo
            if rel_basis == "midpoint":
                scale = np.abs(0.5 * lo + 0.5 * hi)
            else:
                scale = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
            accept = ok & ((width <= abs_tol) | (width <= rel_tol * scale))
        idx = np.flatnonzero(accept)
        accepted.append((cells.y[0][idx], cells.z[0][idx] if cells.z is not None else np.zeros(idx.size),
                         lo[idx], hi[idx], np.full(idx.size, depth)))
        rest = np.flatnonzero(~accept)
        if rest.size:
            stats["cells_rejected_then_split"] += int(rest.size)
            cells = _children(cells.take(rest), region.split_y, region.split_z)
        else:
            cells = cells.take(rest)

    oy, oz, alo, ahi, adepth = (np.concatenate(c) for c in zip(*accepted))
    order = np.lexsort((oz, oy))
    alo, ahi = alo[order], ahi[order]
    enclosure = Interval(*iv.fsum_bounds(alo, ahi))
    cells_out = None
    if keep_cells:
        cells_out = list(zip(oy[order].tolist(), oz[order].tolist(), alo.tolist(), ahi.tolist(),
                             adepth[order].tolist()))
    return QuadResult(enclosure, stats["cells_evaluated"], stats["cells_rejected_then_split"],
                      stats["fallbacks_used"], reached, cells_out)
