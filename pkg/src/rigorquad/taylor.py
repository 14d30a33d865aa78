"""Truncated Taylor arithmetic (jets) with interval coefficients.

A :class:`Jet` holds the Taylor coefficients of a function of up to two
variables ``(y, z)`` expanded over a box. Coefficient ``[j, k]`` encloses
``d^j/dy^j d^k/dz^k f(p) / (j! k!)`` for every point ``p`` of the box, which
is what Lagrange-type remainder bounds need.

Coefficients are stored batch-first: ``lo`` and ``hi`` have shape
``batch + (ry, rz)`` so that many boxes are processed by one numpy call. The
stored extent ``(ry, rz)`` may be smaller than ``(ny + 1, nz + 1)``: a function
that does not depend on ``z`` keeps a single column, and products only grow
the extent as far as the truncation orders allow.
"""

from __future__ import annotations

from functools import cache
from math import factorial

import numpy as np

from . import interval as iv
from .interval import Interval

MAX_ORDER = 14

__all__ = ["Jet", "MAX_ORDER", "jet_var", "jet_vars", "derivative_enclosure"]


def _pair(value):
    """Accept a Jet-compatible constant and return ``(lo, hi)`` arrays."""
    if isinstance(value, Interval):
        return np.float64(value.lo), np.float64(value.hi)
    if isinstance(value, tuple):
        lo, hi = value
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    lo, hi = Interval.coerce(value).lo, Interval.coerce(value).hi
    return np.float64(lo), np.float64(hi)


@cache
def _conv_plan(ary: int, arz: int, bry: int, brz: int, ry: int, rz: int):
    """Index pairs of a truncated 2-D Cauchy product, grouped by output slot."""
    rows = []
    for j in range(ry):
        for k in range(rz):
            for i in range(max(0, j - bry + 1), min(j, ary - 1) + 1):
                for m in range(max(0, k - brz + 1), min(k, arz - 1) + 1):
                    rows.append((j * rz + k, i * arz + m, (j - i) * brz + (k - m)))
    out, ia, ib = (np.array(c) for c in zip(*rows))
    starts = np.flatnonzero(np.r_[True, out[1:] != out[:-1]])
    lengths = np.diff(np.r_[starts, len(out)])
    return ia, ib, starts, lengths


def _conv(alo, ahi, blo, bhi, ry: int, rz: int):
    """Truncated Cauchy product of coefficient blocks ``(..., r, c)``."""
    ary, arz = alo.shape[-2:]
    bry, brz = blo.shape[-2:]
    ia, ib, starts, lengths = _conv_plan(ary, arz, bry, brz, ry, rz)
    fa = (alo.reshape(alo.shape[:-2] + (-1,)), ahi.reshape(ahi.shape[:-2] + (-1,)))
    fb = (blo.reshape(blo.shape[:-2] + (-1,)), bhi.reshape(bhi.shape[:-2] + (-1,)))
    plo, phi = iv.mul(fa[0][..., ia], fa[1][..., ia], fb[0][..., ib], fb[1][..., ib])
    slo, shi = iv.segment_sum(plo, phi, starts, lengths)
    shape = slo.shape[:-1] + (ry, rz)
    return slo.reshape(shape), shi.reshape(shape)


def _sum_rows(lo, hi):
    """Interval sum over the row axis (``-2``) keeping it as a length-1 axis."""
    slo, shi = iv.total(lo, hi, axis=-2)
    return slo[..., None, :], shi[..., None, :]


def _pad(lo, hi, ry: int, rz: int):
    r, c = lo.shape[-2:]
    if (r, c) == (ry, rz):
        return lo, hi
    width = [(0, 0)] * (lo.ndim - 2) + [(0, ry - r), (0, rz - c)]
    return np.pad(lo, width), np.pad(hi, width)


def _zdiv(vlo, vhi, blo, bhi):
    """Solve ``b * x = v`` for series in ``z`` (last axis), shapes ``(..., 1, rz)``."""
    rz = vlo.shape[-1]
    b0lo, b0hi = blo[..., 0], bhi[..., 0]
    shape = np.broadcast_shapes(vlo.shape, blo.shape[:-1] + (rz,))
    xlo, xhi = np.zeros(shape), np.zeros(shape)
    for k in range(rz):
        rlo, rhi = vlo[..., k], vhi[..., k]
        m = min(k, blo.shape[-1] - 1)
        if m >= 1:
            plo, phi = iv.mul(blo[..., 1 : m + 1], bhi[..., 1 : m + 1],
                              xlo[..., k - m : k][..., ::-1], xhi[..., k - m : k][..., ::-1])
            slo, shi = iv.total(plo, phi)
            rlo, rhi = iv.sub(rlo, rhi, slo, shi)
        xlo[..., k], xhi[..., k] = iv.div(rlo, rhi, b0lo, b0hi)
    return xlo, xhi


class Jet:
    """Truncated bivariate Taylor expansion with interval coefficients.

    ``ny``/``nz`` are truncation orders; ``nz == 0`` gives a univariate jet.
    """

    __slots__ = ("lo", "hi", "ny", "nz")
    __array_priority__ = 100

    def __init__(self, lo, hi, ny: int, nz: int = 0):
        if not (0 <= ny <= MAX_ORDER and 0 <= nz <= MAX_ORDER):
            raise ValueError(f"jet orders must lie in [0, {MAX_ORDER}], got ({ny}, {nz})")
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim < 2:
            raise ValueError("coefficient arrays must share a shape batch + (ry, rz)")
        if lo.shape[-2] > ny + 1 or lo.shape[-1] > nz + 1:
            raise ValueError("coefficient extent exceeds the truncation orders")
        self.lo, self.hi, self.ny, self.nz = lo, hi, ny, nz

    # construction

    @classmethod
    def constant(cls, value, ny: int, nz: int = 0) -> Jet:
        lo, hi = _pair(value)
        return cls(lo[..., None, None], hi[..., None, None], ny, nz)

    @classmethod
    def from_coeffs(cls, coeffs, ny: int | None = None, nz: int | None = None) -> Jet:
        """Build from a nested list of Intervals/numbers (1-D or 2-D)."""
        rows = [list(r) if isinstance(r, (list, tuple)) else [r] for r in coeffs]
        if not isinstance(coeffs[0], (list, tuple)):
            rows = [[c] for c in coeffs]
        width = max(len(r) for r in rows)
        lo = np.zeros((len(rows), width))
        hi = np.zeros((len(rows), width))
        for j, r in enumerate(rows):
            for k, c in enumerate(r):
                c = Interval.coerce(c)
                lo[j, k], hi[j, k] = c.lo, c.hi
        return cls(lo, hi, len(rows) - 1 if ny is None else ny, width - 1 if nz is None else nz)

    # access

    @property
    def extent(self) -> tuple[int, int]:
        return self.lo.shape[-2], self.lo.shape[-1]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.lo.shape[:-2]

    def coeff(self, j: int = 0, k: int = 0):
        """``(lo, hi)`` arrays of coefficient ``[j, k]`` (zero beyond the stored extent)."""
        if j > self.ny or k > self.nz:
            raise IndexError(f"coefficient ({j}, {k}) is beyond truncation ({self.ny}, {self.nz})")
        ry, rz = self.extent
        if j >= ry or k >= rz:
            z = np.zeros(self.batch_shape)
            return z, z.copy()
        return self.lo[..., j, k], self.hi[..., j, k]

    def interval(self, j: int = 0, k: int = 0) -> Interval:
        """Scalar coefficient as an :class:`Interval` (unbatched jets only)."""
        lo, hi = self.coeff(j, k)
        if np.ndim(lo):
            raise ValueError("interval() needs an unbatched jet; use coeff() for arrays")
        return Interval(float(lo), float(hi))

    @property
    def coeffs(self) -> list:
        ry, rz = self.extent
        rows = [[self.interval(j, k) if j < ry and k < rz else Interval(0.0, 0.0)
                 for k in range(self.nz + 1)] for j in range(self.ny + 1)]
        return [r[0] for r in rows] if self.nz == 0 else rows

    def __repr__(self) -> str:
        return f"Jet(orders=({self.ny}, {self.nz}), extent={self.extent}, batch={self.batch_shape})"

    # arithmetic

    def _lift(self, other) -> Jet:
        if isinstance(other, Jet):
            if (other.ny, other.nz) != (self.ny, self.nz):
                raise ValueError("jets with different truncation orders cannot be combined")
            return other
        return Jet.constant(other, self.ny, self.nz)

    def _ext(self, ry: int, rz: int) -> tuple[int, int]:
        return min(ry, self.ny + 1), min(rz, self.nz + 1)

    def __neg__(self) -> Jet:
        return Jet(-self.hi, -self.lo, self.ny, self.nz)

    def __pos__(self) -> Jet:
        return self

    def __add__(self, other) -> Jet:
        other = self._lift(other)
        (ary, arz), (bry, brz) = self.extent, other.extent
        ry, rz = max(ary, bry), max(arz, brz)
        if (ary, arz) == (bry, brz):
            return Jet(*iv.add(self.lo, self.hi, other.lo, other.hi), self.ny, self.nz)
        alo, ahi = _pad(self.lo, self.hi, ry, rz)
        blo, bhi = _pad(other.lo, other.hi, ry, rz)
        slo, shi = iv.add(alo, ahi, blo, bhi)
        # slots present in only one operand are copied, not re-rounded
        in_a = np.zeros((ry, rz), bool)
        in_a[:ary, :arz] = True
        in_b = np.zeros((ry, rz), bool)
        in_b[:bry, :brz] = True
        slo = np.where(in_a & in_b, slo, np.where(in_a, alo, blo))
        shi = np.where(in_a & in_b, shi, np.where(in_a, ahi, bhi))
        return Jet(slo, shi, self.ny, self.nz)

    __radd__ = __add__

    def __sub__(self, other) -> Jet:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> Jet:
        return self._lift(other) - self

    def __mul__(self, other) -> Jet:
        other = self._lift(other)
        a, b = self, other
        if a.extent == (1, 1) and b.extent != (1, 1):
            a, b = b, a
        if b.extent == (1, 1):
            return Jet(*iv.mul(a.lo, a.hi, b.lo, b.hi), self.ny, self.nz)
        (ary, arz), (bry, brz) = a.extent, b.extent
        ry, rz = self._ext(ary + bry - 1, arz + brz - 1)
        return Jet(*_conv(a.lo, a.hi, b.lo, b.hi, ry, rz), self.ny, self.nz)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Jet:
        return self._divide(self, self._lift(other))

    def __rtruediv__(self, other) -> Jet:
        return self._divide(self._lift(other), self)

    @staticmethod
    def _divide(u: Jet, b: Jet) -> Jet:
        if b.extent == (1, 1):
            return Jet(*iv.div(u.lo, u.hi, b.lo, b.hi), u.ny, u.nz)
        ry = u.ny + 1 if max(u.extent[0], b.extent[0]) > 1 else 1
        rz = u.nz + 1 if max(u.extent[1], b.extent[1]) > 1 else 1
        ulo, uhi = _pad(u.lo, u.hi, ry, rz)
        bry = b.extent[0]
        shape = np.broadcast_shapes(ulo.shape, b.lo.shape[:-2] + (ry, rz))
        qlo, qhi = np.zeros(shape), np.zeros(shape)
        b0lo, b0hi = b.lo[..., 0:1, :], b.hi[..., 0:1, :]
        for j in range(ry):
            vlo, vhi = ulo[..., j : j + 1, :], uhi[..., j : j + 1, :]
            m = min(j, bry - 1)
            if m >= 1:
                # sum_{i=1..m} b[i] * q[j-i], each a z-series product
                tlo, thi = _rowwise(b.lo[..., 1 : m + 1, :], b.hi[..., 1 : m + 1, :],
                                    qlo[..., j - m : j, :][..., ::-1, :],
                                    qhi[..., j - m : j, :][..., ::-1, :], rz)
                vlo, vhi = iv.sub(vlo, vhi, tlo, thi)
            qlo[..., j : j + 1, :], qhi[..., j : j + 1, :] = _zdiv(vlo, vhi, b0lo, b0hi)
        return Jet(qlo, qhi, u.ny, u.nz)

    def __pow__(self, n: int) -> Jet:
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("jets support non-negative integer powers only")
        result = Jet.constant(1.0, self.ny, self.nz)
        base, first = self, True
        while n:
            if n & 1:
                result = base if first else result * base
                first = False
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c: float) -> Jet:
        """Multiply by an exact machine number."""
        return Jet(*iv.scale(self.lo, self.hi, c), self.ny, self.nz)

    # elementary functions

    def sin(self) -> Jet:
        return _trig_pair(self, hyperbolic=False)[0]

    def cos(self) -> Jet:
        return _trig_pair(self, hyperbolic=False)[1]

    def sinh(self) -> Jet:
        return _trig_pair(self, hyperbolic=True)[0]

    def cosh(self) -> Jet:
        return _trig_pair(self, hyperbolic=True)[1]

    def sincos(self) -> tuple[Jet, Jet]:
        return _trig_pair(self, hyperbolic=False)

    def sinhcosh(self) -> tuple[Jet, Jet]:
        return _trig_pair(self, hyperbolic=True)

    # evaluation helpers

    def is_finite(self):
        """Per-batch-entry flag: every coefficient is finite."""
        ok = np.isfinite(self.lo) & np.isfinite(self.hi)
        return ok.all(axis=(-2, -1))


def _rowwise(alo, ahi, blo, bhi, rz: int):
    """``sum_i a[i] * b[i]`` where each row is a z-series; returns ``(..., 1, rz)``."""
    plo, phi = _conv_rows(alo, ahi, blo, bhi, rz)
    return _sum_rows(plo, phi)


def _conv_rows(alo, ahi, blo, bhi, rz: int):
    """Row-by-row z-series products of equally many rows."""
    if alo.shape[-1] == 1 and blo.shape[-1] == 1:
        plo, phi = iv.mul(alo, ahi, blo, bhi)
        if rz > 1:
            plo, phi = _pad(plo, phi, plo.shape[-2], rz)
        return plo, phi
    # fold the row index into the batch so the 1-row plan applies
    alo_, ahi_ = alo[..., None, :], ahi[..., None, :]
    blo_, bhi_ = blo[..., None, :], bhi[..., None, :]
    plo, phi = _conv(alo_, ahi_, blo_, bhi_, 1, rz)
    return plo[..., 0, :], phi[..., 0, :]


def _trig_pair(a: Jet, hyperbolic: bool) -> tuple[Jet, Jet]:
    """(sin, cos) or (sinh, cosh) of a jet via the coupled recurrences.

    With ``s = f(a)``, ``c = g(a)``: ``s' = a' c`` and ``c' = -a' s``
    (``+a' s`` in the hyperbolic case), applied first along ``z`` for row 0
    and then row by row along ``y``.
    """
    ary, arz = a.extent
    ry = a.ny + 1 if ary > 1 else 1
    rz = a.nz + 1 if arz > 1 else 1
    alo, ahi = _pad(a.lo, a.hi, ry, rz)
    shape = alo.shape
    slo, shi = np.zeros(shape), np.zeros(shape)
    clo, chi = np.zeros(shape), np.zeros(shape)
    x0 = (alo[..., 0, 0], ahi[..., 0, 0])
    if hyperbolic:
        slo[..., 0, 0], shi[..., 0, 0] = iv.sinh(*x0)
        clo[..., 0, 0], chi[..., 0, 0] = iv.cosh(*x0)
    else:
        slo[..., 0, 0], shi[..., 0, 0] = iv.sin(*x0)
        clo[..., 0, 0], chi[..., 0, 0] = iv.cos(*x0)

    for k in range(1, rz):
        # k s_k = sum_{l=1..k} l a_l c_{k-l}
        weights = np.arange(1, k + 1, dtype=float)
        wlo, whi = iv.mul(alo[..., 0, 1 : k + 1], ahi[..., 0, 1 : k + 1], weights, weights)
        rev = slice(k - 1, None, -1)
        for src_lo, src_hi, dst_lo, dst_hi, sign in (
            (clo, chi, slo, shi, 1.0),
            (slo, shi, clo, chi, 1.0 if hyperbolic else -1.0),
        ):
            plo, phi = iv.mul(wlo, whi, src_lo[..., 0, rev], src_hi[..., 0, rev])
            tlo, thi = iv.total(plo, phi)
            tlo, thi = iv.divide_by(tlo, thi, float(k))
            if sign < 0:
                tlo, thi = -thi, -tlo
            dst_lo[..., 0, k], dst_hi[..., 0, k] = tlo, thi

    for j in range(1, ry):
        weights = np.arange(1, j + 1, dtype=float)[:, None]
        wlo, whi = iv.mul(alo[..., 1 : j + 1, :], ahi[..., 1 : j + 1, :], weights, weights)
        for src_lo, src_hi, dst_lo, dst_hi, sign in (
            (clo, chi, slo, shi, 1.0),
            (slo, shi, clo, chi, 1.0 if hyperbolic else -1.0),
        ):
            tlo, thi = _rowwise(wlo, whi, src_lo[..., j - 1 :: -1, :][..., :j, :],
                                src_hi[..., j - 1 :: -1, :][..., :j, :], rz)
            tlo, thi = iv.divide_by(tlo, thi, float(j))
            if sign < 0:
                tlo, thi = -thi, -tlo
            dst_lo[..., j : j + 1, :], dst_hi[..., j : j + 1, :] = tlo, thi
    return Jet(slo, shi, a.ny, a.nz), Jet(clo, chi, a.ny, a.nz)


# ---------------------------------------------------------------------------
# seeding and derivative enclosures


def jet_var(box, order: int, *, nz: int = 0) -> Jet:
    """The identity ``y -> y`` expanded over ``box``: coefficients ``[box, 1, 0, ...]``."""
    if order < 1:
        raise ValueError("jet_var needs order >= 1")
    lo, hi = _pair(box)
    lo, hi = np.broadcast_arrays(lo, hi)
    clo = np.zeros(lo.shape + (2, 1))
    chi = np.zeros(lo.shape + (2, 1))
    clo[..., 0, 0], chi[..., 0, 0] = lo, hi
    clo[..., 1, 0] = chi[..., 1, 0] = 1.0
    return Jet(clo, chi, order, nz)


def jet_vars(box_y, box_z, ny: int, nz: int) -> tuple[Jet, Jet]:
    """Seed both variables of a bivariate expansion over ``box_y x box_z``.

    An order of 0 in a variable turns it into a plain interval constant.
    """
    ylo, yhi = _pair(box_y)
    zlo, zhi = _pair(box_z)

    def seed(lo, hi, order, along_y):
        lo, hi = np.broadcast_arrays(lo, hi)
        shape = (2, 1) if along_y else (1, 2)
        if order == 0:
            shape = (1, 1)
        clo = np.zeros(lo.shape + shape)
        chi = np.zeros(lo.shape + shape)
        clo[..., 0, 0], chi[..., 0, 0] = lo, hi
        if order:
            idx = (1, 0) if along_y else (0, 1)
            clo[(...,) + idx] = chi[(...,) + idx] = 1.0
        return Jet(clo, chi, ny, nz)

    return seed(ylo, yhi, ny, True), seed(zlo, zhi, nz, False)


def derivative_enclosure(f, box, k: int) -> Interval:
    """Enclosure of ``f^(k)`` over ``box``, from the k-th jet coefficient.

    ``f`` maps a univariate :class:`Jet` to a :class:`Jet`. Raises
    :class:`~rigorquad.interval.DivisionByZeroInterval` if the evaluation
    divides by an interval containing zero.
    """
    if not 0 <= k <= MAX_ORDER:
        raise ValueError(f"derivative order must lie in [0, {MAX_ORDER}]")
    x = jet_var(box, max(k, 1))
    out = f(x)
    if not isinstance(out, Jet):
        out = Jet.constant(out, x.ny, x.nz)
    lo, hi = out.coeff(k, 0)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise iv.DivisionByZeroInterval(f"jet evaluation over {Interval.coerce(box)} is undefined")
    c = Interval(float(lo), float(hi))
    return c * factorial(k)
