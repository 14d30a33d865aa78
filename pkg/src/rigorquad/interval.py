"""Outward-rounded interval arithmetic over IEEE doubles.

Two layers live here. The array kernels (``add``, ``mul``, ``sin``, ...) take
and return ``(lo, hi)`` pairs of numpy arrays and are what the jet and
quadrature code runs on. They never raise: an undefined result (division by an
interval containing zero) is poisoned with NaN and detected downstream. The
:class:`Interval` value type wraps the same kernels for scalar use and turns
those poisoned results into exceptions.

Directed rounding has two realizations, selected per thread:

``"nextafter"`` (default)
    Evaluate in round-to-nearest and step an endpoint one ulp outward unless
    an error-free transform proves it exact.
``"hardware"``
    Switch the FPU rounding direction with ``fesetround`` around each
    endpoint computation. Only the four basic operations use it; elementary
    functions always run in round-to-nearest with an ulp margin.
"""

from __future__ import annotations

import contextlib
import ctypes
import ctypes.util
import math
import platform
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "Interval",
    "DivisionByZeroInterval",
    "GeometricSplitUndefined",
    "PI",
    "SQRT3_OVER_3",
    "ROUNDING_MODES",
    "rounding_mode",
    "use_rounding",
    "hardware_rounding_available",
    "elem",
    "hull",
    "fsum_bounds",
    "split",
]


class DivisionByZeroInterval(ZeroDivisionError):
    """Raised when dividing by an interval that contains zero."""


class GeometricSplitUndefined(ValueError):
    """Raised when a geometric split is requested on a sign-indefinite interval."""


# ---------------------------------------------------------------------------
# rounding modes

ROUNDING_MODES = ("nextafter", "hardware")

_FE_CODES = {
    # (to-nearest, downward, upward)
    "x86_64": (0x000, 0x400, 0x800),
    "AMD64": (0x000, 0x400, 0x800),
    "i686": (0x000, 0x400, 0x800),
    "aarch64": (0x000000, 0x800000, 0x400000),
    "arm64": (0x000000, 0x800000, 0x400000),
}


def _load_fenv():
    codes = _FE_CODES.get(platform.machine())
    name = ctypes.util.find_library("m")
    if codes is None or name is None:
        return None, None
    try:
        libm = ctypes.CDLL(name)
        fesetround = libm.fesetround
    except (OSError, AttributeError):
        return None, None
    fesetround.argtypes = [ctypes.c_int]
    fesetround.restype = ctypes.c_int
    # Only trust the control if numpy arithmetic actually follows it.
    one, three = np.array([1.0]), np.array([3.0])
    try:
        if fesetround(codes[1]) != 0:
            return None, None
        down = (one / three)[0]
        fesetround(codes[2])
        up = (one / three)[0]
    finally:
        fesetround(codes[0])
    if not down < up:
        return None, None
    return fesetround, codes


_fesetround, _fe_codes = _load_fenv()
_state = threading.local()


def hardware_rounding_available() -> bool:
    return _fesetround is not None


def rounding_mode() -> str:
    """Name of the directed-rounding realization active in this thread."""
    return getattr(_state, "mode", "nextafter")


def set_rounding_mode(mode: str) -> None:
    """Select the rounding realization for the calling thread."""
    if mode not in ROUNDING_MODES:
        raise ValueError(f"unknown rounding mode {mode!r}; expected one of {ROUNDING_MODES}")
    if mode == "hardware" and _fesetround is None:
        raise RuntimeError("hardware rounding control is not available on this platform")
    _state.mode = mode


@contextlib.contextmanager
def use_rounding(mode: str):
    """Scoped, thread-local switch of the rounding realization."""
    previous = rounding_mode()
    set_rounding_mode(mode)
    try:
        yield
    finally:
        _state.mode = previous


@contextlib.contextmanager
def _fe(direction: int):
    _fesetround(_fe_codes[direction])
    try:
        yield
    finally:
        _fesetround(_fe_codes[0])


_DOWN, _UP = 1, 2
_NEG_INF, _POS_INF = -np.inf, np.inf


def _dn(x):
    return np.nextafter(x, _NEG_INF)


def _up(x):
    return np.nextafter(x, _POS_INF)


# Elementary functions come from numpy in round-to-nearest. Their measured
# error is below 0.8 ulp on this code's argument ranges; two ulps of outward
# margin keep the enclosure sound with room to spare.
def _dn2(x):
    return _dn(_dn(x))


def _up2(x):
    return _up(_up(x))


def _hw() -> bool:
    return getattr(_state, "mode", "nextafter") == "hardware"


# ---------------------------------------------------------------------------
# array kernels on (lo, hi) pairs


def neg(alo, ahi):
    return -ahi, -alo


# Error-free transforms. In the nextafter realization the residual of the
# transform says on which side of the exact result the rounded value lies, so
# an endpoint is nudged only when it landed on the wrong side. That is the
# same answer directed rounding would give, wherever the transform is valid.

_SPLITTER = 134217729.0  # 2**27 + 1
_TP_SAFE_HI = 2.0**995
_TP_SAFE_LO = 2.0**-969


def _two_sum_err(a, b, s):
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _product_err(a, b, p):
    """Error ``a*b - p`` of ``p == fl(a*b)`` and a mask of where it is exact."""
    ah, al = _split(a)
    bh, bl = _split(b)
    e = al * bl - (((p - ah * bh) - al * bh) - ah * bl)
    # Dekker's transform is exact only away from overflow and underflow
    aa, ab = np.abs(a), np.abs(b)
    safe = (aa < _TP_SAFE_HI) & (ab < _TP_SAFE_HI)
    safe &= ((aa > _TP_SAFE_LO) & (ab > _TP_SAFE_LO) & (np.abs(p) > _TP_SAFE_LO)) | (a == 0) | (b == 0)
    return e, safe


def _round_pair(x, err, valid=True):
    """Lower and upper bounds from ``x`` and the sign of ``exact - x``.

    Where ``valid`` is false or ``err`` is NaN both sides are nudged.
    """
    keep_lo = valid & (err >= 0)
    keep_hi = valid & (err <= 0)
    return np.where(keep_lo, x, _dn(x)), np.where(keep_hi, x, _up(x))


def _product_bounds(a, b):
    p = a * b
    e, safe = _product_err(a, b, p)
    return _round_pair(p, e, safe)


def _quotient_bounds(x, y):
    q = x / y
    p = q * y
    e, safe = _product_err(q, y, p)
    # x - q*y = (x - p) - e, and x - p is exact because p is within a factor
    # two of x; the sign of the residual times sign(y) orients x/y - q
    r = (x - p) - e
    safe &= np.isfinite(q) & (np.abs(p) <= 2 * np.abs(x)) & (np.abs(x) <= 2 * np.abs(p))
    safe |= (x == 0) & np.isfinite(y)
    return _round_pair(q, r * np.sign(y), safe)


def add(alo, ahi, blo, bhi):
    if _hw():
        with _fe(_DOWN):
            lo = alo + blo
        with _fe(_UP):
            hi = ahi + bhi
        return lo, hi
    lo, hi = alo + blo, ahi + bhi
    with np.errstate(invalid="ignore"):
        elo = _two_sum_err(alo, blo, lo)
        ehi = _two_sum_err(ahi, bhi, hi)
    return _round_pair(lo, elo)[0], _round_pair(hi, ehi)[1]


def sub(alo, ahi, blo, bhi):
    return add(alo, ahi, -bhi, -blo)


def _hull4(p1, p2, p3, p4):
    return (
        np.minimum(np.minimum(p1, p2), np.minimum(p3, p4)),
        np.maximum(np.maximum(p1, p2), np.maximum(p3, p4)),
    )


def _keep_sign(alo, ahi, blo, bhi, lo, hi):
    # products and quotients of sign-definite factors keep their sign even
    # when an endpoint underflows to zero and gets nudged across it
    same = ((alo >= 0) & (blo >= 0)) | ((ahi <= 0) & (bhi <= 0))
    opposite = ((alo >= 0) & (bhi <= 0)) | ((ahi <= 0) & (blo >= 0))
    return np.where(same, np.maximum(lo, 0.0), lo), np.where(opposite, np.minimum(hi, 0.0), hi)


def mul(alo, ahi, blo, bhi):
    if _hw():
        with _fe(_DOWN):
            lo, _ = _hull4(alo * blo, alo * bhi, ahi * blo, ahi * bhi)
        with _fe(_UP):
            _, hi = _hull4(alo * blo, alo * bhi, ahi * blo, ahi * bhi)
        return lo, hi
    lows, highs = [], []
    with np.errstate(invalid="ignore", over="ignore"):
        for x, y in ((alo, blo), (alo, bhi), (ahi, blo), (ahi, bhi)):
            plo, phi = _product_bounds(x, y)
            lows.append(plo)
            highs.append(phi)
    return _keep_sign(alo, ahi, blo, bhi, _hull4(*lows)[0], _hull4(*highs)[1])


def sqr(alo, ahi):
    """Square, tighter than ``mul(a, a)`` when the interval straddles zero."""
    straddle = (alo < 0) & (ahi > 0)
    mag_lo = np.minimum(np.abs(alo), np.abs(ahi))
    mag_hi = np.maximum(np.abs(alo), np.abs(ahi))
    if _hw():
        with _fe(_DOWN):
            lo = mag_lo * mag_lo
        with _fe(_UP):
            hi = mag_hi * mag_hi
    else:
        with np.errstate(invalid="ignore", over="ignore"):
            lo = _product_bounds(mag_lo, mag_lo)[0]
            hi = _product_bounds(mag_hi, mag_hi)[1]
    lo = np.where(straddle, 0.0, np.maximum(lo, 0.0))
    return lo, hi


def div(alo, ahi, blo, bhi):
    """Quotient; entries whose divisor contains zero come back as NaN."""
    bad = (blo <= 0) & (bhi >= 0)
    if np.any(bad):
        blo = np.where(bad, np.nan, blo)
        bhi = np.where(bad, np.nan, bhi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        if _hw():
            with _fe(_DOWN):
                lo, _ = _hull4(alo / blo, alo / bhi, ahi / blo, ahi / bhi)
            with _fe(_UP):
                _, hi = _hull4(alo / blo, alo / bhi, ahi / blo, ahi / bhi)
            return lo, hi
        lows, highs = [], []
        for x, y in ((alo, blo), (alo, bhi), (ahi, blo), (ahi, bhi)):
            qlo, qhi = _quotient_bounds(x, y)
            lows.append(qlo)
            highs.append(qhi)
        return _keep_sign(alo, ahi, blo, bhi, _hull4(*lows)[0], _hull4(*highs)[1])


def scale(alo, ahi, c: float):
    """Multiply by the exact machine number ``c``."""
    if c == 0:
        z = np.zeros(np.broadcast(alo, ahi).shape)
        return z, z.copy()
    if c < 0:
        alo, ahi, c = -ahi, -alo, -c
    if _hw():
        with _fe(_DOWN):
            lo = alo * c
        with _fe(_UP):
            hi = ahi * c
        return lo, hi
    with np.errstate(invalid="ignore", over="ignore"):
        return _product_bounds(alo, c)[0], _product_bounds(ahi, c)[1]


def divide_by(alo, ahi, k: float):
    """Divide by the exact positive machine number ``k``."""
    if _hw():
        with _fe(_DOWN):
            lo = alo / k
        with _fe(_UP):
            hi = ahi / k
        return lo, hi
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        return _quotient_bounds(alo, k)[0], _quotient_bounds(ahi, k)[1]


def ipow(alo, ahi, n: int):
    """Integer power ``n >= 0`` by repeated squaring."""
    if n < 0:
        raise ValueError("negative exponents are not supported; divide instead")
    shape = np.broadcast(alo, ahi).shape
    rlo, rhi = np.ones(shape), np.ones(shape)
    blo, bhi = alo, ahi
    first = True
    while n:
        if n & 1:
            if first:
                rlo, rhi = blo, bhi
                first = False
            else:
                rlo, rhi = mul(rlo, rhi, blo, bhi)
        n >>= 1
        if n:
            blo, bhi = sqr(blo, bhi)
    return rlo, rhi


# elementary functions

_TWO_PI = 2.0 * math.pi
# Beyond this window the float quotient x / 2pi in the extremum test loses
# more than the slack below, so sin/cos fall back to the trivial [-1, 1].
_TRIG_WINDOW = 1024.0
_CRIT_SLACK = 1e-12


def _hits(lo, hi, phase: float):
    """True where ``[lo, hi]`` may contain a point ``phase + 2*pi*k``.

    Errs on the side of True: an extremum closer than ~1e-11 to the interval
    is reported as contained, which only widens the result.
    """
    k_lo = np.ceil((lo - phase) / _TWO_PI - _CRIT_SLACK)
    k_hi = np.floor((hi - phase) / _TWO_PI + _CRIT_SLACK)
    return k_lo <= k_hi


def _bounds(x, fn, at_zero: float):
    """Outward bounds of ``fn(x)``, exact where ``x == 0``."""
    with np.errstate(over="ignore"):
        v = fn(x)
    zero = x == 0
    return np.where(zero, at_zero, _dn2(v)), np.where(zero, at_zero, _up2(v))


def _trig(alo, ahi, fn, at_zero, phase_max: float, phase_min: float):
    alo = np.asarray(alo, dtype=float)
    ahi = np.asarray(ahi, dtype=float)
    l1, h1 = _bounds(alo, fn, at_zero)
    l2, h2 = _bounds(ahi, fn, at_zero)
    lo, hi = np.minimum(l1, l2), np.maximum(h1, h2)
    hi = np.where(_hits(alo, ahi, phase_max), 1.0, hi)
    lo = np.where(_hits(alo, ahi, phase_min), -1.0, lo)
    wide = (ahi - alo >= _TWO_PI) | (alo < -_TRIG_WINDOW) | (ahi > _TRIG_WINDOW)
    lo = np.where(wide, -1.0, lo)
    hi = np.where(wide, 1.0, hi)
    return np.maximum(lo, -1.0), np.minimum(hi, 1.0)


def sin(alo, ahi):
    return _trig(alo, ahi, np.sin, 0.0, 0.5 * math.pi, -0.5 * math.pi)


def cos(alo, ahi):
    return _trig(alo, ahi, np.cos, 1.0, 0.0, math.pi)


def sinh(alo, ahi):
    return _bounds(np.asarray(alo, dtype=float), np.sinh, 0.0)[0], _bounds(np.asarray(ahi, dtype=float), np.sinh, 0.0)[1]


def cosh(alo, ahi):
    alo = np.asarray(alo, dtype=float)
    ahi = np.asarray(ahi, dtype=float)
    l1, h1 = _bounds(alo, np.cosh, 1.0)
    l2, h2 = _bounds(ahi, np.cosh, 1.0)
    straddle = (alo <= 0) & (ahi >= 0)
    lo = np.where(straddle, 1.0, np.maximum(np.minimum(l1, l2), 1.0))
    return lo, np.maximum(h1, h2)


def exp(alo, ahi):
    lo = _bounds(np.asarray(alo, dtype=float), np.exp, 1.0)[0]
    hi = _bounds(np.asarray(ahi, dtype=float), np.exp, 1.0)[1]
    return np.maximum(lo, 0.0), hi


ELEMENTARY = {"sin": sin, "cos": cos, "sinh": sinh, "cosh": cosh, "exp": exp}


# ---------------------------------------------------------------------------
# scalar value type


def _as_float(x) -> tuple[float, float]:
    """Tightest machine enclosure of a real scalar."""
    if isinstance(x, Interval):
        return x.lo, x.hi
    if isinstance(x, (float, np.floating)):
        return float(x), float(x)
    if isinstance(x, (int, np.integer, Fraction)):
        f = float(x)
        if Fraction(f) == Fraction(x):
            return f, f
        if Fraction(f) < Fraction(x):
            return f, math.nextafter(f, math.inf)
        return math.nextafter(f, -math.inf), f
    raise TypeError(f"cannot convert {type(x).__name__} to an interval")


def _scalar(pair) -> tuple[float, float]:
    lo, hi = pair
    return float(lo), float(hi)


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval ``[lo, hi]`` with machine-number endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval: lo={lo!r} > hi={hi!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> Interval:
        return cls(*_as_float(x))

    @classmethod
    def coerce(cls, x) -> Interval:
        return x if isinstance(x, Interval) else cls(*_as_float(x))

    @classmethod
    def parse(cls, text: str) -> Interval:
        """Inverse of ``str``: ``"[lo,hi]"``."""
        body = text.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError(f"not an interval literal: {text!r}")
        parts = body[1:-1].split(",")
        if len(parts) != 2:
            raise ValueError(f"not an interval literal: {text!r}")
        return cls(float(parts[0]), float(parts[1]))

    def __str__(self) -> str:
        return f"[{self.lo!r},{self.hi!r}]"

    # set queries

    @property
    def width(self) -> float:
        """``hi - lo`` rounded up."""
        w = self.hi - self.lo
        if Fraction(w) < Fraction(self.hi) - Fraction(self.lo):
            w = math.nextafter(w, math.inf)
        return w

    @property
    def midpoint(self) -> float:
        m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, (int, np.integer, Fraction)):
            return Fraction(self.lo) <= Fraction(x) <= Fraction(self.hi)
        return self.lo <= x <= self.hi

    __contains__ = contains

    def intersects(self, other: Interval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other) -> Interval:
        other = Interval.coerce(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    # arithmetic

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> Interval:
        return self

    def __add__(self, other) -> Interval:
        b = Interval.coerce(other)
        return Interval(*_scalar(add(self.lo, self.hi, b.lo, b.hi)))

    __radd__ = __add__

    def __sub__(self, other) -> Interval:
        b = Interval.coerce(other)
        return Interval(*_scalar(sub(self.lo, self.hi, b.lo, b.hi)))

    def __rsub__(self, other) -> Interval:
        return Interval.coerce(other) - self

    def __mul__(self, other) -> Interval:
        b = Interval.coerce(other)
        return Interval(*_scalar(mul(self.lo, self.hi, b.lo, b.hi)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> Interval:
        b = Interval.coerce(other)
        if b.lo <= 0 <= b.hi:
            raise DivisionByZeroInterval(f"division by {b}, which contains zero")
        return Interval(*_scalar(div(self.lo, self.hi, b.lo, b.hi)))

    def __rtruediv__(self, other) -> Interval:
        return Interval.coerce(other) / self

    def __pow__(self, n: int) -> Interval:
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer exponents are supported")
        return Interval(*_scalar(ipow(self.lo, self.hi, int(n))))

    def split(self, strategy: str = "arithmetic") -> tuple[Interval, Interval]:
        return split(self, strategy)


def hull(*items) -> Interval:
    out = Interval.coerce(items[0])
    for x in items[1:]:
        out = out.hull(x)
    return out


def elem(name: str, a) -> Interval:
    """Enclosure of ``name(a)`` for name in sin, cos, sinh, cosh, exp."""
    try:
        fn = ELEMENTARY[name]
    except KeyError:
        raise ValueError(f"unsupported elementary function {name!r}") from None
    a = Interval.coerce(a)
    lo, hi = _scalar(fn(a.lo, a.hi))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise OverflowError(f"{name}({a}) overflows double precision")
    return Interval(lo, hi)


def split_point(lo: float, hi: float, strategy: str) -> float:
    """Machine number strictly between ``lo`` and ``hi`` (if one exists)."""
    if strategy == "geometric":
        if not ((lo > 0 and hi > 0) or (lo < 0 and hi < 0)):
            raise GeometricSplitUndefined(f"geometric split needs a sign-definite interval, got [{lo!r},{hi!r}]")
        m = math.copysign(math.sqrt(lo * hi), lo)
    elif strategy == "arithmetic":
        m = 0.5 * lo + 0.5 * hi
    else:
        raise ValueError(f"unknown split strategy {strategy!r}")
    if not lo < m < hi:
        m = 0.5 * lo + 0.5 * hi
    return m


def split(a: Interval, strategy: str = "arithmetic") -> tuple[Interval, Interval]:
    a = Interval.coerce(a)
    if not a.lo < a.hi:
        raise ValueError(f"cannot split the degenerate interval {a}")
    m = split_point(a.lo, a.hi, strategy)
    if not a.lo < m < a.hi:
        raise ValueError(f"{a} has no interior machine number to split at")
    return Interval(a.lo, m), Interval(m, a.hi)


PI = Interval(3.141592653589793, 3.1415926535897936)
SQRT3_OVER_3 = Interval(0.5773502691896257, 0.5773502691896258)


@lru_cache(maxsize=256)
def _segment_layout(starts: tuple, lengths: tuple):
    width = max(lengths)
    offsets = np.arange(width)
    index = np.asarray(starts)[:, None] + offsets
    valid = offsets < np.asarray(lengths)[:, None]
    return np.where(valid, index, 0), valid, width


def segment_sum(lo, hi, starts, lengths):
    """Enclosure of segmented sums along the last axis.

    ``starts`` are the first indices of consecutive segments (as for
    ``np.add.reduceat``); ``lengths`` their sizes. In the nextafter
    realization the segments are padded with zeros and accumulated term by
    term with the directed-rounding :func:`add`, so exact sums stay exact.
    """
    if _hw():
        with _fe(_DOWN):
            slo = np.add.reduceat(lo, starts, axis=-1)
        with _fe(_UP):
            shi = np.add.reduceat(hi, starts, axis=-1)
        return slo, shi
    index, valid, width = _segment_layout(tuple(int(v) for v in starts), tuple(int(v) for v in lengths))
    if width == 1:
        return lo[..., index[:, 0]], hi[..., index[:, 0]]
    glo = np.where(valid, lo[..., index], 0.0)
    ghi = np.where(valid, hi[..., index], 0.0)
    slo, shi = glo[..., 0], ghi[..., 0]
    for k in range(1, width):
        slo, shi = add(slo, shi, glo[..., k], ghi[..., k])
    return slo, shi


def fsum_bounds(los, his) -> tuple[float, float]:
    """Directed-rounding sums of two float sequences (lower sum of ``los``, upper of ``his``).

    ``math.fsum`` rounds the exact sum to nearest; the correctly rounded
    residual then has the sign of the exact one, so ``s`` is moved by one ulp
    only when it lies on the wrong side.
    """
    los, his = [float(v) for v in los], [float(v) for v in his]
    lo, hi = math.fsum(los), math.fsum(his)
    if math.isfinite(lo) and math.fsum(los + [-lo]) < 0:
        lo = math.nextafter(lo, -math.inf)
    if math.isfinite(hi) and math.fsum(his + [-hi]) > 0:
        hi = math.nextafter(hi, math.inf)
    return lo, hi


def total(lo, hi, axis=-1):
    """Enclosure of the sum of intervals along ``axis``."""
    lo = np.moveaxis(np.asarray(lo, dtype=float), axis, -1)
    hi = np.moveaxis(np.asarray(hi, dtype=float), axis, -1)
    n = lo.shape[-1]
    slo, shi = segment_sum(lo, hi, np.array([0]), np.array([n]))
    return slo[..., 0], shi[..., 0]
