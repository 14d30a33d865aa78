"""Non-rigorous high-precision reference values (mpmath).

Point values of every registered integrand at arbitrary precision, plus
tanh-sinh cubature over boxes. Used only to cross-check the rigorous
enclosures in tests and scripts; nothing here carries an error bound.
"""

from __future__ import annotations

import mpmath

from .muskat import CurveJet, Kernel, get_term

__all__ = ["curve_point", "integrand_value", "integrate_box"]


def curve_point(eps, A, x) -> CurveJet:
    """Curve value and derivatives at ``x`` as mpmath numbers."""
    x = mpmath.mpf(x)
    one_eps = 1 + mpmath.mpf(eps)
    A = mpmath.mpf(A)
    s, c = mpmath.sin(x), mpmath.cos(x)
    s2, c2 = mpmath.sin(2 * x), mpmath.cos(2 * x)
    return CurveJet(x - one_eps * s, 1 - one_eps * c, one_eps * s, one_eps * c, A * s2, 2 * A * c2, -4 * A * s2)


class _MpKernel(Kernel):
    """Kernel whose differences are taken literally between two curve points.

    Deliberately avoids the product forms of the rigorous kernel, so the
    oracle also checks those rewrites.
    """

    def __init__(self, base: CurveJet, shifted: CurveJet):
        super().__init__(None, None, None)
        for name in ("z1", "z2", "z1_x", "z1_xx", "z1_xxx", "z2_x", "z2_xx"):
            diff = getattr(base, name) - getattr(shifted, name)
            key = name.replace("z", "d").replace("_", "")
            self.__dict__[key] = diff

    @staticmethod
    def _sin(x):
        return mpmath.sin(x)

    @staticmethod
    def _sincos(x):
        return mpmath.sin(x), mpmath.cos(x)

    @staticmethod
    def _sinhcosh(x):
        return mpmath.sinh(x), mpmath.cosh(x)


# Below this distance from a singular axis the integrand (which is bounded)
# is taken as 0; quadrature nodes get that close only with negligible weight.
_AXIS_CUTOFF = mpmath.mpf("1e-30")


def integrand_value(term: str, y, z=None, *, eps=0, A="1.08050", dps: int = 40):
    """Integrand of ``term`` at ``(y, z)``, including its factor and symmetry factor.

    Working precision grows near the singular axes, where the denominator
    loses about two digits per digit of closeness.
    """
    spec = get_term(term)
    near = min(abs(mpmath.mpf(v)) for v in (y, z) if v is not None)
    if near < _AXIS_CUTOFF:
        return mpmath.mpf(0)
    extra = 0 if near >= 1 else int(-2 * mpmath.log10(near)) + 5
    with mpmath.workdps(dps + extra):
        A = mpmath.mpf(A)
        y = mpmath.mpf(y)
        zero = curve_point(eps, A, 0)
        if spec.arity == 1:
            v = spec.outer.value(_MpKernel(zero, curve_point(eps, A, -y)))
        else:
            z = mpmath.mpf(z)
            minus_y = curve_point(eps, A, -y)
            outer = _MpKernel(zero, minus_y)
            q0 = spec.inner.value(_MpKernel(zero, curve_point(eps, A, -z)))
            q1 = spec.inner.value(_MpKernel(minus_y, curve_point(eps, A, -y - z)))
            v = spec.outer.value(outer) * (q0 - q1)
        return +(spec.multiplier * v)


def integrate_box(term: str, y_range, z_range=None, *, eps=0, A="1.08050", dps: int = 20, degree: int = 6):
    """Tanh-sinh cubature of ``term`` over a box (endpoints may be mpmath expressions).

    The integrand is never evaluated on the box boundary, so removable
    singularities at the edges are harmless.
    """
    with mpmath.workdps(dps):
        f1 = lambda y: integrand_value(term, y, eps=eps, A=A, dps=dps + 20)
        if z_range is None:
            return mpmath.quad(f1, list(y_range), maxdegree=degree)
        f2 = lambda y, z: integrand_value(term, y, z, eps=eps, A=A, dps=dps + 20)
        return mpmath.quad(f2, list(y_range), list(z_range), maxdegree=degree)
