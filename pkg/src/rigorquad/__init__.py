"""Rigorous interval enclosures of singular integrals.

Modules:

* :mod:`rigorquad.interval`: outward-rounded interval arithmetic
* :mod:`rigorquad.taylor`: interval Taylor jets in one or two variables
* :mod:`rigorquad.quad`: rigorous Gauss-Legendre and singular-quotient cubature
* :mod:`rigorquad.muskat`: the Muskat interface integrals and their region plans
* :mod:`rigorquad.cli`: the campaign runner
"""

from .interval import PI, Interval, rounding_mode, set_rounding_mode, use_rounding

__version__ = "0.1.0"

__all__ = ["Interval", "PI", "rounding_mode", "set_rounding_mode", "use_rounding", "__version__"]
