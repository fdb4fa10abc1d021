"""memheat: numerical laboratory for a polyharmonic heat equation driven by a
weakly singular memory nonlinearity.

The package simulates, on periodic boxes,

    u_t + (-Delta)^m u = int_0^t (t-s)^(-gamma) |u(s)|^p ds,

and provides the supporting machinery: Riemann-Liouville fractional calculus
on time grids, the polyharmonic semigroup, singular-kernel memory quadrature,
Duhamel and Picard time integration with blow-up detection, blow-up rate
fitting, and the nonexistence-certificate quadratures built from smooth bump
test functions.
"""

from memheat.core import (
    DerivedExponents,
    Grid,
    GridFunction,
    Params,
    derived_exponents,
    lp_norm,
    make_params,
)

__version__ = "0.1.0"

__all__ = [
    "Params",
    "DerivedExponents",
    "Grid",
    "GridFunction",
    "make_params",
    "derived_exponents",
    "lp_norm",
]
