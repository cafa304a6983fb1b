"""Monodromy-free rational Schrodinger potentials with sextic growth.

Library + CLI for quasi-exactly-solvable spectra of
V = x^6 - nu*x^2 + l(l+1)/x^2, Darboux/Crum descendants and their
structure checks, trivial-monodromy (locus) and Stieltjes algebraic
systems, and the associated first-order pole dynamics.

Importing the package sets mpmath's global precision to 256 bits; use
``sextic.set_precision`` to change it.
"""

from .precision import DEFAULT_BITS, precision, set_precision, zero_tol

set_precision(DEFAULT_BITS)

from .poly import (  # noqa: E402
    NonConvergenceError,
    Poly,
    RationalFn,
    laurent_expand,
    pole_order,
    poly_roots,
    rational_reduce,
)
from .potential import (  # noqa: E402
    QuasiRationalFunction,
    RationalPotential,
    schrodinger_residual,
)

__all__ = [
    "DEFAULT_BITS",
    "NonConvergenceError",
    "Poly",
    "QuasiRationalFunction",
    "RationalFn",
    "RationalPotential",
    "laurent_expand",
    "pole_order",
    "poly_roots",
    "precision",
    "rational_reduce",
    "schrodinger_residual",
    "set_precision",
    "zero_tol",
]
