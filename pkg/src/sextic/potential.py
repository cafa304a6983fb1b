"""Shared domain types: rational potentials and quasi-rational functions.

A :class:`RationalPotential` is a polynomial part of degree <= 6 plus an
``l(l+1)/x**2`` origin singularity plus finitely many double poles with
integer multiplicities.  A :class:`QuasiRationalFunction` is the eigenfunction
ansatz ``x**mu * poly * prod(x-y_j)/prod(x-x_i) * exp(eps*x**4/4)``.

The Riccati-form Schrodinger residual lives here because every module needs
it: psi is an exact eigenfunction of -D^2 + V at eigenvalue lam iff
``f' + f**2 - V + lam`` vanishes identically, where f = D log psi is a
rational function for any real origin exponent mu.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mpc, mpf

from .poly import Poly, RationalFn, rational_reduce
from .precision import as_mpc, as_mpf, zero_tol


@dataclass(frozen=True)
class RationalPotential:
    """V = poly_part + ell(ell+1)/x^2 + sum_i k_i(k_i+1)/(x - x_i)^2."""

    poly_part: Poly
    ell: mpf = mpf(0)
    poles: tuple = ()  # ((location: mpc, multiplicity: int), ...)

    def __post_init__(self):
        object.__setattr__(self, "ell", as_mpf(self.ell))
        pl = tuple((as_mpc(z), int(k)) for z, k in self.poles)
        for z, k in pl:
            if k < 1:
                raise ValueError("pole multiplicities must be positive")
            if z == 0:
                raise ValueError("finite poles must be away from the origin")
        object.__setattr__(self, "poles", pl)

    @classmethod
    def sextic(cls, nu, ell=0, poles=()) -> "RationalPotential":
        """The canonical x^6 - nu*x^2 polynomial part."""
        return cls(Poly([0, 0, -as_mpf(nu), 0, 0, 0, 1]), ell, tuple(poles))

    @property
    def origin_coeff(self) -> mpf:
        return self.ell * (self.ell + 1)

    def nu(self) -> mpc:
        """Convenience: minus the x^2 coefficient of the polynomial part."""
        return -self.poly_part[2]

    def to_rational_fn(self) -> RationalFn:
        f = RationalFn.of(self.poly_part)
        if self.origin_coeff != 0:
            f = f + RationalFn(Poly([self.origin_coeff]), Poly([0, 0, 1]))
        for z, k in self.poles:
            f = f + RationalFn(Poly([mpf(k * (k + 1))]), Poly.from_roots([z, z]))
        return f

    def is_symmetric(self, tol=None) -> bool:
        """Even polynomial part and pole set closed under x -> -x."""
        t = zero_tol() if tol is None else mpf(tol)
        if not self.poly_part.is_even(t):
            return False
        left = list(self.poles)
        scale = max([mpf(1)] + [abs(z) for z, _ in left])
        while left:
            z, k = left.pop()
            for i, (w, kw) in enumerate(left):
                if abs(w + z) <= t * scale and kw == k:
                    del left[i]
                    break
            else:
                return False
        return True


@dataclass(frozen=True)
class QuasiRationalFunction:
    """psi = x^mu * poly_factor * prod(x-y)/prod(x-p) * exp(eps*x^4/4)."""

    mu: mpf
    eps: int
    zeros: tuple = ()
    poles: tuple = ()
    poly_factor: Poly | None = None
    time_phase: mpc | None = None

    def __post_init__(self):
        if self.eps not in (-1, 1):
            raise ValueError("eps must be +1 or -1")
        object.__setattr__(self, "mu", as_mpf(self.mu))
        object.__setattr__(self, "zeros", tuple(as_mpc(z) for z in self.zeros))
        object.__setattr__(self, "poles", tuple(as_mpc(z) for z in self.poles))

    def log_derivative(self) -> RationalFn:
        """f = D log psi = mu/x + sum 1/(x-y) - sum 1/(x-p) + P'/P + eps*x^3."""
        f = RationalFn.of(Poly([0, 0, 0, self.eps]))
        if self.mu != 0:
            f = f + RationalFn(Poly([self.mu]), Poly([0, 1]))
        for y in self.zeros:
            f = f + RationalFn(Poly.one(), Poly([-y, 1]))
        for p in self.poles:
            f = f - RationalFn(Poly.one(), Poly([-p, 1]))
        if self.poly_factor is not None and self.poly_factor.degree >= 1:
            f = f + RationalFn(self.poly_factor.derivative(), self.poly_factor)
        return f


def schrodinger_residual(V: RationalPotential, psi: QuasiRationalFunction, lam, tol=None) -> mpf:
    """Max numerator coefficient of f' + f^2 - V + lam after normalization.

    Zero (below tolerance) certifies that psi is an exact eigenfunction of
    -D^2 + V with eigenvalue lam.
    """
    f = psi.log_derivative()
    r = f.derivative() + f * f - V.to_rational_fn() + as_mpc(lam)
    m = r.monic_den(tol)
    t = zero_tol() if tol is None else mpf(tol)
    if m.num.scale() <= t:
        return m.num.scale()
    return rational_reduce(r, tol).num.scale()
