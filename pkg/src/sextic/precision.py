"""Working-precision context and zero-tolerance conventions.

Everything in this package runs on mpmath binary floats.  Importing
:mod:`sextic` sets the global mpmath precision to :data:`DEFAULT_BITS`;
callers can override it with :func:`set_precision` or temporarily with the
:func:`precision` context manager.

Comparisons against zero never use an implicit machine epsilon: every
predicate takes an explicit tolerance, defaulting to ``2**(-prec/2)``.  The
half-precision margin absorbs root-finder and arithmetic rounding while
staying far above honest nonzero residuals.
"""

from __future__ import annotations

import contextlib

from mpmath import mp, mpc, mpf, mpmathify

DEFAULT_BITS = 256


def set_precision(bits: int) -> None:
    """Set the global working precision in bits (>= 64)."""
    if bits < 64:
        raise ValueError(f"precision must be at least 64 bits, got {bits}")
    mp.prec = bits


@contextlib.contextmanager
def precision(bits: int):
    """Temporarily run at a different working precision."""
    old = mp.prec
    set_precision(bits)
    try:
        yield mp
    finally:
        mp.prec = old


def zero_tol(bits: int | None = None) -> mpf:
    """Default zero tolerance 2**(-prec/2) at the given or current precision."""
    return mpf(2) ** (-(bits if bits is not None else mp.prec) // 2)


def is_small(x, tol=None) -> bool:
    """|x| <= tol, with the package-default tolerance when tol is None."""
    return abs(x) <= (zero_tol() if tol is None else tol)


def as_mpc(x) -> mpc:
    """Coerce ints, floats, strings, mpf or mpc to mpc."""
    if isinstance(x, mpc):
        return x
    if isinstance(x, (int, float, mpf)):
        return mpc(x)
    return mpc(mpmathify(x))


def as_mpf(x) -> mpf:
    """Coerce a real-valued input to mpf, rejecting genuinely complex values."""
    z = as_mpc(x)
    if z.imag != 0:
        raise ValueError(f"expected a real value, got {z}")
    return z.real


def nearest_int(x, tol=1e-9) -> int | None:
    """Round a (real) value to the nearest integer if within tol, else None."""
    try:
        xr = as_mpf(x)
    except ValueError:
        xc = as_mpc(x)
        if abs(xc.imag) > tol:
            return None
        xr = xc.real
    n = int(mp.nint(xr))
    return n if abs(xr - n) <= tol else None
