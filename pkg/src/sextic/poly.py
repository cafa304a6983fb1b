"""Dense univariate polynomials and rational functions over mpmath complex.

This is the coefficient engine every other module is built on: ring
arithmetic, derivatives, Taylor shifts, Laurent expansion of rational
functions at arbitrary centers, and simultaneous (Aberth-Ehrlich) root
finding with multiplicity clustering.

Coefficients are stored in ascending power order.  Exact zeros produced by
cancellation are trimmed on construction; tolerance-aware trimming (for
degree and valuation questions) always takes an explicit tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .precision import as_mpc, zero_tol


class NonConvergenceError(RuntimeError):
    """Raised when an iterative solve exhausts its iteration budget."""

    def __init__(self, message, last=None, info=None):
        super().__init__(message)
        self.last = last
        self.info = info or {}


class Poly:
    """Dense polynomial with mpc coefficients, index = power."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        cs = [as_mpc(v) for v in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.c = tuple(cs)

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def one(cls):
        return cls((1,))

    @classmethod
    def x(cls, power=1, coeff=1):
        return cls((0,) * power + (coeff,))

    @classmethod
    def from_roots(cls, roots, lead=1):
        p = cls((lead,))
        for r in roots:
            p = p * cls((-as_mpc(r), 1))
        return p

    # -- basic structure ---------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree after exact-zero trimming; -1 for the zero polynomial."""
        return len(self.c) - 1

    def scale(self) -> mpf:
        """Largest coefficient magnitude (0 for the zero polynomial)."""
        return max((abs(v) for v in self.c), default=mpf(0))

    def is_zero(self, tol=None) -> bool:
        return self.scale() <= (zero_tol() if tol is None else tol)

    def trimmed(self, tol=None) -> "Poly":
        """Drop trailing coefficients below tol relative to the scale."""
        t = (zero_tol() if tol is None else mpf(tol)) * max(mpf(1), self.scale())
        cs = list(self.c)
        while cs and abs(cs[-1]) <= t:
            cs.pop()
        return Poly(cs)

    def valuation(self, tol=None) -> int:
        """Index of the first coefficient above tol (relative); degree+1 if none."""
        t = (zero_tol() if tol is None else mpf(tol)) * max(mpf(1), self.scale())
        for i, v in enumerate(self.c):
            if abs(v) > t:
                return i
        return len(self.c)

    def __getitem__(self, k) -> mpc:
        return self.c[k] if 0 <= k < len(self.c) else mpc(0)

    def __repr__(self):
        return f"Poly({[mp.nstr(v, 8) for v in self.c]})"

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        n = max(len(self.c), len(other.c))
        return Poly([self[k] + other[k] for k in range(n)])

    def __sub__(self, other):
        other = _coerce(other)
        n = max(len(self.c), len(other.c))
        return Poly([self[k] - other[k] for k in range(n)])

    def __neg__(self):
        return Poly([-v for v in self.c])

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, mpf, mpc)):
            w = as_mpc(other)
            return Poly([v * w for v in self.c])
        other = _coerce(other)
        if not self.c or not other.c:
            return Poly.zero()
        out = [mpc(0)] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a == 0:
                continue
            for j, b in enumerate(other.c):
                out[i + j] += a * b
        return Poly(out)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return _coerce(other) - self

    def __pow__(self, n):
        out, base = Poly.one(), self
        while n:
            if n & 1:
                out = out * base
            base, n = base * base, n >> 1
        return out

    def __call__(self, x):
        acc = mpc(0)
        xv = as_mpc(x)
        for v in reversed(self.c):
            acc = acc * xv + v
        return acc

    def derivative(self, order=1) -> "Poly":
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        cs = list(self.c)
        for _ in range(order):
            cs = [k * cs[k] for k in range(1, len(cs))]
        return Poly(cs)

    def monic(self, tol=None) -> "Poly":
        p = self.trimmed(tol)
        if not p.c:
            return p
        lead = p.c[-1]
        return Poly([v / lead for v in p.c])

    def shifted(self, a) -> "Poly":
        """Taylor shift: coefficients of p(u + a) in u."""
        a = as_mpc(a)
        cs = list(self.c)
        n = len(cs) - 1
        for k in range(n):
            for j in range(n - 1, k - 1, -1):
                cs[j] += a * cs[j + 1]
        return Poly(cs)

    def shifted_down(self, k) -> "Poly":
        """Divide by x**k, discarding the (assumed negligible) low coefficients."""
        return Poly(self.c[k:])

    def even_part(self) -> "Poly":
        """Projection onto even powers (odd coefficients set to exact zero)."""
        return Poly([self.c[k] if k % 2 == 0 else mpc(0) for k in range(len(self.c))])

    def is_even(self, tol=None) -> bool:
        t = (zero_tol() if tol is None else mpf(tol)) * max(mpf(1), self.scale())
        return all(abs(self.c[k]) <= t for k in range(1, len(self.c), 2))

    def divmod(self, other, tol=None):
        """Euclidean division self = q*other + r with deg r < deg other."""
        den = other.trimmed(tol)
        if not den.c:
            raise ZeroDivisionError("polynomial division by zero")
        num = list(self.c)
        dq = len(num) - len(den.c)
        if dq < 0:
            return Poly.zero(), Poly(num)
        q = [mpc(0)] * (dq + 1)
        lead = den.c[-1]
        for k in range(dq, -1, -1):
            coef = num[k + len(den.c) - 1] / lead
            q[k] = coef
            if coef != 0:
                for j, b in enumerate(den.c):
                    num[k + j] -= coef * b
        return Poly(q), Poly(num[: len(den.c) - 1])

    def deflate(self, root) -> tuple["Poly", mpc]:
        """Synthetic division by (x - root); returns (quotient, remainder)."""
        r = as_mpc(root)
        n = len(self.c) - 1
        if n < 0:
            return Poly.zero(), mpc(0)
        if n == 0:
            return Poly.zero(), self.c[0]
        b = [mpc(0)] * n
        b[n - 1] = self.c[n]
        for k in range(n - 1, 0, -1):
            b[k - 1] = self.c[k] + r * b[k]
        rem = self.c[0] + r * b[0]
        return Poly(b), rem


def _coerce(v) -> Poly:
    if isinstance(v, Poly):
        return v
    return Poly((as_mpc(v),))


def poly_close(a: Poly, b: Poly, tol=None) -> bool:
    """Coefficientwise closeness relative to the larger scale."""
    t = (zero_tol() if tol is None else mpf(tol)) * max(mpf(1), a.scale(), b.scale())
    return (a - b).scale() <= t


# ---------------------------------------------------------------------------
# Root finding: Aberth-Ehrlich simultaneous iteration + multiplicity clusters
# ---------------------------------------------------------------------------

def fujiwara_bound(p: Poly) -> mpf:
    """Fujiwara upper bound on root magnitudes of a nonconstant polynomial."""
    n = p.degree
    lead = abs(p.c[-1])
    best = mpf(0)
    for k in range(1, n + 1):
        a = abs(p[n - k]) / lead
        if k == n:
            a = a / 2
        if a > 0:
            best = max(best, a ** (mpf(1) / k))
    return 2 * best if best > 0 else mpf(1)


def _aberth(p: Poly, max_iter: int):
    n = p.degree
    dp = p.derivative()
    R = fujiwara_bound(p)
    z = []
    for j in range(n):
        r = R * (mpf('0.55') + mpf('0.35') * ((j * mpf('0.61803398875')) % 1))
        th = 2 * mp.pi * j / n + mpf('0.3771') + mpf('0.0917') * j / n
        z.append(r * mp.exp(mpc(0, th)))
    stop = mpf(2) ** (-(mp.prec - 8))
    best_res = mp.inf
    stall = 0
    for _ in range(max_iter):
        pv = [p(zi) for zi in z]
        res = max(abs(v) for v in pv)
        if res < best_res * mpf('0.97'):
            best_res, stall = res, 0
        else:
            stall += 1
        moved = mpf(0)
        for i in range(n):
            dv = dp(z[i])
            if dv == 0:
                z[i] += stop * (1 + abs(z[i]))
                moved = mp.inf
                continue
            w = pv[i] / dv
            s = mpc(0)
            for j in range(n):
                if j != i:
                    d = z[i] - z[j]
                    if d == 0:
                        d = stop * (1 + abs(z[i]))
                    s += 1 / d
            denom = 1 - w * s
            step = w if denom == 0 else w / denom
            z[i] -= step
            moved = max(moved, abs(step) / (1 + abs(z[i])))
        if moved < stop or stall >= 15:
            break
    return z


def _cluster(points, tol, scale):
    """Greedy agglomerative merge with radius tol**(1/k) for cluster size k."""
    clusters = [[pt] for pt in points]
    merged = True
    while merged and len(clusters) > 1:
        merged = False
        best = None
        for i in range(len(clusters)):
            ci = sum(clusters[i], mpc(0)) / len(clusters[i])
            for j in range(i + 1, len(clusters)):
                cj = sum(clusters[j], mpc(0)) / len(clusters[j])
                d = abs(ci - cj)
                k = len(clusters[i]) + len(clusters[j])
                radius = (tol ** (mpf(1) / k)) * max(mpf(1), scale)
                if d < radius and (best is None or d < best[0]):
                    best = (d, i, j)
        if best is not None:
            _, i, j = best
            clusters[i] = clusters[i] + clusters[j]
            del clusters[j]
            merged = True
    out = []
    for cl in clusters:
        out.append((sum(cl, mpc(0)) / len(cl), len(cl)))
    out.sort(key=lambda rm: (mpf(rm[0].real), mpf(rm[0].imag)))
    return out


def poly_roots(p: Poly, tol=None, max_iter=200):
    """All roots of p with multiplicities, as [(root, multiplicity), ...].

    Aberth-Ehrlich simultaneous iteration from a perturbed circle at the
    Fujiwara radius; afterwards roots are clustered with the
    ``tol**(1/multiplicity)`` merge radius, so a k-fold root comes back as
    one entry of multiplicity k (its cluster centroid).  The multiplicities
    always sum to the (tolerance-trimmed) degree.
    """
    t = zero_tol() if tol is None else mpf(tol)
    q = p.trimmed(t)
    if q.degree < 1:
        raise ValueError("root finding needs degree >= 1")
    v = q.valuation(t)
    roots = [(mpc(0), v)] if v > 0 else []
    q = q.shifted_down(v)
    n = q.degree
    if n == 0:
        return roots
    if n == 1:
        roots.append((-q.c[0] / q.c[1], 1))
    elif n == 2:
        a, b, c = q.c[2], q.c[1], q.c[0]
        disc = mp.sqrt(b * b - 4 * a * c)
        # pick the sign that avoids cancellation in -b -+ disc
        s = disc if abs(-b + disc) >= abs(-b - disc) else -disc
        r1 = (-b + s) / (2 * a)
        r2 = (c / (a * r1)) if r1 != 0 else (-b - s) / (2 * a)
        pts = [r1, r2]
        roots.extend(_cluster(pts, t, max(abs(r1), abs(r2))))
    else:
        pts = _aberth(q, max_iter)
        scale = max((abs(z) for z in pts), default=mpf(1))
        roots.extend(_cluster(pts, t, scale))
    roots.sort(key=lambda rm: (mpf(rm[0].real), mpf(rm[0].imag)))
    if sum(m for _, m in roots) != p.trimmed(t).degree:
        raise NonConvergenceError("root multiplicities do not sum to degree", last=roots)
    return roots


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalFn:
    """Quotient of two polynomials; not automatically reduced."""

    num: Poly
    den: Poly

    @classmethod
    def of(cls, num, den=Poly((1,))) -> "RationalFn":
        return cls(_coerce(num), _coerce(den))

    def __add__(self, other):
        other = _coerce_rat(other)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other):
        other = _coerce_rat(other)
        return RationalFn(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __mul__(self, other):
        other = _coerce_rat(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        other = _coerce_rat(other)
        return RationalFn(self.num * other.den, self.den * other.num)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return _coerce_rat(other) - self

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def derivative(self) -> "RationalFn":
        return RationalFn(self.num.derivative() * self.den - self.num * self.den.derivative(),
                          self.den * self.den)

    def monic_den(self, tol=None) -> "RationalFn":
        den = self.den.trimmed(tol)
        if not den.c:
            raise ZeroDivisionError("zero denominator")
        lead = den.c[-1]
        return RationalFn(Poly([v / lead for v in self.num.c]),
                          Poly([v / lead for v in den.c]))

    def residual_scale(self, tol=None) -> mpf:
        """Max numerator coefficient after monic-denominator normalization.

        Zero (below tolerance) certifies that the function is identically
        zero; used as the metric for all symbolic identity checks.
        """
        return self.monic_den(tol).num.scale()


def _coerce_rat(v) -> RationalFn:
    if isinstance(v, RationalFn):
        return v
    if isinstance(v, Poly):
        return RationalFn(v, Poly.one())
    return RationalFn(_coerce(v), Poly.one())


def rational_reduce(f: RationalFn, tol=None) -> RationalFn:
    """Cancel common roots of numerator and denominator; monic denominator."""
    t = zero_tol() if tol is None else mpf(tol)
    num, den = f.num.trimmed(t), f.den.trimmed(t)
    if not den.c:
        raise ZeroDivisionError("zero denominator")
    if not num.c:
        return RationalFn(Poly.zero(), Poly.one())
    if den.degree >= 1:
        for root, mult in poly_roots(den, t):
            for _ in range(mult):
                q, rem = num.deflate(root)
                if abs(rem) <= t * max(mpf(1), num.scale()) and q.c:
                    num = q
                    dq, drem = den.deflate(root)
                    den = dq
                else:
                    break
    lead = den.c[-1]
    num = Poly([v / lead for v in num.c])
    den = Poly([v / lead for v in den.c])
    return RationalFn(num, den)


def cancel_at(f: RationalFn, roots, tol=None) -> RationalFn:
    """Cancel known common roots (cheaper than rediscovering them)."""
    t = zero_tol() if tol is None else mpf(tol)
    num, den = f.num, f.den
    for r in roots:
        while True:
            qn, rn = num.deflate(r)
            qd, rd = den.deflate(r)
            okn = abs(rn) <= t * max(mpf(1), num.scale())
            okd = abs(rd) <= t * max(mpf(1), den.scale())
            if okn and okd and qn.c and qd.c:
                num, den = qn, qd
            else:
                break
    return RationalFn(num, den)


def laurent_expand(f: RationalFn, center, lowest_order: int, n_terms: int, tol=None):
    """Laurent coefficients c_k of f at center, k = lowest_order .. +n_terms-1.

    Orders below the actual leading order come back as exact zeros.  Common
    (x-center) factors of numerator and denominator are cancelled first, so
    the implied leading order is exactly minus the pole order.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    t = zero_tol() if tol is None else mpf(tol)
    num = f.num.shifted(center)
    den = f.den.shifted(center)
    if den.is_zero(t):
        raise ZeroDivisionError("denominator is zero at every point")
    vn, vd = num.valuation(t), den.valuation(t)
    if num.is_zero(t):
        return [mpc(0)] * n_terms
    k = min(vn, vd)
    if k > 0:
        num, den = num.shifted_down(k), den.shifted_down(k)
        vn, vd = vn - k, vd - k
    lead_order = vn - vd
    hi = lowest_order + n_terms - 1
    need = hi - lead_order + 1
    if need <= 0:
        return [mpc(0)] * n_terms
    # power-series division of num/x^vn by den/x^vd
    nn = num.shifted_down(vn)
    dd = den.shifted_down(vd)
    inv0 = dd.c[0]
    series = []
    for j in range(need):
        acc = nn[j]
        for i in range(j):
            acc -= series[i] * dd[j - i]
        series.append(acc / inv0)
    out = []
    for order in range(lowest_order, hi + 1):
        idx = order - lead_order
        out.append(series[idx] if 0 <= idx < need else mpc(0))
    return out


def pole_order(f: RationalFn, center, tol=None) -> int:
    """Order of the pole of f at center (<= 0 means regular point)."""
    t = zero_tol() if tol is None else mpf(tol)
    num = f.num.shifted(center)
    den = f.den.shifted(center)
    vn, vd = num.valuation(t), den.valuation(t)
    return vd - vn
