"""Wronskians, Crum descendants, the four D-families and their dualities.

A subset I of the M quasi-polynomial eigenfunctions produces the descendant
V_I = V - 2 (log W_I)''.  The Wronskian factors as
``W_I = x^(m*mu + m(m-1)/2) * P_I(x) * exp(eps*m*x^4/4)`` with P_I even of
degree 2m(M-m) and nonvanishing at the origin, so the descendant is again
rational with sextic growth: the polynomial part shifts nu by 6*eps*m, the
origin parameter moves to l+m (mu = l+1 branch) or l-m (mu = -l branch),
and the finite double poles sit at the roots of P_I.

Families are labeled by the signs in M = (s1*nu + s2*(2l+1))/4:
D++ (eps=-1, mu=-l), D+- (eps=-1, mu=l+1), D-+ (+1, -l), D-- (+1, l+1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mpc, mpf

from .poly import Poly, RationalFn, poly_roots
from .potential import QuasiRationalFunction, RationalPotential
from .precision import as_mpc, as_mpf, nearest_int, zero_tol
from .qes import MU_L_PLUS_1, MU_MINUS_L, QESProblem, QESSpectrum, eigenfunction, qes_spectrum

FAMILIES = ("D++", "D+-", "D-+", "D--")

_FAMILY_SIGNS = {"D++": (1, 1), "D+-": (1, -1), "D-+": (-1, 1), "D--": (-1, -1)}


class DependentFunctionsError(ValueError):
    """Wronskian vanished identically: the inputs are linearly dependent."""


class ConjectureViolationError(RuntimeError):
    """P_I has a multiple root whose pole coefficient is not k(k+1)-shaped."""


def family_signs(family: str):
    if family not in _FAMILY_SIGNS:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return _FAMILY_SIGNS[family]


def family_of(eps: int, mu_branch: str) -> str:
    s1 = -eps
    s2 = 1 if mu_branch == MU_MINUS_L else -1
    return {(1, 1): "D++", (1, -1): "D+-", (-1, 1): "D-+", (-1, -1): "D--"}[(s1, s2)]


def family_problem(family: str, nu, ell) -> QESProblem:
    s1, s2 = family_signs(family)
    return QESProblem(nu, ell, eps=-s1, mu_branch=MU_MINUS_L if s2 == 1 else MU_L_PLUS_1)


def family_M(family: str, nu, ell):
    """The family's solution count formula (s1*nu + s2*(2l+1))/4, unrounded."""
    s1, s2 = family_signs(family)
    return (s1 * as_mpf(nu) + s2 * (2 * as_mpf(ell) + 1)) / 4


def family_parameter_law(family: str, nu, ell, m: int):
    """(new_nu, new_ell, family M at the base parameters) after m steps.

    D+-: (nu-6m, l+m);  D++: (nu-6m, l-m);  D-+: (nu+6m, l-m);
    D--: (nu+6m, l+m).
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    s1, s2 = family_signs(family)
    nu, ell = as_mpf(nu), as_mpf(ell)
    return nu - 6 * s1 * m, ell - s2 * m, family_M(family, nu, ell)


def dual_parameters(nu, ell, M: int, mode: str = "crum"):
    """Parameter dualities.

    mode="crum": the full-subset involution (nu-6M, l+M, -M); applying it
    twice returns the original triple.  mode="reflect": the l -> -1-l
    reflection (nu, -1-l, M), which leaves l(l+1) invariant.
    """
    nu, ell = as_mpf(nu), as_mpf(ell)
    if mode == "crum":
        return nu - 6 * M, ell + M, -M
    if mode == "reflect":
        return nu, -1 - ell, M
    raise ValueError(f"unknown duality mode {mode!r}")


# ---------------------------------------------------------------------------
# Wronskians
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WronskianResult:
    subset: tuple
    m: int
    eps: int
    mu: mpf
    origin_exponent: mpf  # m*mu + prefactor_valuation
    prefactor_valuation: int  # power of x split off the polynomial Wronskian
    P_I: Poly
    is_even: bool

    @property
    def expected_valuation(self) -> int:
        return self.m * (self.m - 1) // 2

    def structure_ok(self, M: int, tol=None) -> bool:
        """Origin exponent and deg P_I match m*mu + m(m-1)/2 and 2m(M-m)."""
        return (self.prefactor_valuation == self.expected_valuation
                and self.P_I.trimmed(tol).degree == 2 * self.m * (M - self.m))


def _poly_wronskian(polys, tol) -> Poly:
    """Determinant of the derivative matrix, by subset dynamic programming."""
    m = len(polys)
    rows = []
    for order in range(m):
        rows.append([p.derivative(order) for p in polys])
    state = {0: Poly.one()}
    for i in range(m):
        new = {}
        for used, minor in state.items():
            for j in range(m):
                bit = 1 << j
                if used & bit:
                    continue
                sign = -1 if bin(used >> (j + 1)).count("1") % 2 else 1
                term = rows[i][j] * minor
                key = used | bit
                acc = new.get(key)
                new[key] = (term if sign > 0 else -term) if acc is None else (
                    acc + term if sign > 0 else acc - term)
        state = new
    return state[(1 << m) - 1]


def wronskian(functions, subset=(), tol=None) -> WronskianResult:
    """Wronskian of quasi-polynomial functions sharing (mu, eps).

    Computed on the polynomial factors only; the common prefactor
    x^mu exp(eps x^4/4) contributes x^(m*mu) exp(eps*m*x^4/4) exactly.
    """
    t = zero_tol() if tol is None else mpf(tol)
    m = len(functions)
    if m == 0:
        return WronskianResult(tuple(subset), 0, 1, mpf(0), mpf(0), 0, Poly.one(), True)
    mus = {str(f.mu) for f in functions}
    epss = {f.eps for f in functions}
    if len(mus) > 1 or len(epss) > 1:
        raise ValueError("Wronskian inputs must share origin exponent and exponential sign")
    for f in functions:
        if f.poly_factor is None or f.zeros or f.poles:
            raise ValueError("Wronskian inputs must be quasi-polynomial (polynomial factor only)")
    polys = [f.poly_factor for f in functions]
    W = _poly_wronskian(polys, t)
    in_scale = max(p.scale() for p in polys) ** m
    if W.trimmed(t).is_zero(t * max(mpf(1), in_scale)):
        raise DependentFunctionsError("identically zero Wronskian: dependent inputs")
    v = W.valuation(t)
    P_I = W.shifted_down(v).trimmed(t)
    mu = functions[0].mu
    eps = functions[0].eps
    return WronskianResult(tuple(subset), m, eps, mu, m * mu + v, v, P_I,
                           P_I.is_even(t))


# ---------------------------------------------------------------------------
# Crum descendants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DarbouxDescendant:
    potential: RationalPotential
    parent: QESProblem
    subset: tuple
    new_nu: mpf
    new_ell: mpf
    family: str
    wronskian: WronskianResult
    agreement_residual: mpf  # family-law potential vs base - 2(log W)''


def _log_second_derivative(P: Poly) -> RationalFn:
    """(log P)'' = (P''P - P'^2)/P^2 as a rational function."""
    dP = P.derivative()
    return RationalFn(P.derivative(2) * P - dP * dP, P * P)


def crum_rational_fn(base: RationalPotential, wr: WronskianResult) -> RationalFn:
    """base - 2 (log W_I)'' with the x^e exp(eps m x^4/4) prefactor handled
    analytically: -2(log W)'' = 2e/x^2 - 6 eps m x^2 - 2 (log P_I)''."""
    f = base.to_rational_fn()
    e = wr.origin_exponent
    if e != 0:
        f = f + RationalFn(Poly([2 * e]), Poly([0, 0, 1]))
    if wr.m:
        f = f - Poly([0, 0, 6 * wr.eps * wr.m])
    if wr.P_I.degree >= 1:
        f = f - 2 * _log_second_derivative(wr.P_I)
    return f


def _poles_from_PI(P_I: Poly, tol) -> tuple:
    """Poles of -2(log P_I)'': a root of multiplicity k contributes 2k/(x-r)^2,
    which is j(j+1)/(x-r)^2 only for triangular k (k = j(j+1)/2)."""
    if P_I.degree < 1:
        return ()
    poles = []
    for r, k in poly_roots(P_I, tol):
        j = nearest_int((-1 + mpf(1 + 8 * k) ** mpf('0.5')) / 2, 1e-9)
        if j is None or j * (j + 1) != 2 * k:
            raise ConjectureViolationError(
                f"P_I root {r} has multiplicity {k}; 2k is not of the form j(j+1)")
        poles.append((r, j))
    return tuple(poles)


def crum_potential(base: RationalPotential, subset, spectrum: QESSpectrum,
                   tol=None) -> DarbouxDescendant:
    """Darboux descendant of the base potential for an eigenfunction subset.

    The potential is assembled analytically from the family law and the roots
    of P_I, then cross-checked against base - 2 (log W_I)'' as a rational
    function; the residual of that comparison is recorded.
    """
    t = zero_tol() if tol is None else mpf(tol)
    problem = spectrum.problem
    subset = tuple(sorted(int(i) for i in subset))
    if subset and (subset[0] < 1 or subset[-1] > spectrum.M):
        raise ValueError(f"subset {subset} out of range 1..{spectrum.M}")
    if len(set(subset)) != len(subset):
        raise ValueError("subset indices must be distinct")
    fam = family_of(problem.eps, problem.mu_branch)
    m = len(subset)
    funcs = [eigenfunction(spectrum, i - 1) for i in subset]
    wr = wronskian(funcs, subset, t)
    new_nu, new_ell, _ = family_parameter_law(fam, problem.nu, problem.ell, m)
    poles = _poles_from_PI(wr.P_I, t)
    pot = RationalPotential.sextic(new_nu, new_ell, poles)
    diff = pot.to_rational_fn() - crum_rational_fn(base, wr)
    agreement = diff.monic_den(t).num.scale()
    return DarbouxDescendant(pot, problem, subset, new_nu, new_ell, fam, wr, agreement)


def enumerate_darboux_set(nu0, ell0, family: str, tol=None, max_M: int = 12):
    """All 2^M descendants of x^6 - nu0 x^2 + l0(l0+1)/x^2 for one family,
    in subset-lexicographic order (the empty subset is the base potential)."""
    problem = family_problem(family, nu0, ell0)
    M = problem.M
    if M is None:
        raise NoDarbouxSetError(f"family {family} has no positive integer M at "
                                f"nu={nu0}, ell={ell0}")
    if M > max_M:
        raise ValueError(f"M={M} exceeds enumeration cap {max_M}")
    spectrum = qes_spectrum(problem, tol)
    base = problem.potential()
    out = []
    for mask in range(1 << M):
        subset = tuple(i + 1 for i in range(M) if mask >> i & 1)
        out.append(crum_potential(base, subset, spectrum, tol))
    out.sort(key=lambda d: d.subset)
    return out


class NoDarbouxSetError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Arithmetic membership classifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipCandidate:
    m: int
    M0: int
    family: str


@dataclass(frozen=True)
class MembershipReport:
    N: int
    nu: mpf
    ell: mpf
    grid_member: bool
    family_M: dict
    candidates: tuple
    verdict: str  # "certified-nonmember" | "candidate-member"


def classify_membership(N: int, nu, ell, int_tol=1e-9) -> MembershipReport:
    """Arithmetic test whether an N-pole potential at (nu, l) can lie in the
    Darboux-reachable set.

    The pole count of a descendant after m steps from a starting count M0 is
    N = 2m(|M0| - m), and the observed family count must equal M0 - 2m.  The
    report lists every factorization-consistent (m, M0, family) candidate;
    an empty list with N > 0 certifies non-membership.
    """
    if N < 0 or N % 2:
        raise ValueError("pole count must be even and nonnegative")
    nu, ell = as_mpf(nu), as_mpf(ell)
    fam_M = {fam: family_M(fam, nu, ell) for fam in FAMILIES}
    fam_int = {fam: nearest_int(v, int_tol) for fam, v in fam_M.items()}
    grid = any(v is not None for v in fam_int.values())
    candidates = []
    if N == 0:
        if grid:
            for fam, v in fam_int.items():
                if v is not None:
                    candidates.append(MembershipCandidate(0, v, fam))
    else:
        d = N // 2
        for m in range(1, d + 1):
            if d % m:
                continue
            k = d // m
            for fam, v in fam_int.items():
                if v is not None and v == k - m:
                    candidates.append(MembershipCandidate(m, m + k, fam))
    verdict = "candidate-member" if candidates else "certified-nonmember"
    return MembershipReport(N, nu, ell, grid, fam_M, tuple(candidates), verdict)


# ---------------------------------------------------------------------------
# Simple-zero audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroAudit:
    degree: int
    histogram: dict  # multiplicity -> count
    min_separation: mpf | None
    all_simple: bool


def simple_zero_audit(obj, tol=None) -> ZeroAudit:
    """Multiplicity histogram and minimum root separation of P_I.

    Evidence for the simple-zero conjecture, never an assertion of it.
    """
    P = obj.P_I if isinstance(obj, WronskianResult) else (
        obj.wronskian.P_I if isinstance(obj, DarbouxDescendant) else obj)
    P = P.trimmed(tol)
    if P.degree < 1:
        return ZeroAudit(max(P.degree, 0), {}, None, True)
    roots = poly_roots(P, tol)
    hist = {}
    for _, k in roots:
        hist[k] = hist.get(k, 0) + 1
    min_sep = None
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            d = abs(roots[i][0] - roots[j][0])
            min_sep = d if min_sep is None else min(min_sep, d)
    return ZeroAudit(P.degree, hist, min_sep, all(k == 1 for _, k in roots))
