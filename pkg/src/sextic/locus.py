"""Trivial-monodromy checks and the algebraic locus systems on pole positions.

A rational potential has trivial monodromy iff at every double pole of
multiplicity m (Laurent coefficient m(m+1) at order -2) the m+1 leading odd
Laurent coefficients vanish.  For potentials built from the sextic
polynomial part, an origin term and simple finite poles, those conditions
reduce to the algebraic system

    sum_{j != i} 2/(x_i-x_j)^3 + l(l+1)/x_i^3 + nu*x_i - 3*x_i^5 = 0,

one equation per pole (the canonical odd coefficient is -2 times this).
Higher multiplicities k_i generalize to derivatives of the polynomial part:
P^(2s-1)(x_i) = (2s)! * sum_{j != i} k_j(k_j+1)/(x_i-x_j)^(2s+1), s<=k_i.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import matrix, mp, mpc, mpf

from .newton import CollisionError, damped_newton
from .poly import NonConvergenceError, Poly, RationalFn, laurent_expand, pole_order
from .potential import RationalPotential
from .precision import as_mpc, as_mpf, nearest_int, zero_tol


@dataclass(frozen=True)
class PoleConfiguration:
    """Pole positions with multiplicities, under parameters (nu, l)."""

    points: tuple  # ((x_i: mpc, k_i: int), ...)
    nu: mpf
    ell: mpf = mpf(0)
    symmetric: bool = False

    def __post_init__(self):
        pts = tuple((as_mpc(z), int(k)) for z, k in self.points)
        for z, k in pts:
            if k < 1:
                raise ValueError("multiplicities must be positive")
            if z == 0:
                raise ValueError("points must be nonzero (origin handled by ell)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "nu", as_mpf(self.nu))
        object.__setattr__(self, "ell", as_mpf(self.ell))

    @classmethod
    def symmetric_pairs(cls, reps, nu, ell=0, mults=None) -> "PoleConfiguration":
        """Build the +-closed configuration from one representative per pair."""
        mults = mults or [1] * len(reps)
        pts = []
        for r, k in zip(reps, mults):
            pts.append((as_mpc(r), k))
            pts.append((-as_mpc(r), k))
        return cls(tuple(pts), nu, ell, symmetric=True)

    def potential(self) -> RationalPotential:
        return RationalPotential.sextic(self.nu, self.ell, self.points)

    def scale(self) -> mpf:
        return max([mpf(1)] + [abs(z) for z, _ in self.points])


@dataclass(frozen=True)
class PoleCheck:
    location: mpc
    multiplicity: int
    lead_coeff: mpc        # Laurent coefficient at order -2
    lead_error: mpf        # |lead - m(m+1)|
    odd_coeffs: tuple      # orders -1, 1, ..., 2m-1


@dataclass(frozen=True)
class LocusReport:
    checks: tuple
    max_abs: mpf
    satisfied: bool
    tol: mpf


def trivial_monodromy_check(V: RationalPotential, tol=None) -> LocusReport:
    """Laurent-coefficient monodromy test at every finite pole of V.

    At each pole the order must be exactly 2, the -2 coefficient must be
    m(m+1) for a positive integer m, and the odd coefficients at orders
    -1, 1, ..., 2m-1 must all vanish below tol.  Potentials with no finite
    poles pass vacuously (for even potentials the origin conditions hold by
    parity; non-integer ell skips the origin by convention).
    """
    t = zero_tol() if tol is None else mpf(tol)
    f = V.to_rational_fn()
    checks = []
    worst = mpf(0)
    ok = True
    for z, k_declared in V.poles:
        order = pole_order(f, z, t)
        if order > 2:
            raise ValueError(f"pole of order {order} > 2 at {z}: not a valid "
                             "Schrodinger double-pole potential")
        coeffs = laurent_expand(f, z, -2, 2 + 2 * k_declared, t)
        lead = coeffs[0]
        m = nearest_int(lead.real if abs(lead.imag) < mpf('1e-6') else lead, 1e-6)
        mult = None
        if m is not None:
            j = nearest_int((-1 + mpf(1 + 4 * m) ** mpf('0.5')) / 2, 1e-6)
            if j is not None and j >= 1 and j * (j + 1) == m:
                mult = j
        if mult is None:
            mult = k_declared
            lead_error = abs(lead - k_declared * (k_declared + 1))
            ok = False
        else:
            lead_error = abs(lead - mult * (mult + 1))
        if mult != k_declared:
            coeffs = laurent_expand(f, z, -2, 2 + 2 * mult, t)
        odd = tuple(coeffs[1::2][: mult + 1])
        checks.append(PoleCheck(z, mult, lead, lead_error, odd))
        worst = max([worst, lead_error] + [abs(c) for c in odd])
    if worst > t:
        ok = False
    return LocusReport(tuple(checks), worst, ok, t)


def locus_residual(config: PoleConfiguration):
    """The N residuals sum_{j!=i} 2/(x_i-x_j)^3 + l(l+1)/x_i^3 + nu x_i - 3 x_i^5.

    Requires all multiplicities 1 (use higher_locus_residual otherwise).
    """
    if any(k != 1 for _, k in config.points):
        raise ValueError("locus_residual needs all multiplicities 1; "
                         "use higher_locus_residual")
    xs = [z for z, _ in config.points]
    ll = config.ell * (config.ell + 1)
    out = []
    for i, xi in enumerate(xs):
        acc = config.nu * xi - 3 * xi ** 5
        if ll != 0:
            acc += ll / xi ** 3
        for j, xj in enumerate(xs):
            if j != i:
                acc += 2 / (xi - xj) ** 3
        out.append(acc)
    return out


def higher_locus_residual(config: PoleConfiguration):
    """General-multiplicity residuals, point-major:

    P^(2s-1)(x_i) - (2s)! * [ l(l+1)/x_i^(2s+1) + sum_{j!=i} k_j(k_j+1)/(x_i-x_j)^(2s+1) ]

    for each point i and s = 1..k_i, with P = x^6 - nu x^2 and the origin
    term folded in as a fictitious lattice point at 0 with weight l(l+1).
    For all-multiplicity-1 configurations these equal -2 times locus_residual.
    """
    P = Poly([0, 0, -config.nu, 0, 0, 0, 1])
    ll = config.ell * (config.ell + 1)
    out = []
    fact = [1, 1]
    for n in range(2, 2 * max((k for _, k in config.points), default=1) + 1):
        fact.append(fact[-1] * n)
    for i, (xi, ki) in enumerate(config.points):
        for s in range(1, ki + 1):
            acc = P.derivative(2 * s - 1)(xi)
            pair = mpc(0)
            if ll != 0:
                pair += ll / xi ** (2 * s + 1)
            for j, (xj, kj) in enumerate(config.points):
                if j != i:
                    pair += kj * (kj + 1) / (xi - xj) ** (2 * s + 1)
            out.append(acc - fact[2 * s] * pair)
    return out


# ---------------------------------------------------------------------------
# Newton solving on the locus system (multiplicity-1 configurations)
# ---------------------------------------------------------------------------

def _full_residual(xs, nu, ll):
    out = []
    for i, xi in enumerate(xs):
        acc = nu * xi - 3 * xi ** 5
        if ll != 0:
            acc += ll / xi ** 3
        for j, xj in enumerate(xs):
            if j != i:
                acc += 2 / (xi - xj) ** 3
        out.append(acc)
    return out


def _full_jacobian(xs, nu, ll):
    n = len(xs)
    J = matrix(n, n)
    for i, xi in enumerate(xs):
        diag = nu - 15 * xi ** 4
        if ll != 0:
            diag -= 3 * ll / xi ** 4
        for j, xj in enumerate(xs):
            if j != i:
                d4 = (xi - xj) ** 4
                diag -= 6 / d4
                J[i, j] = 6 / d4
        J[i, i] = diag
    return J


def _sym_residual(reps, nu, ll):
    out = []
    for i, ai in enumerate(reps):
        acc = nu * ai - 3 * ai ** 5 + 1 / (4 * ai ** 3)
        if ll != 0:
            acc += ll / ai ** 3
        for j, aj in enumerate(reps):
            if j != i:
                acc += 2 / (ai - aj) ** 3 + 2 / (ai + aj) ** 3
        out.append(acc)
    return out


def _sym_jacobian(reps, nu, ll):
    n = len(reps)
    J = matrix(n, n)
    for i, ai in enumerate(reps):
        diag = nu - 15 * ai ** 4 - 3 / (4 * ai ** 4)
        if ll != 0:
            diag -= 3 * ll / ai ** 4
        for j, aj in enumerate(reps):
            if j != i:
                dm4 = (ai - aj) ** 4
                dp4 = (ai + aj) ** 4
                diag += -6 / dm4 - 6 / dp4
                J[i, j] = 6 / dm4 - 6 / dp4
        J[i, i] = diag
    return J


def _pair_reps(config: PoleConfiguration, tol):
    """One representative per +- pair of a symmetric configuration."""
    pts = [z for z, _ in config.points]
    scale = config.scale()
    reps = []
    left = list(pts)
    while left:
        z = left.pop()
        for i, w in enumerate(left):
            if abs(w + z) <= tol * scale:
                del left[i]
                break
        else:
            raise ValueError("configuration is not closed under x -> -x")
        reps.append(z if (z.real, z.imag) >= (-z.real, -z.imag) else -z)
    reps.sort(key=lambda w: (mpf(w.real), mpf(w.imag)))
    return reps


def _collision_guard(min_sep):
    def guard(u):
        scale = max([mpf(1)] + [abs(v) for v in u])
        floor = min_sep if min_sep is not None else mpf('1e-6') * scale
        for i in range(len(u)):
            if abs(u[i]) < floor:
                raise CollisionError("point collapsed into the origin", points=list(u))
            for j in range(i + 1, len(u)):
                if abs(u[i] - u[j]) < floor:
                    raise CollisionError("points collided", points=list(u))
    return guard


def _sym_guard(min_sep):
    base = _collision_guard(min_sep)

    def guard(u):
        base(u)
        scale = max([mpf(1)] + [abs(v) for v in u])
        floor = min_sep if min_sep is not None else mpf('1e-6') * scale
        for i in range(len(u)):
            for j in range(len(u)):
                if abs(u[i] + u[j]) < floor:
                    raise CollisionError("point collided with a mirror point",
                                         points=list(u))
    return guard


def solve_locus_newton(init: PoleConfiguration, tol=None, max_iter=50,
                       min_separation=None):
    """Damped Newton on the locus system from an initial configuration.

    Symmetric configurations are solved on one representative per +- pair
    (closure enforced by construction).  Returns (configuration, info).
    """
    t = zero_tol() if tol is None else mpf(tol)
    nu, ll = init.nu, init.ell * (init.ell + 1)
    if any(k != 1 for _, k in init.points):
        raise ValueError("Newton solver handles multiplicity-1 configurations")
    if init.symmetric:
        reps = _pair_reps(init, mpf('1e-6'))
        u, info = damped_newton(lambda v: _sym_residual(v, nu, ll),
                                lambda v: _sym_jacobian(v, nu, ll),
                                reps, t, max_iter, guard=_sym_guard(min_separation))
        out = PoleConfiguration.symmetric_pairs(u, nu, init.ell)
    else:
        xs = [z for z, _ in init.points]
        u, info = damped_newton(lambda v: _full_residual(v, nu, ll),
                                lambda v: _full_jacobian(v, nu, ll),
                                xs, t, max_iter, guard=_collision_guard(min_separation))
        out = PoleConfiguration(tuple((z, 1) for z in u), nu, init.ell)
    return out, info


@dataclass(frozen=True)
class ContinuationResult:
    configurations: tuple  # one per attained nu_path entry
    nus: tuple
    completed: bool
    message: str


def homotopy_continue(start: PoleConfiguration, nu_path, tol=None,
                      min_separation=None, min_step=mpf('1e-10')) -> ContinuationResult:
    """Predictor-corrector continuation of a locus solution along a nu path.

    Re-solves by damped Newton at each requested nu, with secant prediction
    and automatic step bisection; a branch that runs into a collision or
    divergence is truncated at the last good point.
    """
    t = zero_tol() if tol is None else mpf(tol)
    path = [as_mpf(v) for v in nu_path]
    if not path:
        raise ValueError("empty continuation path")
    cur, info = solve_locus_newton(
        PoleConfiguration(start.points, path[0], start.ell, start.symmetric),
        t, min_separation=min_separation)
    configs, nus = [cur], [path[0]]
    prev = None  # (nu, config) behind cur, for secant prediction

    def predict(nu_from, cfg_from, nu_to):
        if prev is None or prev[0] == nu_from:
            return cfg_from.points
        h = (nu_to - nu_from) / (nu_from - prev[0])
        pts_prev = {i: z for i, (z, _) in enumerate(prev[1].points)}
        return tuple((z + h * (z - pts_prev[i]), k)
                     for i, (z, k) in enumerate(cfg_from.points))

    for target in path[1:]:
        nu_from, cfg_from = nus[-1], cur
        pending = [target]
        ok = True
        while pending:
            goal = pending[-1]
            guess = PoleConfiguration(predict(nu_from, cfg_from, goal), goal,
                                      start.ell, start.symmetric)
            try:
                nxt, _ = solve_locus_newton(guess, t, min_separation=min_separation)
            except (NonConvergenceError, CollisionError, ValueError, ZeroDivisionError) as exc:
                mid = (nu_from + goal) / 2
                if abs(goal - nu_from) < min_step or mid in (nu_from, goal):
                    return ContinuationResult(tuple(configs), tuple(nus), False,
                                              f"branch truncated near nu={mp.nstr(goal, 8)}: {exc}")
                pending.append(mid)
                continue
            prev = (nu_from, cfg_from)
            nu_from, cfg_from = goal, nxt
            pending.pop()
        cur = cfg_from
        configs.append(cur)
        nus.append(target)
    return ContinuationResult(tuple(configs), tuple(nus), True, "ok")
