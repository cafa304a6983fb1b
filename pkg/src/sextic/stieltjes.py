"""Stieltjes relations for quasi-rational eigenfunction ansatze.

For psi = x^mu * prod(x-y_j)/prod(x-x_i) * exp(eps*x^4/4) the residues of
the Riccati identity f' + f^2 = V - lam (f = D log psi) vanish exactly when

    sum_j 1/(x_k-y_j) - sum_{i!=k} 1/(x_k-x_i) + eps*x_k^3 + mu/x_k = 0
    sum_{j!=l} 1/(y_l-y_j) - sum_i 1/(y_l-x_i) + eps*y_l^3 + mu/y_l = 0.

Satisfying these forces the polynomial part of the potential,

    P(x) = x^6 - nu*x^2 + 2*eps*(sum y - sum x)*x,
    nu = eps*(2N - 2K - 2*mu - 3),

and implies the locus equations at the poles, so the assembled potential is
monodromy-free.  The converse fails: some locus solutions fit no admissible
(K, mu, eps) shape, which the shape sweep quantifies.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import matrix, mp, mpc, mpf

from .newton import damped_newton, gauss_newton
from .locus import LocusReport, trivial_monodromy_check
from .poly import Poly, RationalFn
from .potential import QuasiRationalFunction, RationalPotential
from .precision import as_mpc, as_mpf, nearest_int, zero_tol


@dataclass(frozen=True)
class StieltjesReport:
    pole_residuals: tuple
    zero_residuals: tuple
    max_abs: mpf

    def satisfied(self, tol=None) -> bool:
        return self.max_abs <= (zero_tol() if tol is None else tol)


def _check_disjoint(psi: QuasiRationalFunction, tol):
    pts = list(psi.zeros) + list(psi.poles)
    scale = max([mpf(1)] + [abs(z) for z in pts])
    for y in psi.zeros:
        for x in psi.poles:
            if abs(y - x) <= tol * scale:
                raise ValueError(f"coincident zero and pole at {y}")


def stieltjes_residual(psi: QuasiRationalFunction, tol=None) -> StieltjesReport:
    """Evaluate both residue families; max_abs below tolerance certifies a
    quasi-rational eigenfunction candidate."""
    t = zero_tol() if tol is None else mpf(tol)
    if psi.poly_factor is not None and psi.poly_factor.degree >= 1:
        raise ValueError("stieltjes_residual expects explicit zero/pole lists")
    _check_disjoint(psi, t)
    mu, eps = psi.mu, psi.eps
    pole_res = []
    for k, xk in enumerate(psi.poles):
        acc = eps * xk ** 3
        if mu != 0:
            acc += mu / xk
        for y in psi.zeros:
            acc += 1 / (xk - y)
        for i, xi in enumerate(psi.poles):
            if i != k:
                acc -= 1 / (xk - xi)
        pole_res.append(acc)
    zero_res = []
    for l, yl in enumerate(psi.zeros):
        acc = eps * yl ** 3
        if mu != 0:
            acc += mu / yl
        for j, yj in enumerate(psi.zeros):
            if j != l:
                acc += 1 / (yl - yj)
        for x in psi.poles:
            acc -= 1 / (yl - x)
        zero_res.append(acc)
    worst = max([mpf(0)] + [abs(v) for v in pole_res + zero_res])
    return StieltjesReport(tuple(pole_res), tuple(zero_res), worst)


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------

def _residual_full(u, K, mu, eps):
    psi = QuasiRationalFunction(mu, eps, tuple(u[:K]), tuple(u[K:]))
    rep = stieltjes_residual(psi, mpf(0))
    return list(rep.zero_residuals) + list(rep.pole_residuals)


def _jacobian_full(u, K, mu, eps):
    n = len(u)
    ys, xs = u[:K], u[K:]
    J = matrix(n, n)
    # rows: zero relations then pole relations; columns: ys then xs
    for l, yl in enumerate(ys):
        diag = 3 * eps * yl ** 2
        if mu != 0:
            diag -= mu / yl ** 2
        for j, yj in enumerate(ys):
            if j != l:
                d2 = (yl - yj) ** 2
                diag -= 1 / d2
                J[l, j] = 1 / d2
        for i, xi in enumerate(xs):
            d2 = (yl - xi) ** 2
            diag += 1 / d2
            J[l, K + i] = -1 / d2
        J[l, l] = diag
    for k, xk in enumerate(xs):
        diag = 3 * eps * xk ** 2
        if mu != 0:
            diag -= mu / xk ** 2
        for j, yj in enumerate(ys):
            d2 = (xk - yj) ** 2
            diag -= 1 / d2
            J[K + k, j] = 1 / d2
        for i, xi in enumerate(xs):
            if i != k:
                d2 = (xk - xi) ** 2
                diag += 1 / d2
                J[K + k, K + i] = -1 / d2
        J[K + k, K + k] = diag
    return J


def _sym_expand(u, Kh, Nh):
    ys = []
    for b in u[:Kh]:
        ys.extend([b, -b])
    xs = []
    for a in u[Kh:]:
        xs.extend([a, -a])
    return tuple(ys), tuple(xs)


def _residual_sym(u, Kh, mu, eps):
    ys, xs = _sym_expand(u, Kh, len(u) - Kh)
    psi = QuasiRationalFunction(mu, eps, ys, xs)
    rep = stieltjes_residual(psi, mpf(0))
    # representatives carry the even-index entries (the +b, +a points)
    return [rep.zero_residuals[2 * i] for i in range(Kh)] + \
           [rep.pole_residuals[2 * i] for i in range(len(u) - Kh)]


def _jacobian_sym(u, Kh, mu, eps, h=None):
    # analytic differentiation of the folded residuals: a representative v
    # moves its mirror by -dv, so d/dv [g(z - v) + g(z + v)] cancels pairwise
    n = len(u)
    bs, as_ = u[:Kh], u[Kh:]
    J = matrix(n, n)
    for l, bl in enumerate(bs):
        diag = 3 * eps * bl ** 2 - 1 / (2 * bl ** 2)
        if mu != 0:
            diag -= mu / bl ** 2
        for j, bj in enumerate(bs):
            if j != l:
                dm2 = (bl - bj) ** 2
                dp2 = (bl + bj) ** 2
                diag += -1 / dm2 - 1 / dp2
                J[l, j] = 1 / dm2 - 1 / dp2
        for i, ai in enumerate(as_):
            dm2 = (bl - ai) ** 2
            dp2 = (bl + ai) ** 2
            diag += 1 / dm2 + 1 / dp2
            J[l, Kh + i] = -1 / dm2 + 1 / dp2
        J[l, l] = diag
    for k, ak in enumerate(as_):
        diag = 3 * eps * ak ** 2 + 1 / (2 * ak ** 2)
        if mu != 0:
            diag -= mu / ak ** 2
        for j, bj in enumerate(bs):
            dm2 = (ak - bj) ** 2
            dp2 = (ak + bj) ** 2
            diag += -1 / dm2 - 1 / dp2
            J[Kh + k, j] = 1 / dm2 - 1 / dp2
        for i, ai in enumerate(as_):
            if i != k:
                dm2 = (ak - ai) ** 2
                dp2 = (ak + ai) ** 2
                diag += 1 / dm2 + 1 / dp2
                J[Kh + k, Kh + i] = -1 / dm2 + 1 / dp2
        J[Kh + k, Kh + k] = diag
    return J


def solve_stieltjes(K: int, N: int, mu, eps: int, init, symmetric: bool,
                    tol=None, max_iter=60):
    """Damped Newton on the K+N Stieltjes relations.

    In symmetric mode K and N must be even and ``init`` supplies one
    representative per +- pair as (zero_reps, pole_reps); an origin zero or
    pole is carried by mu, not by an explicit point.  Returns
    (QuasiRationalFunction, info).
    """
    t = zero_tol() if tol is None else mpf(tol)
    mu = as_mpf(mu)
    zs, ps = init
    zs = [as_mpc(v) for v in zs]
    ps = [as_mpc(v) for v in ps]
    if K == 0 and N == 0:
        return QuasiRationalFunction(mu, eps), {"iterations": 0, "converged": True,
                                                "residual_norms": [mpf(0)]}
    if symmetric:
        if K % 2 or N % 2:
            raise ValueError("symmetric mode needs even K and N")
        if len(zs) != K // 2 or len(ps) != N // 2:
            raise ValueError("init must carry one representative per pair")
        u0 = zs + ps
        u, info = damped_newton(lambda v: _residual_sym(v, K // 2, mu, eps),
                                lambda v: _jacobian_sym(v, K // 2, mu, eps),
                                u0, t, max_iter)
        ys, xs = _sym_expand(u, K // 2, N // 2)
        return QuasiRationalFunction(mu, eps, ys, xs), info
    if len(zs) != K or len(ps) != N:
        raise ValueError("init shape mismatch")
    u0 = zs + ps
    u, info = damped_newton(lambda v: _residual_full(v, K, mu, eps),
                            lambda v: _jacobian_full(v, K, mu, eps),
                            u0, t, max_iter)
    return QuasiRationalFunction(mu, eps, tuple(u[:K]), tuple(u[K:])), info


# ---------------------------------------------------------------------------
# Inferred potential, Riccati certification, implication report
# ---------------------------------------------------------------------------

def infer_polynomial_part(psi: QuasiRationalFunction) -> Poly:
    """Sextic polynomial part implied by the ansatz shape.

    x^6 with coefficient 1, x^2 coefficient -nu with
    nu = eps*(2N - 2K - 2mu - 3), linear coefficient
    2*eps*(sum zeros - sum poles), constant normalized to 0 (absorbed into
    the eigenvalue, which the Riccati check recovers).
    """
    K, N = len(psi.zeros), len(psi.poles)
    nu = psi.eps * (2 * N - 2 * K - 2 * psi.mu - 3)
    lin = 2 * psi.eps * (sum(psi.zeros, mpc(0)) - sum(psi.poles, mpc(0)))
    return Poly([0, lin, -nu, 0, 0, 0, 1])


def implied_potential(psi: QuasiRationalFunction) -> RationalPotential:
    """Inferred polynomial part + mu(mu-1)/x^2 origin term + double poles."""
    return RationalPotential(infer_polynomial_part(psi), psi.mu - 1,
                             tuple((x, 1) for x in psi.poles))


def riccati_certify(psi: QuasiRationalFunction, V: RationalPotential, tol=None):
    """Extract the unique eigenvalue and the Riccati identity residual.

    V - (f' + f^2) must be the constant lam; returns (lam, residual) where
    the residual is the scale of everything beyond that constant.
    """
    t = zero_tol() if tol is None else mpf(tol)
    f = psi.log_derivative()
    h = V.to_rational_fn() - f.derivative() - f * f
    num, den = h.num.trimmed(t), h.den.trimmed(t)
    q, rem = num.divmod(den, t)
    lam = q[0]
    resid = max(Poly(q.c[1:]).scale() if q.degree >= 1 else mpf(0),
                rem.scale() / max(mpf(1), den.scale()))
    return lam, resid


@dataclass(frozen=True)
class ImplicationReport:
    stieltjes: StieltjesReport
    potential: RationalPotential
    monodromy: LocusReport
    eigenvalue: mpc
    riccati_residual: mpf

    @property
    def max_abs(self) -> mpf:
        return max(self.stieltjes.max_abs, self.monodromy.max_abs,
                   self.riccati_residual)


def stieltjes_implies_locus(psi: QuasiRationalFunction, tol=None) -> ImplicationReport:
    """Assemble the implied potential and report all three residual levels:
    the Stieltjes relations themselves, the trivial-monodromy check of the
    potential, and the Riccati identity with its extracted eigenvalue."""
    t = zero_tol() if tol is None else mpf(tol)
    strep = stieltjes_residual(psi, t)
    V = implied_potential(psi)
    monodromy = trivial_monodromy_check(V, t)
    lam, ricc = riccati_certify(psi, V, t)
    return ImplicationReport(strep, V, monodromy, lam, ricc)


# ---------------------------------------------------------------------------
# Shape sweep: the finite non-existence certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeResult:
    eps: int
    mu: mpf
    K: int
    best_max_residual: mpf
    best_zeros: tuple


@dataclass(frozen=True)
class ShapeSweepReport:
    shapes: tuple
    min_over_shapes: mpf


def admissible_shapes(N: int, nu, ell, int_tol=1e-9):
    """(eps, mu, K) combinations consistent with nu = eps*(2N-2K-2mu-3)."""
    nu, ell = as_mpf(nu), as_mpf(ell)
    out = []
    for eps in (-1, 1):
        for mu in (-ell, ell + 1):
            K = nearest_int(N - mu - (eps * nu + 3) / 2, int_tol)
            if K is not None and K >= 0:
                out.append((eps, mu, K))
    return out


def shape_sweep(poles, nu, ell=0, tol=None, n_starts=24) -> ShapeSweepReport:
    """Best-achievable Stieltjes residual for every admissible shape with the
    pole set held fixed.

    Shapes with free zeros are minimized by multistart Gauss-Newton on the
    full residual system (poles fixed); the minimum over shapes bounds how
    close any quasi-rational eigenfunction ansatz can come.
    """
    t = zero_tol() if tol is None else mpf(tol)
    poles = tuple(as_mpc(p) for p in poles)
    N = len(poles)
    scale = max([mpf(1)] + [abs(p) for p in poles])
    results = []
    for eps, mu, K in admissible_shapes(N, nu, ell):
        if K == 0:
            psi = QuasiRationalFunction(mu, eps, (), poles)
            rep = stieltjes_residual(psi, t)
            results.append(ShapeResult(eps, mu, K, rep.max_abs, ()))
            continue

        def residual(u, _eps=eps, _mu=mu):
            psi = QuasiRationalFunction(_mu, _eps, tuple(u), poles)
            rep = stieltjes_residual(psi, mpf(0))
            return list(rep.zero_residuals) + list(rep.pole_residuals)

        def jacobian(u, _eps=eps, _mu=mu, _K=K):
            full = _jacobian_full(list(u) + list(poles), _K, _mu, _eps)
            J = matrix(_K + N, _K)
            for i in range(_K + N):
                for j in range(_K):
                    J[i, j] = full[i, j]
            return J

        best, best_u = mp.inf, ()
        for s in range(n_starts):
            r = scale * (mpf('0.25') + mpf('1.9') * ((s * mpf('0.61803398875')) % 1))
            th = 2 * mp.pi * ((s * mpf('0.381966')) % 1)
            start = [r * mp.exp(mpc(0, th + 2 * mp.pi * q / max(K, 1)))
                     for q in range(K)]
            u, val = gauss_newton(residual, jacobian, start, t)
            # reject minima that land on a pole (the residual blows up nearby)
            if val < best and all(min(abs(ui - p) for p in poles) > 1e-8 * scale
                                  for ui in u):
                best, best_u = val, tuple(u)
        results.append(ShapeResult(eps, mu, K, best, best_u))
    mins = min([r.best_max_residual for r in results], default=mp.inf)
    return ShapeSweepReport(tuple(results), mins)
