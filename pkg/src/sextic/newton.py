"""Damped Newton and Gauss-Newton solvers over mpmath complex vectors.

The residual systems in this package are holomorphic in their unknowns, so
plain complex Newton steps apply.  Damping is a backtracking line search on
the residual 2-norm (halving, at most 30 times), which keeps iterates from
jumping across the poles of the residual functions.
"""

from __future__ import annotations

from mpmath import matrix, mp, mpc, mpf, lu_solve, norm

from .poly import NonConvergenceError


class CollisionError(RuntimeError):
    """Unknowns collided (or hit the origin) beyond the conditioning limit."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points


def _norm(vec):
    return mp.sqrt(sum(abs(v) ** 2 for v in vec))


def damped_newton(residual, jacobian, u0, tol, max_iter=50, guard=None,
                  max_halvings=30):
    """Solve residual(u) = 0 from u0; returns (u, info).

    info carries the iteration count, per-iteration residual norms, and the
    convergence flag.  ``guard(u)`` may raise to abort (collisions).
    Raises NonConvergenceError (with the last iterate attached) on failure.
    """
    u = [mpc(v) for v in u0]
    if guard:
        guard(u)
    history = []
    r = residual(u)
    rn = _norm(r)
    history.append(rn)
    for it in range(max_iter):
        if rn <= tol:
            return u, {"iterations": it, "residual_norms": history, "converged": True}
        J = jacobian(u)
        try:
            step = lu_solve(J, matrix([-v for v in r]))
        except ZeroDivisionError as exc:
            raise NonConvergenceError("singular Jacobian", last=u,
                                      info={"iterations": it}) from exc
        lam = mpf(1)
        for _ in range(max_halvings + 1):
            trial = [u[i] + lam * step[i] for i in range(len(u))]
            try:
                if guard:
                    guard(trial)
                r_trial = residual(trial)
            except (ZeroDivisionError, CollisionError):
                lam /= 2
                continue
            rn_trial = _norm(r_trial)
            if rn_trial < rn or rn_trial <= tol:
                u, r, rn = trial, r_trial, rn_trial
                break
            lam /= 2
        else:
            raise NonConvergenceError("line search failed to reduce the residual",
                                      last=u, info={"iterations": it,
                                                    "residual_norms": history})
        history.append(rn)
    if rn <= tol:
        return u, {"iterations": max_iter, "residual_norms": history, "converged": True}
    raise NonConvergenceError(f"no convergence in {max_iter} iterations "
                              f"(residual {mp.nstr(rn, 5)})",
                              last=u, info={"iterations": max_iter,
                                            "residual_norms": history})


def gauss_newton(residual, jacobian, u0, tol, max_iter=60, max_halvings=25):
    """Least-squares Gauss-Newton for overdetermined holomorphic systems.

    Minimizes sum |r_i|^2 via normal equations J^H J step = -J^H r.  Returns
    (u, max_abs_residual); never raises, the caller inspects the quality.
    """
    u = [mpc(v) for v in u0]

    def maxabs(r):
        return max(abs(v) for v in r) if r else mpf(0)

    try:
        r = residual(u)
    except ZeroDivisionError:
        return u, mp.inf
    best, best_u = maxabs(r), list(u)
    for _ in range(max_iter):
        J = jacobian(u)
        n, k = J.rows, J.cols
        JH = matrix(k, n)
        for i in range(n):
            for j in range(k):
                JH[j, i] = mp.conj(J[i, j])
        A = JH * J
        b = JH * matrix([-v for v in r])
        try:
            step = lu_solve(A, b)
        except ZeroDivisionError:
            break
        rn = _norm(r)
        lam = mpf(1)
        improved = False
        for _ in range(max_halvings):
            trial = [u[i] + lam * step[i] for i in range(len(u))]
            try:
                r_trial = residual(trial)
            except ZeroDivisionError:
                lam /= 2
                continue
            if _norm(r_trial) < rn:
                u, r = trial, r_trial
                improved = True
                break
            lam /= 2
        if not improved:
            break
        if maxabs(r) < best:
            best, best_u = maxabs(r), list(u)
        if best <= tol:
            break
    return best_u, best
