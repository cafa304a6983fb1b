"""First-order pole dynamics and the decoupled Calogero-Moser systems.

The zeros and poles of a quasi-rational solution of the time-dependent
Schrodinger equation, merged into signed points (z_j, gamma_j) with
gamma > 0 for zeros and gamma < 0 for poles, obey the first-order flow

    dz_j/dt = -i * [ sum_{k != j} gamma_k/(z_j - z_k) + eps * z_j^3 ],

where eps is the sign of the x^4/4 exponent of the underlying function
(eps = +1 reproduces the flow with the -i z^3 cubic term; eps = -1 flips
that sign, as direct substitution of decaying solutions forces).  For
simple points with vanishing signed sum (the symmetric case) the flow
implies that zeros and poles separately satisfy second-order
Calogero-Moser systems in sextic external fields whose quadratic terms
differ by eps*(2(Z-P) -+ 3); both are Hamiltonian with momenta equal to
the flow velocities, and states reachable from the empty system by finite
chains of the associated canonical transformations have zero energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp, mpc, mpf

from .precision import as_mpc, as_mpf, zero_tol


class SingularStopError(RuntimeError):
    """Integration stopped at a singular event; carries the partial trajectory."""

    def __init__(self, reason, t, trajectory=None):
        super().__init__(f"integration stopped ({reason}) at t={mp.nstr(as_mpf(t), 10)}")
        self.reason = reason
        self.t = t
        self.trajectory = trajectory


@dataclass(frozen=True)
class DynamicsState:
    """Signed points (z_j, gamma_j), exponent sign, time, accumulated phase."""

    points: tuple  # ((z: mpc, gamma: int), ...)
    eps: int = 1
    t: mpf = mpf(0)
    phase: mpc = mpc(0)

    def __post_init__(self):
        pts = tuple((as_mpc(z), int(g)) for z, g in self.points)
        if any(g == 0 for _, g in pts):
            raise ValueError("gamma weights must be nonzero integers")
        if self.eps not in (-1, 1):
            raise ValueError("eps must be +1 or -1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t", as_mpf(self.t))
        object.__setattr__(self, "phase", as_mpc(self.phase))

    @property
    def Z(self) -> int:
        return sum(1 for _, g in self.points if g > 0)

    @property
    def P(self) -> int:
        return sum(1 for _, g in self.points if g < 0)

    @property
    def charge(self) -> int:
        """sum gamma_j = Z - P for simple points."""
        return sum(g for _, g in self.points)

    def zeros(self):
        return [z for z, g in self.points if g > 0]

    def poles(self):
        return [z for z, g in self.points if g < 0]

    def scale(self) -> mpf:
        return max([mpf(1)] + [abs(z) for z, _ in self.points])

    def min_separation(self) -> mpf | None:
        best = None
        for i in range(len(self.points)):
            for j in range(i + 1, len(self.points)):
                d = abs(self.points[i][0] - self.points[j][0])
                best = d if best is None else min(best, d)
        return best


def charge_mismatch(state: DynamicsState, nu0, m: int):
    """Bookkeeping check: the charge of a state built from a Wronskian pair
    over x^6 - nu0*x^2 after m steps must be (nu0-3)/2 - 3m; returns the
    deviation (0 when the quadratic matching holds)."""
    expected = (as_mpf(nu0) - 3) / 2 - 3 * m
    return state.charge - expected


def dynamics_rhs(state: DynamicsState):
    """(velocities, phase_rate) of the first-order flow.

    velocity_j = -i*(sum_{k!=j} gamma_k/(z_j-z_k) + eps*z_j^3) and
    phase_rate = sum_j gamma_j * z_j^2.
    """
    n = len(state.points)
    sep = state.min_separation()
    if sep is not None and sep == 0:
        raise SingularStopError("collision", state.t)
    I = mpc(0, 1)
    vel = []
    for j, (zj, _) in enumerate(state.points):
        acc = mpc(state.eps) * zj ** 3
        for k, (zk, gk) in enumerate(state.points):
            if k != j:
                acc += gk / (zj - zk)
        vel.append(-I * acc)
    f_dot = sum(g * z ** 2 for z, g in state.points) if n else mpc(0)
    return tuple(vel), f_dot


# ---------------------------------------------------------------------------
# Adaptive embedded Runge-Kutta 5(4), Dormand-Prince coefficients
# ---------------------------------------------------------------------------

_DP_A = [
    [],
    [Fraction(1, 5)],
    [Fraction(3, 40), Fraction(9, 40)],
    [Fraction(44, 45), Fraction(-56, 15), Fraction(32, 9)],
    [Fraction(19372, 6561), Fraction(-25360, 2187), Fraction(64448, 6561),
     Fraction(-212, 729)],
    [Fraction(9017, 3168), Fraction(-355, 33), Fraction(46732, 5247),
     Fraction(49, 176), Fraction(-5103, 18656)],
    [Fraction(35, 384), Fraction(0), Fraction(500, 1113), Fraction(125, 192),
     Fraction(-2187, 6784), Fraction(11, 84)],
]
_DP_B5 = [Fraction(35, 384), Fraction(0), Fraction(500, 1113), Fraction(125, 192),
          Fraction(-2187, 6784), Fraction(11, 84), Fraction(0)]
_DP_B4 = [Fraction(5179, 57600), Fraction(0), Fraction(7571, 16695), Fraction(393, 640),
          Fraction(-92097, 339200), Fraction(187, 2100), Fraction(1, 40)]


def _frac(q) -> mpf:
    return mpf(q.numerator) / mpf(q.denominator)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    hamiltonian: list = field(default_factory=list)        # H per sample
    hamiltonian_tilde: list = field(default_factory=list)  # H~ per sample
    cm_max: list = field(default_factory=list)             # max CM residual
    stop_reason: str = "completed"

    def append(self, state: DynamicsState):
        if self.times and state.t <= self.times[-1]:
            raise ValueError("sample times must be strictly increasing")
        self.times.append(state.t)
        self.states.append(state)
        H, Ht = hamiltonians(state)
        self.hamiltonian.append(H)
        self.hamiltonian_tilde.append(Ht)
        if all(abs(g) == 1 for _, g in state.points):
            zr, pr = cm_residual_state(state)
            self.cm_max.append(max([mpf(0)] + [abs(v) for v in zr + pr]))
        else:
            self.cm_max.append(None)


def integrate(state: DynamicsState, t_end, rtol=mpf('1e-12'), atol=mpf('1e-12'),
              max_step=mpf('0.05'), sample_times=None, collision_factor=mpf('1e-5'),
              escape_radius=None) -> Trajectory:
    """Integrate the flow with an adaptive embedded RK 5(4) pair.

    Samples are recorded at every accepted step (sample_times, if given, are
    hit exactly).  Integration stops with SingularStopError (partial
    trajectory attached) when points collide (pairwise distance below
    collision_factor * scale), escape beyond escape_radius, or the step
    size underflows.
    """
    t_end = as_mpf(t_end)
    if t_end <= state.t:
        raise ValueError("t_end must exceed the state time")
    rtol, atol = mpf(rtol), mpf(atol)
    n = len(state.points)
    gammas = tuple(g for _, g in state.points)
    eps = state.eps
    A = [[_frac(q) for q in row] for row in _DP_A]
    B5 = [_frac(q) for q in _DP_B5]
    B4 = [_frac(q) for q in _DP_B4]

    def mkstate(t, y, phase):
        return DynamicsState(tuple((y[i], gammas[i]) for i in range(n)), eps, t, phase)

    def rhs_vec(t, y):
        vel, f_dot = dynamics_rhs(mkstate(t, y, mpc(0)))
        return list(vel) + [f_dot]

    traj = Trajectory()
    traj.append(state)
    forced = sorted(as_mpf(s) for s in (sample_times or []) if state.t < as_mpf(s) <= t_end)

    t = state.t
    y = [z for z, _ in state.points] + [state.phase]
    esc = escape_radius if escape_radius is not None else mpf('1e8') * state.scale()
    h = min(mpf(max_step), (t_end - t) / 16)
    h_floor = mpf('1e-20') * max(mpf(1), t_end - t)

    def check_singular(tc, yc):
        pts = yc[:n]
        scale = max([mpf(1)] + [abs(z) for z in pts])
        for i in range(n):
            if abs(pts[i]) > esc:
                raise SingularStopError("escape", tc, traj)
            for j in range(i + 1, n):
                if abs(pts[i] - pts[j]) < collision_factor * scale:
                    raise SingularStopError("collision", tc, traj)

    while t < t_end:
        target = t_end
        if forced and forced[0] < target:
            target = forced[0]
        h = min(h, target - t, mpf(max_step))
        if h < h_floor:
            raise SingularStopError("step-underflow", t, traj)
        try:
            k = [rhs_vec(t, y)]
            for s in range(1, 7):
                ys = [y[i] + h * sum(A[s][m] * k[m][i] for m in range(s))
                      for i in range(n + 1)]
                k.append(rhs_vec(t + h * _stage_time(s), ys))
            y5 = [y[i] + h * sum(B5[m] * k[m][i] for m in range(7)) for i in range(n + 1)]
            y4 = [y[i] + h * sum(B4[m] * k[m][i] for m in range(7)) for i in range(n + 1)]
        except (ZeroDivisionError, SingularStopError):
            h /= 2
            continue
        err = mpf(0)
        for i in range(n + 1):
            sc = atol + rtol * max(abs(y[i]), abs(y5[i]))
            err = max(err, abs(y5[i] - y4[i]) / sc)
        if err <= 1:
            t = t + h
            y = y5
            try:
                check_singular(t, y)
            except SingularStopError as exc:
                traj.stop_reason = exc.reason
                raise
            traj.append(mkstate(t, y[:n], y[n]))
            if forced and t >= forced[0]:
                forced.pop(0)
        factor = mpf('0.9') * (1 / err) ** mpf('0.2') if err > 0 else 5
        h = h * min(mpf(5), max(mpf('0.2'), factor))
    return traj


_STAGE_TIMES = [Fraction(0), Fraction(1, 5), Fraction(3, 10), Fraction(4, 5),
                Fraction(8, 9), Fraction(1), Fraction(1)]


def _stage_time(s: int) -> mpf:
    return _frac(_STAGE_TIMES[s])


# ---------------------------------------------------------------------------
# Decoupled second-order systems, Hamiltonians, canonical structure
# ---------------------------------------------------------------------------

def cm_residual_state(state: DynamicsState):
    """Deviation of the flow-implied acceleration from the decoupled systems.

    The acceleration is obtained analytically by substituting the flow into
    its own derivative (no finite differences).  Zeros are tested against
    zdd = sum_zeros 2/(z-z')^3 - 3z^5 - eps*z*(2(Z-P)-3), poles against the
    same with +3.  Exact for symmetric states; asymmetric states deviate by
    the signed first moment uniformly.  Requires all |gamma| = 1.
    """
    if any(abs(g) != 1 for _, g in state.points):
        raise ValueError("CM residuals are defined for simple points (|gamma| = 1)")
    vel, _ = dynamics_rhs(state)
    I = mpc(0, 1)
    eps = state.eps
    ZP = state.Z - state.P
    zero_res, pole_res = [], []
    for j, (zj, gj) in enumerate(state.points):
        acc = -3 * I * eps * zj ** 2 * vel[j]
        for k, (zk, gk) in enumerate(state.points):
            if k != j:
                acc += I * gk * (vel[j] - vel[k]) / (zj - zk) ** 2
        mates = [z for i, (z, g) in enumerate(state.points) if g == gj and i != j]
        target = -3 * zj ** 5 - eps * zj * (2 * ZP - 3 * gj)
        for zk in mates:
            target += 2 / (zj - zk) ** 3
        (zero_res if gj > 0 else pole_res).append(acc - target)
    return zero_res, pole_res


def cm_residual(trajectory: Trajectory):
    """Per-sample max CM residual along a trajectory."""
    out = []
    for st in trajectory.states:
        zr, pr = cm_residual_state(st)
        out.append(max([mpf(0)] + [abs(v) for v in zr + pr]))
    return out


def hamiltonians(state: DynamicsState):
    """(H, H_tilde) with momenta given by the flow velocities.

    H runs over the zeros with quadratic coefficient eps*(2(Z-P)-3)/2 and
    pairwise 1/(x-x')^2 within the zeros; H_tilde is the pole analogue with
    eps*(2(Z-P)+3)/2.
    """
    vel, _ = dynamics_rhs(state) if state.points else ((), mpc(0))
    eps = state.eps
    ZP = state.Z - state.P

    def side(sign, coeff):
        idx = [i for i, (_, g) in enumerate(state.points) if (g > 0) == sign]
        H = mpc(0)
        for i in idx:
            z = state.points[i][0]
            H += vel[i] ** 2 / 2 + z ** 6 / 2 + eps * coeff * z ** 2 / 2
        for a in idx:
            for b in idx:
                if a != b:
                    H += 1 / (state.points[a][0] - state.points[b][0]) ** 2 / 2
        return H

    return side(True, 2 * ZP - 3), side(False, 2 * ZP + 3)


def generating_function(state: DynamicsState) -> mpc:
    """S = -i log[ prod_{j<k} (x_j-x_k) * prod_{m<n} (xt_m-xt_n)
                   / prod_{j,k} (x_j-xt_k) ]
          - i*eps*sum x^4/4 + i*eps*sum xt^4/4,
    evaluated as a sum of logs of the individual factors."""
    I = mpc(0, 1)
    xs, xts = state.zeros(), state.poles()
    S = mpc(0)
    for a in range(len(xs)):
        for b in range(a + 1, len(xs)):
            S += -I * mp.log(xs[a] - xs[b])
        S += -I * state.eps * xs[a] ** 4 / 4
    for a in range(len(xts)):
        for b in range(a + 1, len(xts)):
            S += -I * mp.log(xts[a] - xts[b])
        S += I * state.eps * xts[a] ** 4 / 4
    for x in xs:
        for xt in xts:
            S += I * mp.log(x - xt)
    return S


def _grad_S(state: DynamicsState):
    """Analytic gradients (dS/dx_j for zeros, dS/dxt_m for poles), in the
    order the points appear in the state."""
    I = mpc(0, 1)
    out = []
    for j, (zj, gj) in enumerate(state.points):
        acc = mpc(0)
        for k, (zk, gk) in enumerate(state.points):
            if k == j:
                continue
            if gk == gj:
                acc += -I / (zj - zk)
            else:
                acc += I / (zj - zk)
        acc += -I * state.eps * zj ** 3 * (1 if gj > 0 else -1)
        out.append(acc)
    return out


@dataclass(frozen=True)
class GradientCheck:
    fd_error: mpf         # max |analytic - central difference|
    canonical_error: mpf  # max |analytic gradient - canonical momentum|
    step: mpf


def generating_function_check(state: DynamicsState, fd_step=mpf('1e-6')) -> GradientCheck:
    """Check dS/dx_j = p_j and -dS/dxt_m = pt_m two ways.

    Gradients are computed analytically and by central finite differences
    with the given step; momenta come from the canonical relations, i.e.
    the flow velocities.
    """
    h = mpf(fd_step)
    grads = _grad_S(state)
    vel, _ = dynamics_rhs(state)
    fd_err = mpf(0)
    can_err = mpf(0)
    for j, (zj, gj) in enumerate(state.points):
        pts_p = list(state.points)
        pts_m = list(state.points)
        pts_p[j] = (zj + h, gj)
        pts_m[j] = (zj - h, gj)
        Sp = generating_function(DynamicsState(tuple(pts_p), state.eps, state.t))
        Sm = generating_function(DynamicsState(tuple(pts_m), state.eps, state.t))
        fd = (Sp - Sm) / (2 * h)
        fd_err = max(fd_err, abs(fd - grads[j]))
        momentum = vel[j]
        grad_as_momentum = grads[j] if gj > 0 else -grads[j]
        can_err = max(can_err, abs(grad_as_momentum - momentum))
    return GradientCheck(fd_err, can_err, h)


# ---------------------------------------------------------------------------
# Closed-form two-zero trajectory and Wronskian-combination states
# ---------------------------------------------------------------------------

def closed_form_sextic_pair(t, c1=1, c2=1) -> DynamicsState:
    """The explicit two-zero state of the nu=7 chain:

    X^2(t) = -(c1 e^{i sqrt2 t} - c2 e^{-i sqrt2 t})
             / (sqrt2 (c1 e^{i sqrt2 t} + c2 e^{-i sqrt2 t})),

    returned as points (+X, -X) with gamma = (+1, +1) and eps = -1 (the
    points are zeros of a decaying combination).  For c1 = c2 this is
    X^2 = -i tan(sqrt2 t)/sqrt2.  The phase is normalized to 0 at
    construction time.
    """
    t = as_mpf(t)
    c1, c2 = as_mpc(c1), as_mpc(c2)
    I = mpc(0, 1)
    s2 = mp.sqrt(mpf(2))
    e1 = mp.exp(I * s2 * t)
    e2 = mp.exp(-I * s2 * t)
    denom = c1 * e1 + c2 * e2
    if denom == 0:
        raise ZeroDivisionError("closed form singular at this time")
    X2 = -(c1 * e1 - c2 * e2) / (s2 * denom)
    X = mp.sqrt(X2)
    if X == 0:
        raise SingularStopError("collision", t)
    return DynamicsState(((X, 1), (-X, 1)), eps=-1, t=t)


def closed_form_nu7(t, c1=1, c2=1) -> DynamicsState:
    return closed_form_sextic_pair(t, c1, c2)


def combination_state(spectrum, coeffs, t, tol=None) -> DynamicsState:
    """Zero set of sum_j c_j P_j(x) exp(-i lam_j t / 2) as a dynamics state.

    The origin carries gamma = mu when the branch exponent is a nonzero
    integer.  Roots of multiplicity k enter with gamma = k.
    """
    from .poly import Poly, poly_roots  # local import to avoid cycles
    from .precision import nearest_int

    t = as_mpf(t)
    I = mpc(0, 1)
    acc = Poly.zero()
    for c, lam in zip(coeffs, spectrum.eigenvalues):
        acc = acc + spectrum.eigen_poly(list(spectrum.eigenvalues).index(lam)) * (
            as_mpc(c) * mp.exp(-I * lam * t / 2))
    pts = []
    mu_int = nearest_int(spectrum.problem.mu)
    if mu_int:
        pts.append((mpc(0), mu_int))
    for r, k in poly_roots(acc, tol):
        if abs(r) == 0 and mu_int:
            raise ValueError("combination has a root at the origin; degenerate time")
        pts.append((r, k))
    return DynamicsState(tuple(pts), eps=spectrum.problem.eps, t=t)
