"""Quasi-exactly-solvable machinery for V = x^6 - nu*x^2 + l(l+1)/x^2.

Quasi-polynomial eigenfunctions x^mu * P(x) * exp(eps*x^4/4) exist exactly
when M = (-eps*nu + sigma*(2l+1))/4 is a positive integer, with sigma = +1
on the mu = -l branch and -1 on the mu = l+1 branch.  The even coefficients
of P satisfy a three-term recurrence whose truncated M x M tridiagonal block
yields a degree-M characteristic polynomial (integer coefficients for
integer l); its roots are the solvable eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mpc, mpf

from .poly import NonConvergenceError, Poly, poly_roots
from .potential import QuasiRationalFunction, RationalPotential
from .precision import as_mpc, as_mpf, nearest_int, zero_tol

MU_MINUS_L = "minus-l"
MU_L_PLUS_1 = "l-plus-1"


class NoQuasiPolynomialSolutions(ValueError):
    """The sign combination does not yield a positive integer solution count."""


class DegenerateSpectrumError(RuntimeError):
    """Repeated eigenvalues within tolerance (reported, never merged)."""


@dataclass(frozen=True)
class QESProblem:
    """Parameters (nu, l), exponent sign eps, and origin branch mu."""

    nu: mpf
    ell: mpf
    eps: int
    mu_branch: str

    def __post_init__(self):
        object.__setattr__(self, "nu", as_mpf(self.nu))
        object.__setattr__(self, "ell", as_mpf(self.ell))
        if self.eps not in (-1, 1):
            raise ValueError("eps must be +1 or -1")
        if self.mu_branch not in (MU_MINUS_L, MU_L_PLUS_1):
            raise ValueError(f"unknown mu branch {self.mu_branch!r}")

    @property
    def mu(self) -> mpf:
        return -self.ell if self.mu_branch == MU_MINUS_L else self.ell + 1

    @property
    def sigma(self) -> int:
        return 1 if self.mu_branch == MU_MINUS_L else -1

    @property
    def M(self) -> int | None:
        return count_solutions(self.nu, self.ell, self.eps, self.mu_branch)

    def potential(self) -> RationalPotential:
        return RationalPotential.sextic(self.nu, self.ell)


def count_solutions(nu, ell, eps, mu_branch, int_tol=1e-9) -> int | None:
    """M = (-eps*nu + sigma*(2l+1))/4 when that is a positive integer, else None."""
    p = QESProblem(nu, ell, eps, mu_branch) if not isinstance(nu, QESProblem) else nu
    val = (-p.eps * p.nu + p.sigma * (2 * p.ell + 1)) / 4
    m = nearest_int(val, int_tol)
    return m if m is not None and m >= 1 else None


def recurrence_coeffs(n: int, problem: QESProblem):
    """Coefficients (c_up, c_down) of the three-term recurrence at index n.

    The recurrence on the series coefficients a_n of the polynomial factor is
    ``c_up * a_{n+2} + lam * a_n + c_down * a_{n-2} = 0`` with
    c_up = (mu+n+2)(mu+n+1) - l(l+1) and c_down = nu + eps*(2n + 2mu - 1);
    the coefficient of a_n is always the spectral parameter itself.
    """
    if n < 0 or n % 2:
        raise ValueError("recurrence index must be even and nonnegative")
    mu, l = problem.mu, problem.ell
    c_up = (mu + n + 2) * (mu + n + 1) - l * (l + 1)
    c_down = problem.nu + problem.eps * (2 * n + 2 * mu - 1)
    return c_up, c_down


def build_recurrence_row(n: int, problem: QESProblem):
    """(c_up, c_down) for row n; c_down is None at n = 0 (no a_{-2} term)."""
    c_up, c_down = recurrence_coeffs(n, problem)
    return (c_up, None) if n == 0 else (c_up, c_down)


@dataclass(frozen=True)
class QESSpectrum:
    problem: QESProblem
    M: int
    char_poly: Poly
    eigenvalues: tuple
    eigenvectors: tuple  # per eigenvalue: (a_0, a_2, ..., a_{2M-2}), a_0 = 1

    def eigen_poly(self, i: int) -> Poly:
        """Even polynomial factor P_i(x), built from the i-th eigenvector."""
        coeffs = []
        for a in self.eigenvectors[i]:
            coeffs.extend([a, mpc(0)])
        return Poly(coeffs[:-1])


def characteristic_polynomial(problem: QESProblem, M: int) -> Poly:
    """det(lam*I + B) for the truncated block, by the three-term determinant
    recurrence D_k = lam*D_{k-1} - c_up(2k-4)*c_down(2k-2)*D_{k-2}."""
    lam = Poly([0, 1])
    d_prev, d = Poly.one(), lam
    for k in range(2, M + 1):
        up, _ = recurrence_coeffs(2 * (k - 2), problem)
        _, down = recurrence_coeffs(2 * (k - 1), problem)
        d, d_prev = lam * d - (up * down) * d_prev, d
    return d if M >= 1 else Poly.one()


def qes_spectrum(problem: QESProblem, tol=None) -> QESSpectrum:
    """Spectrum of the truncated recurrence: characteristic polynomial, all M
    eigenvalues (sorted by real part, then imaginary part), and for each the
    back-substituted eigenvector normalized to a_0 = 1."""
    t = zero_tol() if tol is None else mpf(tol)
    M = problem.M
    if M is None:
        raise NoQuasiPolynomialSolutions(
            f"M is not a positive integer for nu={problem.nu}, ell={problem.ell}, "
            f"eps={problem.eps:+d}, mu={problem.mu_branch}")
    char = characteristic_polynomial(problem, M)
    if M == 1:
        eigenvalues = [-char[0]]
    else:
        roots = poly_roots(char, t)
        if any(m > 1 for _, m in roots):
            raise DegenerateSpectrumError(f"repeated eigenvalues: {roots}")
        eigenvalues = [r for r, _ in roots]
    scale = max([mpf(1)] + [abs(v) for v in eigenvalues])
    for i in range(len(eigenvalues) - 1):
        if abs(eigenvalues[i] - eigenvalues[i + 1]) <= t * scale:
            raise DegenerateSpectrumError(
                f"eigenvalues {i} and {i+1} coincide within tolerance")
    vectors = []
    for lam in eigenvalues:
        a = [mpc(1)]
        for n in range(0, 2 * M - 2, 2):
            up, down = recurrence_coeffs(n, problem)
            prev2 = a[n // 2 - 1] if n >= 2 else mpc(0)
            if up == 0:
                raise DegenerateSpectrumError(
                    f"vanishing super-diagonal at n={n}; back-substitution breaks")
            a.append(-(lam * a[n // 2] + (down * prev2 if n >= 2 else 0)) / up)
        vectors.append(tuple(a))
    return QESSpectrum(problem, M, char, tuple(eigenvalues), tuple(vectors))


def continue_recurrence(spectrum: QESSpectrum, index: int, extra_terms: int = 3):
    """Coefficients a_{2M}, a_{2M+2}, ... past truncation (should all vanish)."""
    problem, M = spectrum.problem, spectrum.M
    lam = spectrum.eigenvalues[index]
    a = list(spectrum.eigenvectors[index])
    out = []
    for n in range(2 * M - 2, 2 * M - 2 + 2 * extra_terms, 2):
        up, down = recurrence_coeffs(n, problem)
        a.append(-(lam * a[n // 2] + down * a[n // 2 - 1]) / up)
        out.append(a[-1])
    return out


def eigenfunction(spectrum: QESSpectrum, index: int) -> QuasiRationalFunction:
    """psi_index = x^mu * P_index(x) * exp(eps*x^4/4), P(0) = 1."""
    if not 0 <= index < spectrum.M:
        raise IndexError(f"eigenfunction index {index} out of range (M={spectrum.M})")
    return QuasiRationalFunction(
        mu=spectrum.problem.mu,
        eps=spectrum.problem.eps,
        poly_factor=spectrum.eigen_poly(index),
    )
