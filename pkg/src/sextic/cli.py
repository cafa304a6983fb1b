"""Command-line interface.

Subcommands: qes, darboux, locus, stieltjes, dynamics, repro.  All numeric
output is deterministic (fixed significant digits, sorted JSON keys).  Exit
codes: 0 success, 2 no quasi-polynomial solutions, 3 solver non-convergence,
4 singular integration stop (partial CSV retained), 64 usage errors.

The SEXTIC_PRECISION_BITS environment variable overrides the default
256-bit working precision; --precision overrides both.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field

from mpmath import mp, mpc, mpf, mpmathify

from . import serialize
from .darboux import (classify_membership, crum_potential, enumerate_darboux_set,
                      family_problem, simple_zero_audit)
from .dynamics import SingularStopError, Trajectory, closed_form_nu7, integrate
from .locus import (PoleConfiguration, homotopy_continue, locus_residual,
                    higher_locus_residual, solve_locus_newton, trivial_monodromy_check)
from .newton import CollisionError
from .poly import NonConvergenceError
from .precision import set_precision, zero_tol
from .qes import (MU_L_PLUS_1, MU_MINUS_L, NoQuasiPolynomialSolutions, QESProblem,
                  qes_spectrum)
from .repro import run_all
from .stieltjes import (shape_sweep, solve_stieltjes, stieltjes_implies_locus,
                        stieltjes_residual)
from .potential import QuasiRationalFunction

EX_OK = 0
EX_NO_SOLUTIONS = 2
EX_NO_CONVERGENCE = 3
EX_SINGULAR = 4
EX_USAGE = 64


@dataclass
class RunConfig:
    """Precision and tolerance settings shared by all subcommands."""

    precision_bits: int = 256
    zero_tol: mpf | None = None
    newton_tol: mpf | None = None
    ode_rtol: mpf = mpf('1e-12')
    ode_atol: mpf = mpf('1e-12')
    seed: int = 0

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValueError("precision must be >= 64 bits")
        for name in ("zero_tol", "newton_tol", "ode_rtol", "ode_atol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _write(path, text):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _branch(name):
    return MU_MINUS_L if name == "minus-l" else MU_L_PLUS_1


def _parse_cnum(s) -> mpc:
    return mpc(mpmathify(s.replace("i", "j")))


# ---------------------------------------------------------------------------
# qes
# ---------------------------------------------------------------------------

def cmd_qes(args) -> int:
    problem = QESProblem(mpf(args.nu), mpf(args.ell),
                         -1 if args.exp == "minus" else 1, _branch(args.branch))
    if problem.M is None:
        print("M not a positive integer: no quasi-polynomial solutions",
              file=sys.stderr)
        return EX_NO_SOLUTIONS
    sp = qes_spectrum(problem)
    doc = {
        "M": sp.M,
        "nu": serialize.fmt_real(problem.nu),
        "ell": serialize.fmt_real(problem.ell),
        "eps": problem.eps,
        "mu": serialize.fmt_real(problem.mu),
        "char_poly": [serialize.fmt_complex(c) for c in sp.char_poly.c],
        "eigenvalues": [serialize.fmt_complex(v) for v in sp.eigenvalues],
        "eigenfunctions": [[serialize.fmt_complex(a) for a in vec]
                           for vec in sp.eigenvectors],
        "meta": {"precision_bits": mp.prec},
    }
    _write(args.json, serialize.dumps(doc))
    return EX_OK


# ---------------------------------------------------------------------------
# darboux
# ---------------------------------------------------------------------------

def _descendant_doc(d):
    audit = simple_zero_audit(d)
    mono = trivial_monodromy_check(d.potential)
    doc = serialize.potential_to_dict(d.potential, meta={
        "family": d.family,
        "subset": list(d.subset),
        "parent_nu": serialize.fmt_real(d.parent.nu),
        "parent_ell": serialize.fmt_real(d.parent.ell),
    })
    doc["audit"] = {
        "origin_exponent": serialize.fmt_real(d.wronskian.origin_exponent),
        "deg_P_I": max(d.wronskian.P_I.degree, 0),
        "expected_deg": 2 * d.wronskian.m * (d.parent.M - d.wronskian.m),
        "P_I_even": d.wronskian.is_even,
        "all_zeros_simple": audit.all_simple,
        "multiplicity_histogram": {str(k): v for k, v in audit.histogram.items()},
        "agreement_residual": serialize.fmt_real(d.agreement_residual),
        "monodromy_satisfied": mono.satisfied,
        "monodromy_max_abs": serialize.fmt_real(mono.max_abs),
    }
    return doc


def cmd_darboux(args) -> int:
    problem = QESProblem(mpf(args.nu), mpf(args.ell),
                         -1 if args.exp == "minus" else 1, _branch(args.branch))
    if problem.M is None:
        print("M not a positive integer: no quasi-polynomial solutions",
              file=sys.stderr)
        return EX_NO_SOLUTIONS
    from .darboux import family_of
    fam = family_of(problem.eps, problem.mu_branch)
    if args.enumerate:
        out_dir = args.out or "."
        os.makedirs(out_dir, exist_ok=True)
        rows = []
        for d in enumerate_darboux_set(problem.nu, problem.ell, fam):
            label = "".join(str(i) for i in d.subset) or "base"
            path = os.path.join(out_dir, f"subset_{label}.json")
            _write(path, serialize.dumps(_descendant_doc(d)))
            mono = d.subset and _descendant_doc(d)["audit"]["monodromy_satisfied"]
            rows.append((label, d.family,
                         serialize.fmt_real(d.new_nu, 8),
                         serialize.fmt_real(d.new_ell, 8),
                         len(d.potential.poles)))
        print(f"{'subset':>8} {'family':>7} {'nu':>12} {'ell':>12} {'poles':>6}")
        for r in rows:
            print(f"{r[0]:>8} {r[1]:>7} {r[2]:>12} {r[3]:>12} {r[4]:>6}")
        return EX_OK
    subset = tuple(int(i) for i in args.subset.split(",") if i.strip()) \
        if args.subset else ()
    sp = qes_spectrum(problem)
    d = crum_potential(problem.potential(), subset, sp)
    _write(args.out, serialize.dumps(_descendant_doc(d)))
    return EX_OK


# ---------------------------------------------------------------------------
# locus
# ---------------------------------------------------------------------------

def _load_json(path):
    import json

    with open(path) as fh:
        return json.load(fh)


def _locus_report_doc(rep):
    return {
        "satisfied": rep.satisfied,
        "max_abs": serialize.fmt_real(rep.max_abs),
        "tol": serialize.fmt_real(rep.tol),
        "poles": [{
            "location": serialize.fmt_complex(c.location),
            "multiplicity": c.multiplicity,
            "lead_coeff": serialize.fmt_complex(c.lead_coeff),
            "lead_error": serialize.fmt_real(c.lead_error),
            "odd_coeffs": [serialize.fmt_complex(v) for v in c.odd_coeffs],
        } for c in rep.checks],
    }


def cmd_locus(args) -> int:
    if args.action == "check":
        V = serialize.potential_from_dict(_load_json(args.input))
        rep = trivial_monodromy_check(V)
        _write(args.out, serialize.dumps(_locus_report_doc(rep)))
        return EX_OK
    cfg = serialize.config_from_dict(_load_json(args.input))
    if args.action == "solve":
        try:
            sol, info = solve_locus_newton(cfg)
        except (NonConvergenceError, CollisionError) as exc:
            doc = {"error": str(exc)}
            if getattr(exc, "last", None) is not None:
                doc["last_iterate"] = [serialize.fmt_complex(v) for v in exc.last]
            _write(args.out, serialize.dumps(doc))
            return EX_NO_CONVERGENCE
        doc = serialize.config_to_dict(sol, meta={"iterations": info["iterations"]})
        doc["residuals"] = [serialize.fmt_complex(r) for r in locus_residual(sol)] \
            if all(k == 1 for _, k in sol.points) else \
            [serialize.fmt_complex(r) for r in higher_locus_residual(sol)]
        doc["iteration_log"] = [serialize.fmt_real(r) for r in info["residual_norms"]]
        _write(args.out, serialize.dumps(doc))
        return EX_OK
    if args.action == "continue":
        path = [mpf(v) for v in args.nu_path.split(",")]
        res = homotopy_continue(cfg, path)
        rows = []
        for nu, c in zip(res.nus, res.configurations):
            row = [serialize.fmt_real(nu)]
            for z, _ in c.points:
                row.extend([serialize.fmt_real(z.real), serialize.fmt_real(z.imag)])
            rows.append(row)
        import io

        buf = io.StringIO()
        w = csv.writer(buf)
        head = ["nu"]
        for i in range(len(cfg.points)):
            head.extend([f"x{i}_re", f"x{i}_im"])
        w.writerow(head)
        w.writerows(rows)
        _write(args.out, buf.getvalue())
        if not res.completed:
            print(res.message, file=sys.stderr)
            return EX_NO_CONVERGENCE
        return EX_OK
    raise AssertionError(args.action)


# ---------------------------------------------------------------------------
# stieltjes
# ---------------------------------------------------------------------------

def cmd_stieltjes(args) -> int:
    if args.shape_sweep:
        poles = [_parse_cnum(v) for v in args.poles.split(",")]
        rep = shape_sweep(poles, mpf(args.nu), mpf(args.ell))
        doc = {
            "min_over_shapes": serialize.fmt_real(rep.min_over_shapes),
            "shapes": [{
                "eps": s.eps, "mu": serialize.fmt_real(s.mu), "K": s.K,
                "best_max_residual": serialize.fmt_real(s.best_max_residual),
                "best_zeros": [serialize.fmt_complex(z) for z in s.best_zeros],
            } for s in rep.shapes],
        }
        _write(args.out, serialize.dumps(doc))
        return EX_OK
    zeros = [_parse_cnum(v) for v in args.zeros.split(",")] if args.zeros else []
    poles = [_parse_cnum(v) for v in args.poles.split(",")] if args.poles else []
    mu = mpf(args.mu)
    eps = -1 if args.exp == "minus" else 1
    if args.action == "check":
        psi = QuasiRationalFunction(mu, eps, zeros, poles)
        rep = stieltjes_residual(psi)
        impl = stieltjes_implies_locus(psi)
        doc = {
            "max_abs": serialize.fmt_real(rep.max_abs),
            "pole_residuals": [serialize.fmt_complex(v) for v in rep.pole_residuals],
            "zero_residuals": [serialize.fmt_complex(v) for v in rep.zero_residuals],
            "implied_nu": serialize.fmt_real(-impl.potential.poly_part[2].real),
            "eigenvalue": serialize.fmt_complex(impl.eigenvalue),
            "riccati_residual": serialize.fmt_real(impl.riccati_residual),
            "monodromy_satisfied": impl.monodromy.satisfied,
        }
        _write(args.out, serialize.dumps(doc))
        return EX_OK
    # solve
    try:
        psi, info = solve_stieltjes(args.K, args.N, mu, eps, (zeros, poles),
                                    args.symmetric)
    except NonConvergenceError as exc:
        doc = {"error": str(exc)}
        if exc.last is not None:
            doc["last_iterate"] = [serialize.fmt_complex(v) for v in exc.last]
        _write(args.out, serialize.dumps(doc))
        return EX_NO_CONVERGENCE
    rep = stieltjes_residual(psi)
    doc = {
        "zeros": [serialize.fmt_complex(z) for z in psi.zeros],
        "poles": [serialize.fmt_complex(z) for z in psi.poles],
        "mu": serialize.fmt_real(psi.mu),
        "eps": psi.eps,
        "max_abs": serialize.fmt_real(rep.max_abs),
        "iterations": info["iterations"],
    }
    _write(args.out, serialize.dumps(doc))
    return EX_OK


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def _traj_csv(traj: Trajectory) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf)
    n = len(traj.states[0].points) if traj.states else 0
    head = ["t"]
    for i in range(n):
        head.extend([f"z{i}_re", f"z{i}_im"])
    head.extend(["f_re", "f_im", "H_re", "H_im", "Ht_re", "Ht_im", "cm_max"])
    w.writerow(head)
    for i, st in enumerate(traj.states):
        row = [serialize.fmt_real(st.t)]
        for z, _ in st.points:
            row.extend([serialize.fmt_real(z.real), serialize.fmt_real(z.imag)])
        row.extend([serialize.fmt_real(st.phase.real), serialize.fmt_real(st.phase.imag),
                    serialize.fmt_real(traj.hamiltonian[i].real),
                    serialize.fmt_real(traj.hamiltonian[i].imag),
                    serialize.fmt_real(traj.hamiltonian_tilde[i].real),
                    serialize.fmt_real(traj.hamiltonian_tilde[i].imag),
                    serialize.fmt_real(traj.cm_max[i]) if traj.cm_max[i] is not None
                    else ""])
        w.writerow(row)
    return buf.getvalue()


def _traj_summary(traj: Trajectory, rtol) -> dict:
    bound = 10 * mpf(rtol)
    Hmax = max(abs(v) for v in traj.hamiltonian)
    Htmax = max(abs(v) for v in traj.hamiltonian_tilde)
    dH = max(abs(traj.hamiltonian[i] - traj.hamiltonian[0])
             for i in range(len(traj.times)))
    return {
        "samples": len(traj.times),
        "t_final": serialize.fmt_real(traj.times[-1]),
        "stop_reason": traj.stop_reason,
        "H_max": serialize.fmt_real(Hmax),
        "Ht_max": serialize.fmt_real(Htmax),
        "H_drift": serialize.fmt_real(dH),
        "zero_energy": bool(Hmax < bound and Htmax < bound),
        "conserved": bool(dH < bound),
    }


def cmd_dynamics(args) -> int:
    if not args.closed_form_nu7 and not args.initial:
        print("error: dynamics needs --initial or --closed-form-nu7", file=sys.stderr)
        return EX_USAGE
    if args.closed_form_nu7:
        c1s, c2s = args.closed_form_nu7.split(",")
        state = closed_form_nu7(mpf(args.t0), _parse_cnum(c1s), _parse_cnum(c2s))
    else:
        state = serialize.state_from_dict(_load_json(args.initial))
    rtol, atol = mpf(args.rtol), mpf(args.atol)
    code = EX_OK
    try:
        traj = integrate(state, mpf(args.t_end), rtol, atol)
    except SingularStopError as exc:
        traj = exc.trajectory
        if traj is None:
            print(str(exc), file=sys.stderr)
            return EX_SINGULAR
        traj.stop_reason = exc.reason
        code = EX_SINGULAR
        print(str(exc), file=sys.stderr)
    if args.csv:
        _write(args.csv, _traj_csv(traj))
    _write(args.json, serialize.dumps(_traj_summary(traj, rtol)))
    return code


# ---------------------------------------------------------------------------
# repro
# ---------------------------------------------------------------------------

def cmd_repro(args) -> int:
    only = set(args.only.split(",")) if args.only else None
    results = run_all(only=only, quick=args.quick)
    width = max(len(name) for name, _, _ in results)
    all_ok = True
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        all_ok &= ok
        print(f"{name:<{width}}  {status}  {detail}")
    print(f"{'overall':<{width}}  {'PASS' if all_ok else 'FAIL'}")
    return EX_OK if all_ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    p = _Parser(prog="sextic",
                description="Monodromy-free sextic potentials: QES spectra, "
                            "Darboux descendants, locus/Stieltjes systems, "
                            "pole dynamics")
    p.add_argument("--precision", type=int, default=None,
                   help="working precision in bits (default 256 or "
                        "SEXTIC_PRECISION_BITS)")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("qes", help="quasi-polynomial spectrum")
    q.add_argument("--nu", required=True)
    q.add_argument("--ell", required=True)
    q.add_argument("--exp", choices=["plus", "minus"], default="minus")
    q.add_argument("--branch", choices=["minus-l", "l-plus-1"], default="minus-l")
    q.add_argument("--json", default=None, help="output path (stdout default)")
    q.set_defaults(fn=cmd_qes)

    d = sub.add_parser("darboux", help="Crum descendants")
    d.add_argument("--nu", required=True)
    d.add_argument("--ell", required=True)
    d.add_argument("--exp", choices=["plus", "minus"], default="minus")
    d.add_argument("--branch", choices=["minus-l", "l-plus-1"], default="minus-l")
    d.add_argument("--subset", default="", help="comma-separated indices in 1..M")
    d.add_argument("--enumerate", action="store_true", help="all 2^M subsets")
    d.add_argument("--out", default=None, help="output file (or directory with "
                                               "--enumerate)")
    d.set_defaults(fn=cmd_darboux)

    lo = sub.add_parser("locus", help="monodromy checks and locus solving")
    lo.add_argument("action", choices=["check", "solve", "continue"])
    lo.add_argument("--input", required=True, help="potential or configuration JSON")
    lo.add_argument("--nu-path", default="", help="comma-separated nu values "
                                                  "(continue)")
    lo.add_argument("--out", default=None)
    lo.set_defaults(fn=cmd_locus)

    st = sub.add_parser("stieltjes", help="Stieltjes relations")
    st.add_argument("action", choices=["check", "solve"], nargs="?", default="check")
    st.add_argument("--zeros", default="", help="comma-separated complex values")
    st.add_argument("--poles", default="", help="comma-separated complex values")
    st.add_argument("--mu", default="0")
    st.add_argument("--exp", choices=["plus", "minus"], default="minus")
    st.add_argument("--K", type=int, default=0)
    st.add_argument("--N", type=int, default=0)
    st.add_argument("--symmetric", action="store_true")
    st.add_argument("--nu", default="0", help="quadratic coefficient (shape sweep)")
    st.add_argument("--ell", default="0")
    st.add_argument("--shape-sweep", action="store_true",
                    help="enumerate admissible shapes for the fixed pole set")
    st.add_argument("--out", default=None)
    st.set_defaults(fn=cmd_stieltjes)

    dy = sub.add_parser("dynamics", help="first-order pole dynamics")
    dy.add_argument("--initial", default=None, help="state JSON")
    dy.add_argument("--closed-form-nu7", default=None, metavar="C1,C2",
                    help="start from the explicit two-zero state")
    dy.add_argument("--t0", default="0.02")
    dy.add_argument("--t-end", required=True)
    dy.add_argument("--rtol", default="1e-12")
    dy.add_argument("--atol", default="1e-12")
    dy.add_argument("--csv", default=None)
    dy.add_argument("--json", default=None)
    dy.set_defaults(fn=cmd_dynamics)

    r = sub.add_parser("repro", help="run the full verification suite")
    r.add_argument("--only", default="", help="comma-separated criteria numbers")
    r.add_argument("--quick", action="store_true",
                   help="reduced instance counts for the property suites")
    r.set_defaults(fn=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EX_USAGE
    bits = args.precision or int(os.environ.get("SEXTIC_PRECISION_BITS", "256"))
    set_precision(bits)
    if getattr(args, "initial", None) is None and getattr(args, "closed_form_nu7", 1) is None:
        print("error: dynamics needs --initial or --closed-form-nu7", file=sys.stderr)
        return EX_USAGE
    try:
        return args.fn(args)
    except NoQuasiPolynomialSolutions as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_NO_SOLUTIONS
    except (NonConvergenceError, CollisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
