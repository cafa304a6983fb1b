"""Deterministic JSON/CSV encoding of package objects.

All numbers are serialized as decimal strings with ceil(precision_bits *
0.302) significant digits, which round-trips the binary value exactly at the
working precision; complex values are {"re": ..., "im": ...} objects.  Maps
are emitted with sorted keys so identical inputs produce byte-identical
output.
"""

from __future__ import annotations

import json
import math

from mpmath import mp, mpc, mpf, mpmathify

from .locus import PoleConfiguration
from .poly import Poly
from .potential import RationalPotential
from .precision import as_mpc, as_mpf

POTENTIAL_FORMAT = "sextic-potential"
CONFIG_FORMAT = "sextic-locus-config"
STATE_FORMAT = "sextic-dynamics-state"


def sig_digits(bits=None) -> int:
    return math.ceil((bits if bits is not None else mp.prec) * 0.302)


def fmt_real(x, digits=None) -> str:
    return mp.nstr(as_mpf(x), digits if digits is not None else sig_digits(),
                   strip_zeros=False)


def fmt_complex(z, digits=None) -> dict:
    z = as_mpc(z)
    d = digits if digits is not None else sig_digits()
    return {"re": mp.nstr(z.real, d, strip_zeros=False),
            "im": mp.nstr(z.imag, d, strip_zeros=False)}


def parse_real(s) -> mpf:
    return mpf(mpmathify(s))


def parse_complex(obj) -> mpc:
    if isinstance(obj, dict):
        return mpc(parse_real(obj["re"]), parse_real(obj["im"]))
    return as_mpc(mpmathify(obj))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- potentials --------------------------------------------------------------

def potential_to_dict(V: RationalPotential, meta=None) -> dict:
    poly = {}
    for k in range(V.poly_part.degree + 1):
        c = V.poly_part[k]
        if c != 0:
            poly[str(k)] = fmt_complex(c) if c.imag != 0 else fmt_real(c.real)
    return {
        "format": POTENTIAL_FORMAT,
        "poly": poly,
        "ell": fmt_real(V.ell),
        "poles": [{"re": fmt_complex(z)["re"], "im": fmt_complex(z)["im"],
                   "mult": k} for z, k in V.poles],
        "meta": dict(meta or {}),
    }


def potential_from_dict(d: dict) -> RationalPotential:
    coeffs = [mpc(0)] * 7
    for k, v in d.get("poly", {}).items():
        coeffs[int(k)] = parse_complex(v)
    poles = tuple((mpc(parse_real(p["re"]), parse_real(p["im"])), int(p["mult"]))
                  for p in d.get("poles", []))
    return RationalPotential(Poly(coeffs), parse_real(d.get("ell", "0")), poles)


# -- pole configurations ------------------------------------------------------

def config_to_dict(cfg: PoleConfiguration, meta=None) -> dict:
    return {
        "format": CONFIG_FORMAT,
        "nu": fmt_real(cfg.nu),
        "ell": fmt_real(cfg.ell),
        "symmetric": bool(cfg.symmetric),
        "points": [{"re": fmt_complex(z)["re"], "im": fmt_complex(z)["im"],
                    "mult": k} for z, k in cfg.points],
        "meta": dict(meta or {}),
    }


def config_from_dict(d: dict) -> PoleConfiguration:
    pts = tuple((mpc(parse_real(p["re"]), parse_real(p["im"])), int(p.get("mult", 1)))
                for p in d["points"])
    return PoleConfiguration(pts, parse_real(d["nu"]), parse_real(d.get("ell", "0")),
                             bool(d.get("symmetric", False)))


# -- dynamics states ----------------------------------------------------------

def state_to_dict(state, meta=None) -> dict:
    return {
        "format": STATE_FORMAT,
        "eps": state.eps,
        "t": fmt_real(state.t),
        "phase": fmt_complex(state.phase),
        "points": [{"re": fmt_complex(z)["re"], "im": fmt_complex(z)["im"],
                    "gamma": g} for z, g in state.points],
        "meta": dict(meta or {}),
    }


def state_from_dict(d: dict):
    from .dynamics import DynamicsState

    pts = tuple((mpc(parse_real(p["re"]), parse_real(p["im"])), int(p["gamma"]))
                for p in d["points"])
    return DynamicsState(pts, int(d.get("eps", 1)), parse_real(d.get("t", "0")),
                         parse_complex(d.get("phase", {"re": "0", "im": "0"})))
