"""Exact re-verification of every computational claim shipped as data.

Each case returns a :class:`CaseResult`; nothing here trusts floating point
except the ``h-sigma2`` case, whose float SDP output is only used to propose
a Farkas vector that is then checked exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .certificate import (Certificate, Nonmembership, certificate_from_json, load_json,
                          nonmembership_from_json, verify_certificate, verify_nonmembership)
from .certify import check_poly
from .exact import RatMatrix, psd_check_exact
from .gram import SIGMA2, THETA2
from .ncpoly import Poly, cyc_equiv, format_poly, parse_poly
from .smk import s_mk_squares

H_POLY = "X4 + 2 X Y X + 2 X2 + Y2 + 2 Y + 1"
H_FACTOR = "X2 + Y + 1"
# largest admissible shift of B_{14,6} by the all-ones matrix
LAMBDA_146 = Fraction(5888894501020664034438572773247271387,
                      6345100314096416989598091089889990510969779)
LAMBDA_BUMP = Fraction(1001, 1000)

DATA_FILES = {
    "s73": "cert_7_3.json",
    "s84": "cert_8_4.json",
    "s144": "cert_14_4.json",
    "s146": "cert_14_6_parts.json",
    "s63": "farkas_6_3.json",
    "g-squares-144": "squares_14_4.json",
}


@dataclass
class CaseResult:
    case: str
    passed: bool
    lines: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"case": self.case, "passed": self.passed, "details": self.lines}


def _read(name: str, data_dir=None) -> dict:
    if data_dir is not None:
        return load_json(Path(data_dir) / name)
    return json.loads(resources.files("ncsos.data").joinpath(name).read_text(encoding="utf-8"))


def mirror_fill(top, bottom, n: int = 35, left: int = 19) -> list[list]:
    """Assemble the symmetric ``n x n`` matrix printed as two left panels.

    ``top`` holds rows ``1..n-left+2`` and ``bottom`` the remaining rows, all
    restricted to columns ``1..left``.  Columns past ``left`` come from
    symmetry above row ``left`` and from ``B[i,j] = B[n+1-j, n+1-i]``
    (1-based) below it.
    """
    rows = [list(r) for r in top] + [list(r) for r in bottom]
    if len(rows) != n or any(len(r) != left for r in rows):
        raise ValueError(f"expected {n} rows of {left} entries")
    B = [r + [None] * (n - left) for r in rows]
    for i in range(left):
        for j in range(left, n):
            B[i][j] = B[j][i]
    for i in range(left, n):
        for j in range(left, n):
            B[i][j] = B[n - 1 - j][n - 1 - i]
    return B


def certificate_14_6(d: dict) -> Certificate:
    B = mirror_fill(d["B_top"], d["B_bottom"])
    return certificate_from_json({"m": d["m"], "k": d["k"], "substitution": d["substitution"],
                                  "blocks": [{"vector": d["u"], "gram": d["A"]},
                                             {"vector": d["w"], "gram": B}]})


def shipped_certificate(case: str, data_dir=None) -> Certificate:
    d = _read(DATA_FILES[case], data_dir)
    return certificate_14_6(d) if case == "s146" else certificate_from_json(d)


def shipped_nonmembership(data_dir=None) -> Nonmembership:
    return nonmembership_from_json(_read(DATA_FILES["s63"], data_dir))


def _certificate_case(case: str, data_dir) -> CaseResult:
    cert = shipped_certificate(case, data_dir)
    rep = verify_certificate(cert)
    what = f"S_{{{cert.m},{cert.k}}}(X^2,Y^2)"
    form = f"{len(cert.blocks)} Gram block(s)" if cert.blocks else f"{len(cert.squares)} weighted squares"
    return CaseResult(case, rep.passed, [f"{what} via {form}"] + rep.summary().splitlines())


def _case_h_sigma2(data_dir) -> CaseResult:
    h = parse_poly(H_POLY)
    out = check_poly(h, SIGMA2)
    if isinstance(out, Nonmembership):
        rep = verify_nonmembership(out)
        return CaseResult("h-sigma2", rep.passed,
                          [f"h = {format_poly(h)} is not a sum of hermitian squares"] + rep.summary().splitlines())
    return CaseResult("h-sigma2", False, [f"expected exact nonmembership, got {type(out).__name__}"])


def _case_h_theta2(data_dir) -> CaseResult:
    h = parse_poly(H_POLY)
    q = parse_poly(H_FACTOR)
    cert = Certificate(0, 0, "plain", squares=[(Fraction(1), q)], target=h, mode=THETA2)
    rep = verify_certificate(cert)
    ok = rep.passed and cyc_equiv(h, q.star() * q) and h != q.star() * q
    return CaseResult("h-theta2", ok, [f"h ~cyc ({format_poly(q)})*({format_poly(q)}), not equal as polynomials"]
                      + rep.summary().splitlines())


def _case_s63(data_dir) -> CaseResult:
    nm = shipped_nonmembership(data_dir)
    rep = verify_nonmembership(nm)
    return CaseResult("s63", rep.passed, ["S_{6,3}(X^2,Y^2) not in the cyclic cone (exact Farkas data)"]
                      + rep.summary().splitlines())


def _b146(data_dir) -> RatMatrix:
    cert = shipped_certificate("s146", data_dir)
    return cert.blocks[1][1]


def _case_lambda_shift(data_dir) -> CaseResult:
    B = _b146(data_dir)
    n = B.n
    ones = RatMatrix([[1] * n for _ in range(n)])
    at = psd_check_exact(B - ones.scale(LAMBDA_146))
    above = psd_check_exact(B - ones.scale(LAMBDA_146 * LAMBDA_BUMP))
    lines = [f"lambda = {LAMBDA_146} ~ {float(LAMBDA_146):.4e}",
             f"B - lambda J: {'PSD' if at else 'NOT PSD'}",
             f"B - 1.001 lambda J: {'PSD' if above else 'NOT PSD'}"]
    return CaseResult("lambda-shift", bool(at) and not above, lines)


def _case_j_identity(data_dir) -> CaseResult:
    cert = shipped_certificate("s146", data_dir)
    w = cert.blocks[1][0]
    total = _sum(w)
    s73 = s_mk_squares(7, 3)
    lhs = total.star() * total
    ok = lhs == s73.star() * s73 and s73.star() == s73
    return CaseResult("j-identity", ok, [f"sum of the {len(w)} entries of w equals S_{{7,3}}(X^2,Y^2): {total == s73}",
                                         f"w* J w == S_{{7,3}}(X^2,Y^2)^2 exactly: {ok}"])


def _sum(polys) -> Poly:
    out = Poly({})
    for p in polys:
        out = out + p
    return out


CASES = {
    "h-sigma2": _case_h_sigma2,
    "h-theta2": _case_h_theta2,
    "s73": lambda d: _certificate_case("s73", d),
    "s84": lambda d: _certificate_case("s84", d),
    "s63": _case_s63,
    "s144": lambda d: _certificate_case("s144", d),
    "s146": lambda d: _certificate_case("s146", d),
    "lambda-shift": _case_lambda_shift,
    "j-identity": _case_j_identity,
    "g-squares-144": lambda d: _certificate_case("g-squares-144", d),
}


def reproduce_paper(case: str, data_dir=None) -> CaseResult:
    """Run one named verification; ``data_dir`` overrides the shipped data files."""
    try:
        fn = CASES[case]
    except KeyError:
        raise ValueError(f"unknown case {case!r}; choose from {', '.join(CASES)}") from None
    try:
        return fn(data_dir)
    except (ValueError, KeyError, TypeError, OSError) as e:
        # malformed or edited data is a failed case, not a crash
        return CaseResult(case, False, [f"could not load or check data: {e}"])
