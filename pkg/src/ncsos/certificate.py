"""Membership and nonmembership certificates: JSON I/O and exact checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .exact import PsdProof, RatMatrix, Witness, psd_check_exact
from .gram import GramBasis, assemble
from .ncpoly import (Poly, PolySyntaxError, cyclic_reduce, format_poly, format_rational, format_word,
                     min_rotation, parse_poly, parse_rational, word_key)
from .smk import s_mk, s_mk_squares

PLAIN = "plain"
SQUARES = "squares"


class CertificateError(ValueError):
    """Malformed certificate data."""


@dataclass
class Certificate:
    m: int
    k: int
    substitution: str = SQUARES
    blocks: list[tuple[list[Poly], RatMatrix]] = field(default_factory=list)
    squares: list[tuple[Fraction, Poly]] = field(default_factory=list)
    # explicit target for general polynomials; None means S_{m,k}
    target: Poly | None = None
    # "theta2": equality up to cyclic equivalence, "sigma2": exact equality
    mode: str = "theta2"

    def __post_init__(self):
        if self.mode not in ("theta2", "sigma2"):
            raise CertificateError(f"unknown mode {self.mode!r}")
        if self.substitution not in (PLAIN, SQUARES):
            raise CertificateError(f"unknown substitution {self.substitution!r}")
        for vec, G in self.blocks:
            if G.shape != (len(vec), len(vec)):
                raise CertificateError("block matrix order does not match its vector")
        for w, _ in self.squares:
            if w < 0:
                raise CertificateError("negative square weight")

    def target_poly(self) -> Poly:
        if self.target is not None:
            return self.target
        return s_mk_squares(self.m, self.k) if self.substitution == SQUARES else s_mk(self.m, self.k)

    def gram_sum(self) -> Poly:
        """``sum_i v_i* G_i v_i + sum_j w_j q_j* q_j`` as an exact polynomial."""
        out: dict[str, Fraction] = {}
        for vec, G in self.blocks:
            stars = [p.star() for p in vec]
            for a, pa in enumerate(stars):
                for b, pb in enumerate(vec):
                    g = G[a, b]
                    if not g:
                        continue
                    for u, cu in pa.items():
                        for v, cv in pb.items():
                            out[u + v] = out.get(u + v, 0) + g * cu * cv
        for w, q in self.squares:
            qs = q.star()
            for u, cu in qs.items():
                for v, cv in q.items():
                    out[u + v] = out.get(u + v, 0) + w * cu * cv
        return Poly(out)


@dataclass
class Nonmembership:
    """Exact Farkas data for the Gram problem on ``basis``.

    ``y`` maps constraint labels (canonical words) to rationals.  Valid when
    ``sum_l y_l A_l`` is PSD and ``b^T y < 0``.
    """

    m: int
    k: int
    basis: GramBasis
    y: dict[str, Fraction]
    substitution: str = SQUARES
    mode: str = "theta2"
    target: Poly | None = None

    def target_poly(self) -> Poly:
        if self.target is not None:
            return self.target
        return s_mk_squares(self.m, self.k) if self.substitution == SQUARES else s_mk(self.m, self.k)


@dataclass
class Report:
    passed: bool
    psd: list[bool] = field(default_factory=list)
    witnesses: list[Witness | None] = field(default_factory=list)
    ranks: list[int | None] = field(default_factory=list)
    cyclic_ok: bool = False
    mismatch: tuple[str, Fraction, Fraction] | None = None  # (class, expected, got)
    margin: Fraction | None = None  # -b^T y for Farkas reports
    messages: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [("PASS" if self.passed else "FAIL")]
        for i, ok in enumerate(self.psd):
            rk = self.ranks[i] if i < len(self.ranks) else None
            lines.append(f"  block {i + 1}: {'PSD' if ok else 'NOT PSD'}"
                         + (f" (rank {rk})" if rk is not None else ""))
        if self.margin is not None:
            lines.append(f"  b^T y = {format_rational(-self.margin)}")
        lines.append(f"  cyclic equivalence: {'ok' if self.cyclic_ok else 'FAILED'}")
        if self.mismatch:
            cls, exp, got = self.mismatch
            lines.append(f"  first mismatched class {cls}: expected {format_rational(exp)}, "
                         f"got {format_rational(got)}")
        lines.extend("  " + m for m in self.messages)
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "psd": self.psd,
            "ranks": self.ranks,
            "cyclic_ok": self.cyclic_ok,
            "mismatch": None if self.mismatch is None else {
                "class": self.mismatch[0], "expected": format_rational(self.mismatch[1]),
                "got": format_rational(self.mismatch[2])},
            "witnesses": [None if w is None else [format_rational(x) for x in w.x] for w in self.witnesses],
            "b_dot_y": None if self.margin is None else format_rational(-self.margin),
            "messages": self.messages,
        }


def first_cyclic_mismatch(f: Poly, g: Poly) -> tuple[str, Fraction, Fraction] | None:
    """First class (in (degree, lex) order) where ``f`` and ``g`` differ."""
    cf, cg = cyclic_reduce(f), cyclic_reduce(g)
    for w in sorted(set(cf) | set(cg), key=word_key):
        a, b = cf.get(w, 0), cg.get(w, 0)
        if a != b:
            return format_word(w), Fraction(a), Fraction(b)
    return None


def first_exact_mismatch(f: Poly, g: Poly) -> tuple[str, Fraction, Fraction] | None:
    for w in sorted(set(f.terms) | set(g.terms), key=word_key):
        a, b = f.coeff(w), g.coeff(w)
        if a != b:
            return format_word(w), Fraction(a), Fraction(b)
    return None


def verify_certificate(c: Certificate) -> Report:
    """Exact check: every block PSD and the Gram sum cyclically equals the target."""
    rep = Report(passed=False)
    for _, G in c.blocks:
        res = psd_check_exact(G)
        rep.psd.append(bool(res))
        rep.witnesses.append(None if res else res)
        rep.ranks.append(res.rank if isinstance(res, PsdProof) else None)
    if any(w < 0 for w, _ in c.squares):
        rep.messages.append("negative square weight")
    if c.mode == "sigma2":
        mm = first_exact_mismatch(c.target_poly(), c.gram_sum())
    else:
        mm = first_cyclic_mismatch(c.target_poly(), c.gram_sum())
    rep.cyclic_ok = mm is None
    rep.mismatch = mm
    rep.passed = rep.cyclic_ok and all(rep.psd) and not rep.messages
    return rep


def farkas_blocks(nm: Nonmembership) -> tuple[list[RatMatrix], Fraction]:
    """``sum_l y_l A_l`` per block and ``b^T y`` for the Gram problem."""
    prob = assemble(nm.target_poly(), nm.basis, nm.mode)
    labels = {key: l for l, key in enumerate(prob.keys)}
    unknown = [w for w in nm.y if w not in labels]
    if unknown:
        raise CertificateError(f"Farkas vector refers to unknown constraint {format_word(unknown[0])}")
    mats = [[[Fraction(0)] * n for _ in range(n)] for n in prob.block_sizes]
    by = Fraction(0)
    for w, yl in nm.y.items():
        l = labels[w]
        by += yl * Fraction(prob.rhs[l])
        for blk, i, j, v in prob.constraints[l]:
            mats[blk][i][j] += yl * v
            if i != j:
                mats[blk][j][i] += yl * v
    return [RatMatrix(m) for m in mats], by


def verify_nonmembership(nm: Nonmembership) -> Report:
    rep = Report(passed=False, cyclic_ok=True)
    mats, by = farkas_blocks(nm)
    for M in mats:
        res = psd_check_exact(M)
        rep.psd.append(bool(res))
        rep.witnesses.append(None if res else res)
        rep.ranks.append(res.rank if isinstance(res, PsdProof) else None)
    rep.margin = -by
    if not by < 0:
        rep.messages.append("b^T y is not negative")
    rep.passed = all(rep.psd) and by < 0
    return rep


# ---------------------------------------------------------------------------
# JSON

def _poly_str(p: Poly) -> str:
    return format_poly(p)


def _parse_poly_field(s, where: str) -> Poly:
    if not isinstance(s, str):
        raise CertificateError(f"{where}: expected a polynomial string")
    try:
        return parse_poly(s)
    except PolySyntaxError as e:
        raise CertificateError(f"{where}: {e}") from e


def _parse_rat_field(s, where: str) -> Fraction:
    if isinstance(s, int) and not isinstance(s, bool):
        return Fraction(s)
    if not isinstance(s, str):
        raise CertificateError(f"{where}: expected a rational string")
    try:
        return parse_rational(s)
    except ValueError as e:
        raise CertificateError(f"{where}: {e}") from e


def certificate_to_json(c: Certificate) -> dict:
    out: dict = {"m": c.m, "k": c.k, "substitution": c.substitution}
    if c.target is not None:
        out["target"] = _poly_str(c.target)
    if c.mode != "theta2":
        out["mode"] = c.mode
    if c.blocks:
        out["blocks"] = [{"vector": [_poly_str(p) for p in vec],
                          "gram": [[format_rational(x) for x in row] for row in G.rows]}
                         for vec, G in c.blocks]
    if c.squares:
        out["squares"] = [{"weight": format_rational(w), "poly": _poly_str(q)} for w, q in c.squares]
    return out


def certificate_from_json(d: dict) -> Certificate:
    if not isinstance(d, dict):
        raise CertificateError("certificate must be a JSON object")
    try:
        m, k = int(d["m"]), int(d["k"])
    except (KeyError, TypeError, ValueError) as e:
        raise CertificateError("missing or invalid m/k") from e
    sub = d.get("substitution", SQUARES)
    if "blocks" not in d and "squares" not in d:
        raise CertificateError("either 'blocks' or 'squares' must be present")
    blocks = []
    for bi, blk in enumerate(d.get("blocks", [])):
        try:
            vec_raw, gram_raw = blk["vector"], blk["gram"]
        except (KeyError, TypeError) as e:
            raise CertificateError(f"block {bi + 1}: needs 'vector' and 'gram'") from e
        vec = [_parse_poly_field(s, f"block {bi + 1} vector") for s in vec_raw]
        rows = [[_parse_rat_field(x, f"block {bi + 1} gram") for x in row] for row in gram_raw]
        if len(rows) != len(vec) or any(len(r) != len(vec) for r in rows):
            raise CertificateError(f"block {bi + 1}: gram must be {len(vec)}x{len(vec)}")
        blocks.append((vec, RatMatrix(rows)))
    squares = []
    for si, sq in enumerate(d.get("squares", [])):
        try:
            w = _parse_rat_field(sq["weight"], f"square {si + 1} weight")
            q = _parse_poly_field(sq["poly"], f"square {si + 1} poly")
        except (KeyError, TypeError) as e:
            raise CertificateError(f"square {si + 1}: needs 'weight' and 'poly'") from e
        squares.append((w, q))
    target = _parse_poly_field(d["target"], "target") if "target" in d else None
    try:
        return Certificate(m, k, sub, blocks, squares, target, d.get("mode", "theta2"))
    except ValueError as e:
        raise CertificateError(str(e)) from e


def nonmembership_to_json(nm: Nonmembership) -> dict:
    out = {"m": nm.m, "k": nm.k, "substitution": nm.substitution, "mode": nm.mode,
           "basis": [[_poly_str(p) for p in blk] for blk in nm.basis.blocks],
           "farkas": {format_word(w): format_rational(v)
                      for w, v in sorted(nm.y.items(), key=lambda t: word_key(t[0]))}}
    if nm.target is not None:
        out["target"] = _poly_str(nm.target)
    return out


def _word_from_label(s: str) -> str:
    p = _parse_poly_field(s, "farkas label")
    (w, c), = p.items()
    if c != 1:
        raise CertificateError(f"farkas label {s!r} is not a word")
    return w


def nonmembership_from_json(d: dict) -> Nonmembership:
    try:
        basis = GramBasis([[_parse_poly_field(s, "basis") for s in blk] for blk in d["basis"]])
        y = {min_rotation(_word_from_label(w)) if d.get("mode", "theta2") == "theta2" else _word_from_label(w):
             _parse_rat_field(v, "farkas") for w, v in d["farkas"].items()}
        target = _parse_poly_field(d["target"], "target") if "target" in d else None
        return Nonmembership(int(d["m"]), int(d["k"]), basis, y, d.get("substitution", SQUARES),
                             d.get("mode", "theta2"), target)
    except (KeyError, TypeError) as e:
        raise CertificateError("malformed nonmembership file") from e


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise CertificateError(f"{path}: invalid JSON ({e})") from e


def load_certificate(path) -> Certificate:
    return certificate_from_json(load_json(path))


def save_certificate(c: Certificate, path) -> None:
    Path(path).write_text(json.dumps(certificate_to_json(c), indent=1) + "\n", encoding="utf-8")


def load_nonmembership(path) -> Nonmembership:
    return nonmembership_from_json(load_json(path))


def save_nonmembership(nm: Nonmembership, path) -> None:
    Path(path).write_text(json.dumps(nonmembership_to_json(nm), indent=1) + "\n", encoding="utf-8")


def is_nonmembership_json(d: dict) -> bool:
    return isinstance(d, dict) and "farkas" in d


def rat_blocks(blocks: Sequence) -> list[RatMatrix]:
    return [b if isinstance(b, RatMatrix) else RatMatrix(b) for b in blocks]
