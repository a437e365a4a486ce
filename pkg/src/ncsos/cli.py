"""Command-line entry point.

Exit codes: 0 success or membership confirmed, 1 verified nonmembership (or a
failed shipped-data check), 2 inconclusive or rejected, 3 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bmvtable import bmv_proven_up_to, descent_closure, load_known, render_bmv, render_table
from .certificate import (Certificate, CertificateError, Nonmembership, certificate_from_json,
                          is_nonmembership_json, load_json, nonmembership_from_json, nonmembership_to_json,
                          save_certificate, save_nonmembership, verify_certificate, verify_nonmembership)
from .certify import CertifyOptions, certify, check_poly, round_feasible
from .exact import constraint_residuals_exact, psd_check_exact, rationalize
from .gram import (MODES, THETA2, assemble, build_basis, max_lambda_min_problem, read_dump,
                   recover_max_lambda_min, write_dump)
from .ncpoly import PolySyntaxError, format_poly, format_rational, format_word, parse_poly
from .reproduce import CASES, reproduce_paper
from .sdp import Status, solve_sdp
from .smk import s_mk, s_mk_squares
from .variational import commutator_norm, lagrange_residuals, search

EXIT_OK = 0
EXIT_NONMEMBER = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _emit(args, text: str, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, indent=1, ensure_ascii=False))
    else:
        print(text)


def _options(args) -> CertifyOptions:
    return CertifyOptions(feas_tol=args.feas_tol, max_iter=args.max_iter, max_den=args.max_den)


def _outcome_code(out) -> int:
    if isinstance(out, Certificate):
        return EXIT_OK
    if isinstance(out, Nonmembership):
        return EXIT_NONMEMBER
    return EXIT_INCONCLUSIVE


# ---------------------------------------------------------------------------
# commands

def cmd_smk(args) -> int:
    f = s_mk_squares(args.m, args.k) if args.squares else s_mk(args.m, args.k)
    text = format_poly(f)
    _emit(args, text, {"m": args.m, "k": args.k, "squares": args.squares, "poly": text,
                       "n_words": len(f.terms)})
    return EXIT_OK


def _write_dump_files(prefix: str, problem, args) -> list[str]:
    """Problem dump plus the float solution, pushed to the interior when possible."""
    written = [f"{prefix}.sdp"]
    write_dump(problem, written[0])
    sol = solve_sdp(problem, feas_tol=args.feas_tol, max_iter=args.max_iter)
    blocks = sol.blocks
    if sol.status is Status.FEASIBLE:
        tr = sum(float(np.trace(G)) for G in sol.blocks)
        aux = solve_sdp(max_lambda_min_problem(problem, max(1.0, 2.0 * tr)),
                        feas_tol=args.feas_tol, max_iter=args.max_iter)
        if aux.status is Status.FEASIBLE:
            blocks, _ = recover_max_lambda_min(problem, aux.blocks)
    if blocks is not None:
        path = f"{prefix}.sol.json"
        Path(path).write_text(json.dumps({"status": sol.status.value,
                                          "blocks": [np.asarray(G).tolist() for G in blocks]}) + "\n",
                              encoding="utf-8")
        written.append(path)
    return written


def cmd_check(args) -> int:
    if args.dump:
        prob = assemble(s_mk_squares(args.m, args.k), build_basis(args.m, args.k), THETA2)
        for p in _write_dump_files(args.dump, prob, args):
            print(f"wrote {p}", file=sys.stderr)
    out = certify(args.m, args.k, _options(args))
    return _report_outcome(args, out, default_path=f"cert_{args.m}_{args.k}.json")


def _report_outcome(args, out, default_path: str | None) -> int:
    code = _outcome_code(out)
    payload: dict = {"result": {0: "certificate", 1: "nonmembership", 2: "inconclusive"}[code]}
    lines = []
    if isinstance(out, Certificate):
        rep = verify_certificate(out)
        path = args.cert or default_path
        if not rep.passed:  # certify only returns verified certificates
            raise RuntimeError("internal error: unverified certificate")
        if path:
            save_certificate(out, path)
            payload["path"] = path
            lines.append(f"certificate written to {path}")
        lines.insert(0, "member: exact certificate found")
        lines.append(rep.summary())
        payload["report"] = rep.to_json()
        payload["sizes"] = [len(v) for v, _ in out.blocks]
        if out.blocks:
            lines.append("blocks: " + ", ".join(f"{len(v)}x{len(v)}" for v, _ in out.blocks))
    elif isinstance(out, Nonmembership):
        rep = verify_nonmembership(out)
        lines.append("not a member: exact Farkas certificate")
        lines.append(rep.summary())
        lines.append("farkas y: " + ", ".join(f"{format_word(k)}: {format_rational(v)}" for k, v in out.y.items()))
        payload["report"] = rep.to_json()
        payload["farkas"] = nonmembership_to_json(out)["farkas"]
        if args.cert:
            save_nonmembership(out, args.cert)
            payload["path"] = args.cert
            lines.append(f"Farkas certificate written to {args.cert}")
    else:
        lines.append(f"inconclusive: {out.reason}")
        lines.extend("  " + n for n in out.log)
        payload["reason"] = out.reason
        payload["log"] = out.log
    _emit(args, "\n".join(lines), payload)
    return code


def cmd_check_poly(args) -> int:
    try:
        f = parse_poly(args.poly)
    except PolySyntaxError as e:
        raise UsageError(str(e)) from e
    if f.star() != f:
        raise UsageError("polynomial must be symmetric (f* = f)")
    out = check_poly(f, args.mode, _options(args))
    return _report_outcome(args, out, default_path=None)


def cmd_verify(args) -> int:
    if not args.cert:
        raise UsageError("verify needs --cert PATH")
    try:
        d = load_json(args.cert)
        if is_nonmembership_json(d):
            nm = nonmembership_from_json(d)
            rep = verify_nonmembership(nm)
            code = EXIT_NONMEMBER if rep.passed else EXIT_INCONCLUSIVE
            kind = "nonmembership"
        else:
            cert = certificate_from_json(d)
            rep = verify_certificate(cert)
            code = EXIT_OK if rep.passed else EXIT_INCONCLUSIVE
            kind = "certificate"
    except OSError as e:
        raise UsageError(f"cannot read {args.cert}: {e}") from e
    except (CertificateError, ValueError) as e:
        raise UsageError(f"malformed file {args.cert}: {e}") from e
    _emit(args, f"{kind}: " + rep.summary(), {"kind": kind, **rep.to_json()})
    return code


def cmd_rationalize(args) -> int:
    try:
        sol = load_json(args.solution)
        blocks = [np.asarray(G, dtype=float) for G in sol["blocks"]]
        prob = read_dump(args.problem) if args.problem else None
    except (OSError, KeyError, ValueError, CertificateError) as e:
        raise UsageError(f"cannot read input: {e}") from e
    opts = _options(args)
    if prob is None:
        R = [rationalize(G, args.max_den) for G in blocks]
        psd = [bool(psd_check_exact(Rb)) for Rb in R]
        payload = {"blocks": [[[format_rational(x) for x in row] for row in Rb.tolist()] for Rb in R], "psd": psd}
        _emit(args, _format_blocks(R) + f"\nPSD: {psd}", payload)
        return EXIT_OK if all(psd) else EXIT_INCONCLUSIVE
    R = round_feasible(prob, blocks, opts)
    if R is None:
        _emit(args, "no exactly feasible PSD rounding found", {"blocks": None})
        return EXIT_INCONCLUSIVE
    assert all(r == 0 for r in constraint_residuals_exact(R, prob))
    payload = {"blocks": [[[format_rational(x) for x in row] for row in Rb.tolist()] for Rb in R], "psd": True}
    if args.cert:
        Path(args.cert).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    _emit(args, _format_blocks(R) + "\nexactly feasible and PSD", payload)
    return EXIT_OK


def _format_blocks(R) -> str:
    out = []
    for b, Rb in enumerate(R):
        out.append(f"block {b + 1}:")
        out.extend("  " + " ".join(format_rational(x) for x in row) for row in Rb.tolist())
    return "\n".join(out)


def cmd_table(args) -> int:
    try:
        t = load_known(args.known)
    except OSError as e:
        raise UsageError(f"cannot read {args.known}: {e}") from e
    proven = set(t.theta2_in_pairs()) | {tuple(p) for p in (args.proven or [])}
    closed = descent_closure(proven, t)
    m_max = args.m if args.m is not None else max(t.max_m(), 0)
    upto = bmv_proven_up_to(closed)
    text = "\n".join([render_table(closed, m_max), "", "trace positivity (P proven, o open):",
                      render_bmv(closed, m_max), "", f"proven for every m <= {upto}"])
    payload = {"theta2": render_table(closed, m_max).splitlines(),
               "bmv": render_bmv(closed, m_max).splitlines(), "proven_up_to": upto}
    _emit(args, text, payload)
    return EXIT_OK


def cmd_search(args) -> int:
    st = search(args.m, args.k, args.n, seed=args.seed, restarts=args.restarts, max_iter=args.max_iter,
                psd=args.psd)
    r1, r2 = lagrange_residuals(st.A, st.B, args.m, args.k)
    comm = commutator_norm(st.A, st.B, args.m, args.k)
    payload = {"m": args.m, "k": args.k, "n": args.n, "seed": st.seed, "mode": st.mode, "value": st.value,
               "iterations": st.iterations, "grad_norm": st.grad_norm, "lagrange_residuals": [r1, r2],
               "commutator_norm": comm, "A": st.A.tolist(), "B": st.B.tolist()}
    text = "\n".join([f"best tr S_{args.m},{args.k}(A^2,B^2) = {st.value:.6e} (seed {st.seed}, {st.mode})",
                      f"iterations {st.iterations}, tangential gradient norm {st.grad_norm:.3e}",
                      f"Lagrange residuals {r1:.3e} {r2:.3e}, ||[A,S]|| {comm:.3e}",
                      "a nonnegative minimum is numerical evidence only, not a proof"])
    _emit(args, text, payload)
    return EXIT_OK


def cmd_paper(args) -> int:
    cases = [args.case] if args.case else list(CASES)
    results = []
    for c in cases:
        try:
            results.append(reproduce_paper(c, args.data_dir))
        except (OSError, CertificateError) as e:
            raise UsageError(f"case {c}: {e}") from e
    text = []
    for r in results:
        text.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.case}")
        text.extend("    " + ln for ln in r.lines)
    _emit(args, "\n".join(text), {"cases": [r.to_json() for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_NONMEMBER


# ---------------------------------------------------------------------------
# parser

def _pair(s: str) -> tuple[int, int]:
    try:
        m, k = (int(t) for t in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected M,K") from None
    return m, k


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--feas-tol", type=_positive_float, default=1e-8)
    solver.add_argument("--max-iter", type=_positive_int, default=200)
    solver.add_argument("--max-den", type=_positive_int, default=10 ** 6)
    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--m", type=int, required=True)
    pair.add_argument("--k", type=int, required=True)

    p = _Parser(prog="ncsos", description="Sums of hermitian squares and cyclic equivalence for S_{m,k}.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("smk", parents=[common, pair], help="print S_{m,k}")
    s.add_argument("--squares", action="store_true", help="substitute X -> X^2, Y -> Y^2")
    s.set_defaults(func=cmd_smk)

    s = sub.add_parser("check", parents=[common, pair, solver], help="certify S_{m,k}(X^2,Y^2)")
    s.add_argument("--cert", help="output path (default cert_M_K.json; Farkas data only when given)")
    s.add_argument("--dump", metavar="PREFIX", help="also write the problem and float solution")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("check-poly", parents=[common, solver], help="membership of a symmetric polynomial")
    s.add_argument("poly")
    s.add_argument("--mode", choices=MODES, default=THETA2)
    s.add_argument("--cert")
    s.set_defaults(func=cmd_check_poly)

    s = sub.add_parser("verify", parents=[common], help="exactly verify a certificate or Farkas file")
    s.add_argument("--cert", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("rationalize", parents=[common, solver], help="round a float solution dump")
    s.add_argument("solution", help="JSON with a 'blocks' list of float matrices")
    s.add_argument("--problem", help="problem dump; enables exact projection onto the constraints")
    s.add_argument("--cert", help="write the exact blocks here")
    s.set_defaults(func=cmd_rationalize)

    s = sub.add_parser("table", parents=[common], help="render the status triangle after descent")
    s.add_argument("--known", help="known-results JSON (default: shipped)")
    s.add_argument("--m", type=int, help="last row to render")
    s.add_argument("--proven", type=_pair, action="append", metavar="M,K",
                   help="extra pair with trace positivity proven")
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("search", parents=[common, pair], help="minimize tr S_{m,k}(A^2,B^2) on HS spheres")
    s.add_argument("--n", type=_positive_int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=_positive_int, default=1)
    s.add_argument("--max-iter", type=_positive_int, default=2000)
    s.add_argument("--psd", action="store_true", help="search over PSD A, B")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("paper", parents=[common], help="re-verify the shipped computational claims")
    s.add_argument("--case", choices=list(CASES))
    s.add_argument("--data-dir", help="read data files from here instead")
    s.set_defaults(func=cmd_paper)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"ncsos: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"ncsos: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
