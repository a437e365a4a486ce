"""End-to-end search for exact membership or nonmembership certificates.

The float SDP only proposes; every emitted object is checked exactly.
When the Gram problem has no strictly feasible point (the usual case for
``S_{m,k}(X^2, Y^2)``), rounding cannot land in the feasible set, so the
basis is first restricted to the minimal face: directions that every
feasible Gram matrix annihilates are detected numerically, rounded to
small rationals and removed, which turns basis entries into polynomials.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certificate import PLAIN, SQUARES, Certificate, Nonmembership, verify_certificate, verify_nonmembership
from .exact import (RatMatrix, default_denominators, nullspace_exact, project_affine_exact,
                    psd_check_exact, rationalize, rationalize_scalar)
from .gram import (THETA2, GramBasis, assemble, build_basis, general_basis, max_lambda_min_problem,
                   recover_max_lambda_min)
from .ncpoly import Poly
from .sdp import SdpProblem, SdpSolution, Status, solve_sdp
from .smk import s_mk_squares

log = logging.getLogger(__name__)


@dataclass
class CertifyOptions:
    feas_tol: float = 1e-8
    max_iter: int = 200
    max_den: int = 10 ** 6
    denominators: Sequence[int] | None = None
    max_face_rounds: int = 12
    # reducing directions are cut at the widest spectral gap above this level
    face_eig_floor: float = 1e-3
    face_max_den: int = 100
    face_round_tol: float = 1e-2
    # a max-lambda_min value below this counts as "no interior"
    interior_tol: float = 1e-7

    def __post_init__(self):
        if self.feas_tol <= 0 or self.max_iter <= 0 or self.max_den < 1:
            raise ValueError("tolerances and limits must be positive")

    def sweep(self) -> list[int]:
        return list(self.denominators) if self.denominators else default_denominators(self.max_den)


@dataclass
class Inconclusive:
    m: int
    k: int
    reason: str
    solution: SdpSolution | None = None
    log: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return False


Outcome = Certificate | Nonmembership | Inconclusive


# ---------------------------------------------------------------------------
# rounding helpers

def _round_vector(v: np.ndarray, max_den: int) -> list[Fraction]:
    return [rationalize_scalar(float(x), max_den) for x in v]


def _rref_complete_pivot(R: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Float RREF choosing the largest remaining entry as pivot."""
    R = np.array(R, dtype=float)
    r = R.shape[0]
    row = 0
    for _ in range(r):
        sub = np.abs(R[row:])
        if sub.size == 0:
            break
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] < tol:
            break
        i += row
        R[[row, i]] = R[[i, row]]
        R[row] /= R[row, j]
        for t in range(r):
            if t != row:
                R[t] -= R[t, j] * R[row]
        row += 1
    return R[:row]


def round_subspace(R: np.ndarray, max_den: int, tol: float) -> list[list[Fraction]] | None:
    """Rational rows spanning (approximately) the row space of ``R``."""
    if R.shape[0] == 0:
        return []
    E = _rref_complete_pivot(R)
    best = None
    for den in default_denominators(max_den) + ([max_den] if max_den not in default_denominators(max_den) else []):
        rows = [[rationalize_scalar(x, den) for x in row] for row in E]
        err = max(abs(float(q) - x) for row, erow in zip(rows, E) for q, x in zip(row, erow))
        if err <= tol:
            best = rows
            break
    return best


# ---------------------------------------------------------------------------
# facial reduction

def _reduce_basis(basis: GramBasis, kernels: list[list[list[Fraction]]]) -> GramBasis:
    """Replace block ``i`` by ``U^T v`` with ``U`` spanning the nullspace of ``kernels[i]``."""
    blocks = []
    for vec, K in zip(basis.blocks, kernels):
        if not K:
            blocks.append(list(vec))
            continue
        U = nullspace_exact(K, len(vec))
        new = []
        for u in U:
            p = Poly()
            for c, q in zip(u, vec):
                if c:
                    p = p + q * c
            new.append(p)
        blocks.append(new)
    keep = [i for i, b in enumerate(blocks) if b]
    return GramBasis([blocks[i] for i in keep], [basis.labels[i] for i in keep])


def _gap_cut(eigs: list[np.ndarray], floor: float) -> float:
    """Threshold at the widest (log-scale) gap of the pooled spectrum above ``floor``."""
    vals = sorted((float(v) for ev in eigs for v in ev if v > 1e-12), reverse=True)
    best, cut = 0.0, vals[0] / 2 if vals else 1.0
    for hi, lo in zip(vals, vals[1:]):
        if hi < floor:
            break
        ratio = hi / lo
        if ratio > best:
            best, cut = ratio, np.sqrt(hi * lo)
    if vals and vals[-1] >= floor and (len(vals) == 1 or best < 100):
        # no clear gap: everything above the floor counts
        cut = min(cut, vals[-1] / 2)
    return cut


def _directions_from_dual(problem: SdpProblem, sol: SdpSolution, opts: CertifyOptions):
    """Dominant range of ``-sum y_l A_l`` from a stalled run, per block."""
    if sol.y is None:
        return None
    Z = problem.adjoint(-np.asarray(sol.y, dtype=float))
    top = max((np.linalg.eigvalsh(z)[-1] for z in Z if z.size), default=0.0)
    if top <= 0:
        return None
    decomp = [np.linalg.eigh(z / top) if z.size else (np.zeros(0), np.zeros((0, 0))) for z in Z]
    cut = _gap_cut([ev for ev, _ in decomp], opts.face_eig_floor)
    return [V[:, ev > cut].T for ev, V in decomp]


def _directions_from_primal(blocks: Sequence[np.ndarray], opts: CertifyOptions):
    """Near-kernel of a maximal-rank feasible point, per block."""
    top = max((np.linalg.eigvalsh(G)[-1] for G in blocks if G.size), default=0.0)
    if top <= 0:
        return None
    out = []
    for G in blocks:
        ev, V = np.linalg.eigh(G / top)
        out.append(V[:, ev < 1e-6].T)
    return out


def _round_directions(dirs, opts: CertifyOptions):
    kernels = []
    for D in dirs:
        if D.shape[0] == 0:
            kernels.append([])
            continue
        K = round_subspace(D, opts.face_max_den, opts.face_round_tol)
        if K is None:
            return None
        kernels.append(K)
    if not any(kernels):
        return None
    return kernels


# ---------------------------------------------------------------------------
# exact rounding of solutions

def round_feasible(problem: SdpProblem, blocks: Sequence[np.ndarray], opts: CertifyOptions
                   ) -> list[RatMatrix] | None:
    """Rationalize, project exactly onto the constraints and test PSD."""
    for den in opts.sweep():
        try:
            P = project_affine_exact([rationalize(G, den) for G in blocks], problem)
        except ValueError:
            return None
        if all(psd_check_exact(Pb) for Pb in P):
            log.info("rounded at max denominator %d", den)
            return P
    return None


def round_farkas(problem: SdpProblem, y: np.ndarray, opts: CertifyOptions) -> dict | None:
    """Exact Farkas vector near ``y`` (normalized to ``b^T y = -1``), or None."""
    b = np.array([float(v) for v in problem.rhs])
    by = float(b @ y)
    if by >= 0:
        return None
    y = y / -by
    for den in opts.sweep():
        yq = _round_vector(y, den)
        by_q = sum((Fraction(bv) * yv for bv, yv in zip(problem.rhs, yq)), Fraction(0))
        if not by_q < 0:
            continue
        mats = [[[Fraction(0)] * n for _ in range(n)] for n in problem.block_sizes]
        for l, yl in enumerate(yq):
            if not yl:
                continue
            for blk, i, j, v in problem.constraints[l]:
                mats[blk][i][j] += yl * v
                if i != j:
                    mats[blk][j][i] += yl * v
        if all(psd_check_exact(m) for m in mats):
            return {problem.keys[l]: yl for l, yl in enumerate(yq) if yl}
    return None


# ---------------------------------------------------------------------------
# pipeline

def certify_target(target: Poly, basis: GramBasis, mode: str = THETA2, m: int = 0, k: int = 0,
                   substitution: str = SQUARES, opts: CertifyOptions | None = None,
                   explicit_target: bool = False) -> Outcome:
    """Search for an exact certificate for ``target`` on ``basis``."""
    opts = opts or CertifyOptions()
    notes: list[str] = []
    tgt = target if explicit_target else None
    prob = assemble(target, basis, mode)
    sol = solve_sdp(prob, feas_tol=opts.feas_tol, max_iter=opts.max_iter)
    notes.append(f"sizes {basis.sizes}: {sol.status.value} ({sol.message})")

    if sol.status is Status.INFEASIBLE:
        y = round_farkas(prob, np.asarray(sol.farkas_y, dtype=float), opts)
        if y is not None:
            nm = Nonmembership(m, k, basis, y, substitution, mode, tgt)
            if verify_nonmembership(nm).passed:
                return nm
        return Inconclusive(m, k, "infeasible numerically but no exact Farkas certificate", sol, notes)

    current, cur_prob, cur_sol = basis, prob, sol
    for _ in range(opts.max_face_rounds + 1):
        if cur_sol.status is Status.FEASIBLE:
            tr = sum(float(np.trace(G)) for G in cur_sol.blocks)
            aux = max_lambda_min_problem(cur_prob, max(1.0, 2.0 * tr))
            asol = solve_sdp(aux, feas_tol=opts.feas_tol, max_iter=opts.max_iter)
            if asol.status is Status.FEASIBLE:
                G, t = recover_max_lambda_min(cur_prob, asol.blocks)
            else:
                G, t = cur_sol.blocks, min(cur_sol.min_eigenvalues(), default=0.0)
            notes.append(f"sizes {current.sizes}: max lambda_min {t:.3e}")
            if t > opts.interior_tol:
                exact = round_feasible(cur_prob, G, opts)
                if exact is not None:
                    cert = Certificate(m, k, substitution,
                                       [(list(v), Gq) for v, Gq in zip(current.blocks, exact)],
                                       target=tgt, mode=mode)
                    if verify_certificate(cert).passed:
                        return cert
                    notes.append("rounded certificate failed verification")
                notes.append("rounding failed")
                dirs = None
            else:
                dirs = _directions_from_primal(G, opts)
        elif cur_sol.status is Status.INCONCLUSIVE:
            dirs = _directions_from_dual(cur_prob, cur_sol, opts)
        else:
            notes.append("reduced problem infeasible; face guess was wrong")
            break
        if dirs is None:
            break
        kernels = _round_directions(dirs, opts)
        if kernels is None:
            notes.append("could not round the reducing directions")
            break
        new_basis = _reduce_basis(current, kernels)
        if not new_basis.blocks:
            notes.append("facial reduction removed every direction")
            break
        current = new_basis
        cur_prob = assemble(target, current, mode)
        cur_sol = solve_sdp(cur_prob, feas_tol=opts.feas_tol, max_iter=opts.max_iter)
        notes.append(f"reduced sizes {current.sizes}: {cur_sol.status.value} ({cur_sol.message})")
    return Inconclusive(m, k, "no exact certificate found", cur_sol, notes)


def certify(m: int, k: int, opts: CertifyOptions | None = None) -> Outcome:
    """Decide ``S_{m,k}(X^2, Y^2)`` in the cyclic cone with an exact certificate."""
    if not (1 <= k <= m - 1):
        raise ValueError(f"need 1 <= k <= m-1, got m={m}, k={k}")
    return certify_target(s_mk_squares(m, k), build_basis(m, k), THETA2, m, k, SQUARES, opts)


def check_poly(f: Poly, mode: str = THETA2, opts: CertifyOptions | None = None,
               basis: GramBasis | None = None) -> Outcome:
    """Membership of an arbitrary symmetric polynomial in the chosen cone."""
    basis = basis or general_basis(f, mode)
    return certify_target(f, basis, mode, 0, 0, PLAIN, opts, explicit_target=True)
