"""Dense block-diagonal SDP solver.

Solves the primal/dual pair

    minimize  <C, G>            maximize  b'y
    s.t.      <A_l, G> = b_l    s.t.      C - sum_l y_l A_l = S >= 0
              G >= 0

with a primal-dual interior-point method applied to the homogeneous
self-dual embedding, Nesterov-Todd scaling and a Mehrotra predictor-corrector.
The embedding makes infeasibility a regular outcome: when the primal has no
solution the iterates converge to a Farkas vector ``y`` with
``sum_l y_l A_l >= 0`` and ``b'y < 0``.

Problems are stored sparsely with exact (or float) numbers so that the same
object feeds the float solver and the exact-arithmetic post-processing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

# (block, row, col, value) with row <= col; the entry is mirrored to (col, row)
Entry = tuple[int, int, int, "float | Fraction"]


class Status(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class SdpProblem:
    """``<A_l, G> = b_l`` over block-diagonal symmetric ``G``.

    ``objective`` uses the same sparse entry format; ``None`` means the
    identity, i.e. minimize the trace of ``G``.
    """

    block_sizes: list[int]
    constraints: list[list[Entry]]
    rhs: list
    keys: list[Hashable] = field(default_factory=list)
    objective: list[Entry] | None = None

    def __post_init__(self):
        if len(self.constraints) != len(self.rhs):
            raise ValueError("one right-hand side per constraint required")
        if not self.keys:
            self.keys = list(range(len(self.constraints)))
        for row in self.constraints:
            for blk, i, j, _ in row:
                if not (0 <= blk < len(self.block_sizes)):
                    raise ValueError(f"block index {blk} out of range")
                if not (0 <= i <= j < self.block_sizes[blk]):
                    raise ValueError(f"entry ({i}, {j}) invalid for block {blk}")

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def constraint_matrices(self, l: int, dtype=float) -> list[np.ndarray]:
        """Dense symmetric blocks of ``A_l``."""
        return _dense_blocks(self.constraints[l], self.block_sizes, dtype)

    def objective_matrices(self) -> list[np.ndarray]:
        if self.objective is None:
            return [np.eye(n) for n in self.block_sizes]
        return _dense_blocks(self.objective, self.block_sizes, float)

    def apply(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        """``(<A_l, G>)_l`` in floating point."""
        out = np.zeros(self.n_constraints)
        for l, row in enumerate(self.constraints):
            acc = 0.0
            for blk, i, j, v in row:
                acc += float(v) * (blocks[blk][i, j] if i == j else 2.0 * blocks[blk][i, j])
            out[l] = acc
        return out

    def adjoint(self, y: Sequence[float]) -> list[np.ndarray]:
        """``sum_l y_l A_l`` as dense blocks."""
        out = [np.zeros((n, n)) for n in self.block_sizes]
        for l, row in enumerate(self.constraints):
            yl = float(y[l])
            if yl == 0.0:
                continue
            for blk, i, j, v in row:
                out[blk][i, j] += yl * float(v)
                if i != j:
                    out[blk][j, i] += yl * float(v)
        return out


def _dense_blocks(entries, sizes, dtype):
    if dtype is float:
        out = [np.zeros((n, n)) for n in sizes]
    else:
        out = [np.full((n, n), Fraction(0), dtype=object) for n in sizes]
    for blk, i, j, v in entries:
        out[blk][i, j] += v
        if i != j:
            out[blk][j, i] += v
    return out


@dataclass
class SdpSolution:
    status: Status
    blocks: list[np.ndarray] | None = None
    y: np.ndarray | None = None
    dual_slack: list[np.ndarray] | None = None
    primal_objective: float | None = None
    dual_objective: float | None = None
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    gap: float = float("nan")
    iterations: int = 0
    farkas_y: np.ndarray | None = None
    farkas_margin: float | None = None
    farkas_min_eig: float | None = None
    message: str = ""
    tau: float | None = None
    kappa: float | None = None

    def min_eigenvalues(self) -> list[float]:
        if self.blocks is None:
            return []
        return [float(np.linalg.eigvalsh(G)[0]) if G.size else 0.0 for G in self.blocks]

    def ranks(self, tol: float = 1e-6) -> list[int]:
        """Numerical rank of each block, relative to its largest eigenvalue."""
        out = []
        for G in self.blocks or []:
            ev = np.linalg.eigvalsh(G)
            top = max(ev[-1], 1e-300) if ev.size else 1.0
            out.append(int(np.sum(ev > tol * top)))
        return out


# ---------------------------------------------------------------------------
# svec machinery

class _Blocks:
    """Index bookkeeping for the svec representation of a block diagonal matrix."""

    def __init__(self, sizes: Sequence[int]):
        self.sizes = list(sizes)
        self.tri = []
        self.offsets = []
        off = 0
        for n in self.sizes:
            I, J = np.triu_indices(n)
            s = np.where(I == J, 1.0, np.sqrt(2.0))
            self.tri.append((I, J, s))
            self.offsets.append(off)
            off += len(I)
        self.dim = off

    def svec(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        out = np.empty(self.dim)
        for (I, J, s), off, B in zip(self.tri, self.offsets, blocks):
            out[off:off + len(I)] = s * B[I, J]
        return out

    def smat(self, v: np.ndarray) -> list[np.ndarray]:
        out = []
        for (I, J, s), off, n in zip(self.tri, self.offsets, self.sizes):
            B = np.zeros((n, n))
            vals = v[off:off + len(I)] / s
            B[I, J] = vals
            B[J, I] = vals
            out.append(B)
        return out

    def slices(self):
        for (I, J, s), off in zip(self.tri, self.offsets):
            yield slice(off, off + len(I))

    def sym_kron(self, b: int, W: np.ndarray) -> np.ndarray:
        """Matrix of ``Z -> W Z W`` in svec coordinates of block ``b``."""
        I, J, s = self.tri[b]
        half = np.where(I == J, 0.5, 1.0)
        K = W[np.ix_(I, I)] * W[np.ix_(J, J)] + W[np.ix_(I, J)] * W[np.ix_(J, I)]
        return K * (s[:, None] / s[None, :]) * half[None, :]


def _sparse_to_svec(entries, layout: _Blocks) -> np.ndarray:
    v = np.zeros(layout.dim)
    for blk, i, j, val in entries:
        I, J, s = layout.tri[blk]
        n = layout.sizes[blk]
        # row-major upper triangle position of (i, j)
        pos = i * n - i * (i - 1) // 2 + (j - i)
        v[layout.offsets[blk] + pos] += float(val) * (1.0 if i == j else np.sqrt(2.0))
    return v


def _inner(A: Sequence[np.ndarray], B: Sequence[np.ndarray]) -> float:
    return float(sum(np.sum(a * b) for a, b in zip(A, B)))


def _max_step(lam: np.ndarray, D: np.ndarray) -> float:
    """Largest ``a`` with ``diag(lam) + a D >= 0`` (``inf`` if unbounded)."""
    if D.size == 0:
        return np.inf
    r = 1.0 / np.sqrt(lam)
    ev = np.linalg.eigvalsh(-(r[:, None] * D * r[None, :]))[-1]
    return 1.0 / ev if ev > 0 else np.inf


# ---------------------------------------------------------------------------

def _farkas_from_range(Amat: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Farkas vector when ``Amat x = b`` has no solution at all."""
    U, sv, _ = np.linalg.svd(Amat, full_matrices=True)
    tol = max(Amat.shape) * np.finfo(float).eps * (sv[0] if sv.size else 1.0)
    r = int(np.sum(sv > tol))
    Ur = U[:, :r]
    resid = b - Ur @ (Ur.T @ b)
    nr = float(resid @ resid)
    if nr <= 1e-18 * max(1.0, float(b @ b)):
        return None
    return -resid / nr


def solve_sdp(
    problem: SdpProblem,
    feas_tol: float = 1e-8,
    gap_tol: float = 1e-8,
    max_iter: int = 200,
    step_fraction: float = 0.98,
) -> SdpSolution:
    """Solve ``problem``; see module docstring for the conventions.

    Returns a Feasible solution only when the scaled primal residual and the
    relative duality gap are below the tolerances.  Numerical breakdowns are
    reported as Inconclusive.
    """
    layout = _Blocks(problem.block_sizes)
    Mfull = problem.n_constraints
    Afull = np.zeros((Mfull, layout.dim))
    for l, row in enumerate(problem.constraints):
        Afull[l] = _sparse_to_svec(row, layout)
    bfull = np.array([float(v) for v in problem.rhs])
    cvec = _sparse_to_svec(problem.objective, layout) if problem.objective is not None \
        else layout.svec([np.eye(n) for n in layout.sizes])

    # rank reduction; an inconsistent system is infeasible before any cone enters
    if Mfull:
        y_lin = _farkas_from_range(Afull, bfull)
        if y_lin is not None:
            return _infeasible(problem, y_lin, 0, "linear constraints inconsistent")
        _, Rq, piv = sla.qr(Afull.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(Rq)) if Rq.size else np.zeros(0)
        tol = max(Afull.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0)
        keep = np.sort(piv[: int(np.sum(diag > max(tol, 1e-12)))])
    else:
        keep = np.zeros(0, dtype=int)
    A = Afull[keep]
    b = bfull[keep]
    M = len(keep)
    nu = sum(layout.sizes)

    C = layout.smat(cvec)
    nb = len(layout.sizes)
    X = [np.eye(n) for n in layout.sizes]
    S = [np.eye(n) for n in layout.sizes]
    y = np.zeros(M)
    tau, kappa = 1.0, 1.0
    bnorm = max(1.0, float(np.linalg.norm(b)))
    cnorm = max(1.0, float(np.linalg.norm(cvec)))
    A_blocks = [A[:, sl] for sl in layout.slices()]

    sol = SdpSolution(Status.INCONCLUSIVE, message="maximum iterations reached")
    it = 0
    for it in range(max_iter + 1):
        x = layout.svec(X)
        s = layout.svec(S)
        r_p = b * tau - A @ x
        r_d = cvec * tau - A.T @ y - s
        cx = float(cvec @ x)
        by = float(b @ y)
        r_g = cx - by + kappa
        mu = (float(x @ s) + tau * kappa) / (nu + 1)

        pres = np.linalg.norm(r_p) / tau / bnorm
        dres = np.linalg.norm(r_d) / tau / cnorm
        pcost, dcost = cx / tau, by / tau
        gap = abs(pcost - dcost)
        relgap = gap / max(1.0, abs(pcost))
        log.debug("it %d pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e mu %.2e",
                  it, pres, dres, gap, tau, kappa, mu)

        if pres <= feas_tol and dres <= feas_tol and min(gap, relgap) <= gap_tol:
            G = [Xi / tau for Xi in X]
            yy = np.zeros(Mfull)
            yy[keep] = y / tau
            resid = float(np.linalg.norm(problem.apply(G) - bfull)) / max(1.0, float(np.linalg.norm(bfull)))
            return SdpSolution(
                Status.FEASIBLE, blocks=G, y=yy, dual_slack=[Si / tau for Si in S],
                primal_objective=pcost, dual_objective=dcost, primal_residual=resid,
                dual_residual=dres, gap=gap, iterations=it, message="optimal")
        if by > 0:
            # candidate primal infeasibility certificate
            pinf = np.linalg.norm(A.T @ y + s) / by
            if pinf <= feas_tol * cnorm:
                yy = np.zeros(Mfull)
                yy[keep] = -y / by
                return _infeasible(problem, yy, it, "primal infeasible")
        if cx < 0:
            dinf = np.linalg.norm(A @ x) / (-cx)
            if dinf <= feas_tol * bnorm:
                return SdpSolution(Status.INCONCLUSIVE, iterations=it,
                                   message="dual infeasible (objective unbounded below)")
        if it == max_iter:
            break

        # Nesterov-Todd scaling: R' S R = R^{-1} X R^{-T} = diag(lam)
        try:
            R, lam = [], []
            for Xi, Si in zip(X, S):
                Lx = np.linalg.cholesky(Xi)
                Ls = np.linalg.cholesky(Si)
                _, sv, Vt = np.linalg.svd(Ls.T @ Lx)
                R.append(Lx @ Vt.T / np.sqrt(sv)[None, :])
                lam.append(sv)
        except np.linalg.LinAlgError:
            sol.message = "loss of positive definiteness in iterates"
            break
        W = [Ri @ Ri.T for Ri in R]

        Mschur = np.zeros((M, M))
        for bi in range(nb):
            Ab = A_blocks[bi]
            if Ab.shape[1]:
                Mschur += Ab @ layout.sym_kron(bi, W[bi]) @ Ab.T
        try:
            chol = sla.cho_factor(Mschur + 1e-14 * np.trace(Mschur) / max(M, 1) * np.eye(M)) if M else None
        except np.linalg.LinAlgError:
            sol.message = "Schur complement not positive definite"
            break

        WCW = [Wi @ Ci @ Wi for Wi, Ci in zip(W, C)]
        g = A @ layout.svec(WCW)
        cwc = _inner(C, WCW)
        Rd = layout.smat(r_d)
        WRdW = [Wi @ Ri @ Wi for Wi, Ri in zip(W, Rd)]
        a_wrdw = A @ layout.svec(WRdW)
        c_wrdw = _inner(C, WRdW)

        def msolve(v):
            return sla.cho_solve(chol, v) if M else np.zeros(0)

        q = msolve(g + b)
        bg = b - g
        denom = float(bg @ q) + cwc + kappa / tau

        def direction(rc: list[np.ndarray], rc_tau: float, eta: float):
            T = [2.0 * rc_i / (l_i[:, None] + l_i[None, :]) for rc_i, l_i in zip(rc, lam)]
            RTR = [Ri @ Ti @ Ri.T for Ri, Ti in zip(R, T)]
            r1 = eta * r_p - A @ layout.svec(RTR) + eta * a_wrdw
            r2 = eta * r_g + _inner(C, RTR) - eta * c_wrdw + rc_tau / tau
            p = msolve(r1)
            dtau = (r2 - float(bg @ p)) / denom
            dy = p + q * dtau
            dS = [eta * Rdi - Ai + Ci * dtau
                  for Rdi, Ai, Ci in zip(Rd, layout.smat(A.T @ dy), C)]
            dSt = [Ri.T @ dSi @ Ri for Ri, dSi in zip(R, dS)]
            dXt = [Ti - dSti for Ti, dSti in zip(T, dSt)]
            dX = [Ri @ dXti @ Ri.T for Ri, dXti in zip(R, dXt)]
            dkappa = (rc_tau - kappa * dtau) / tau
            return dX, dy, dS, dtau, dkappa, dXt, dSt

        def steplen(dXt, dSt, dtau, dkappa):
            a = np.inf
            for l_i, dx, ds in zip(lam, dXt, dSt):
                a = min(a, _max_step(l_i, _sym(dx)), _max_step(l_i, _sym(ds)))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        # predictor
        rc_aff = [-np.diag(l_i ** 2) for l_i in lam]
        dX, dy, dS, dtau, dkappa, dXt, dSt = direction(rc_aff, -tau * kappa, 1.0)
        a_aff = min(1.0, steplen(dXt, dSt, dtau, dkappa))
        mu_aff = (_inner([Xi + a_aff * d for Xi, d in zip(X, dX)],
                         [Si + a_aff * d for Si, d in zip(S, dS)]) +
                  (tau + a_aff * dtau) * (kappa + a_aff * dkappa)) / (nu + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        rc = [sigma * mu * np.eye(len(l_i)) - np.diag(l_i ** 2) - 0.5 * (a @ c + c @ a)
              for l_i, a, c in zip(lam, dXt, dSt)]
        rc_tau = sigma * mu - tau * kappa - dtau * dkappa
        dX, dy, dS, dtau, dkappa, dXt, dSt = direction(rc, rc_tau, 1.0 - sigma)
        alpha = min(1.0, step_fraction * steplen(dXt, dSt, dtau, dkappa))
        if not np.isfinite(alpha) or alpha < 1e-12:
            sol.message = "step length underflow"
            break

        X = [_sym(Xi + alpha * d) for Xi, d in zip(X, dX)]
        S = [_sym(Si + alpha * d) for Si, d in zip(S, dS)]
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa

    sol.iterations = it
    # the last iterate is kept for diagnostics and facial reduction
    yy = np.zeros(Mfull)
    yy[keep] = y
    sol.blocks = [Xi / tau for Xi in X]
    sol.dual_slack = list(S)
    sol.y = yy
    sol.tau, sol.kappa = tau, kappa
    sol.primal_residual = float(pres)
    sol.dual_residual = float(dres)
    sol.gap = float(gap)
    return sol


def _sym(A: np.ndarray) -> np.ndarray:
    return (A + A.T) / 2


def _infeasible(problem: SdpProblem, y: np.ndarray, it: int, msg: str) -> SdpSolution:
    blocks = problem.adjoint(y)
    min_eig = min((float(np.linalg.eigvalsh(Bk)[0]) for Bk in blocks if Bk.size), default=0.0)
    by = float(sum(float(v) * yi for v, yi in zip(problem.rhs, y)))
    return SdpSolution(Status.INFEASIBLE, iterations=it, farkas_y=y,
                       farkas_margin=-by, farkas_min_eig=min_eig, message=msg)


def farkas_check(problem: SdpProblem, y: Sequence[float], tol: float = 1e-9) -> tuple[bool, float, float]:
    """Float check of a Farkas vector: returns ``(ok, min_eig, b'y)``."""
    blocks = problem.adjoint(y)
    min_eig = min((float(np.linalg.eigvalsh(Bk)[0]) for Bk in blocks if Bk.size), default=0.0)
    by = float(sum(float(v) * float(yi) for v, yi in zip(problem.rhs, y)))
    return (min_eig >= -tol and by < 0), min_eig, by
