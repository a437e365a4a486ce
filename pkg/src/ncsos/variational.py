"""Gradients, Lagrange conditions and a sphere-constrained minimizer for
``tr S_{m,k}(A^2, B^2)`` over symmetric matrices of unit Hilbert-Schmidt norm."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .smk import _check_pair, hs_norm, smk_table

ARMIJO_C = 1e-4
BACKTRACK = 0.5
INITIAL_STEP = 1.0


def _objective_parts(A: np.ndarray, B: np.ndarray, m: int, k: int):
    """``tr S_{m,k}(A^2,B^2)``, ``S_{m-1,k}(A^2,B^2)`` and ``S_{m-1,k-1}(A^2,B^2)``."""
    A2, B2 = A @ A, B @ B
    T = smk_table(A2, B2, m, k)
    n = A.shape[0]
    zero = np.zeros((n, n))
    value = float(np.trace(T[m][k]))
    s_a = T[m - 1][k] if m >= 1 and k <= m - 1 else zero
    s_b = T[m - 1][k - 1] if m >= 1 and k >= 1 else zero
    return value, s_a, s_b


def _validate(m: int, k: int) -> None:
    if m < 0 or not (0 <= k <= m):
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")


def trace_objective(A: np.ndarray, B: np.ndarray, m: int, k: int) -> float:
    A, B = _check_pair(A, B)
    _validate(m, k)
    return _objective_parts(A, B, m, k)[0]


def grad_trace(A: np.ndarray, B: np.ndarray, m: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean gradients of ``tr S_{m,k}(A^2, B^2)`` in ``A`` and ``B``.

    ``gradA = m (A S + S A)`` with ``S = S_{m-1,k}(A^2,B^2)`` and
    ``gradB = m (B T + T B)`` with ``T = S_{m-1,k-1}(A^2,B^2)``.
    """
    A, B = _check_pair(A, B)
    _validate(m, k)
    _, s_a, s_b = _objective_parts(A, B, m, k)
    return m * (A @ s_a + s_a @ A), m * (B @ s_b + s_b @ B)


def lagrange_residuals(A: np.ndarray, B: np.ndarray, m: int, k: int) -> tuple[float, float]:
    """HS norms of ``A S_{m-1,k} - ((m-k)/m) tr(S_{m,k}) A`` and the ``B`` analogue."""
    A, B = _check_pair(A, B)
    _validate(m, k)
    if m == 0:
        return 0.0, 0.0
    value, s_a, s_b = _objective_parts(A, B, m, k)
    r1 = hs_norm(A @ s_a - (m - k) / m * value * A)
    r2 = hs_norm(B @ s_b - k / m * value * B)
    return r1, r2


def commutator_norm(A: np.ndarray, B: np.ndarray, m: int, k: int) -> float:
    """``||[A, S_{m-1,k}(A^2,B^2)]||_HS``."""
    A, B = _check_pair(A, B)
    _, s_a, _ = _objective_parts(A, B, m, k)
    return hs_norm(A @ s_a - s_a @ A)


@dataclass
class MinimizerState:
    A: np.ndarray
    B: np.ndarray
    value: float
    iterations: int
    grad_norm_a: float
    grad_norm_b: float
    mode: str = "symmetric"
    seed: int = 0
    history: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def grad_norm(self) -> float:
        return float(np.hypot(self.grad_norm_a, self.grad_norm_b))


def _normalize(A: np.ndarray) -> np.ndarray:
    nrm = hs_norm(A)
    if nrm == 0:
        raise FloatingPointError("matrix collapsed to zero")
    return A / nrm


def _sym(A: np.ndarray) -> np.ndarray:
    return (A + A.T) / 2


def _tangent(G: np.ndarray, A: np.ndarray) -> np.ndarray:
    return G - float(np.sum(G * A)) * A


class _SymmetricProblem:
    """Variables are A, B themselves; retraction is renormalization."""

    def __init__(self, m, k):
        self.m, self.k = m, k

    def start(self, rng, n):
        return [_normalize(_sym(rng.standard_normal((n, n)))),
                _normalize(_sym(rng.standard_normal((n, n))))]

    def matrices(self, x):
        return x[0], x[1]

    def value_grad(self, x):
        A, B = x
        gA, gB = grad_trace(A, B, self.m, self.k)
        v = trace_objective(A, B, self.m, self.k)
        return v, [_tangent(_sym(gA), A), _tangent(_sym(gB), B)]

    def value(self, x):
        return trace_objective(x[0], x[1], self.m, self.k)

    def retract(self, x, d, t):
        return [_normalize(_sym(xi - t * di)) for xi, di in zip(x, d)]


class _PsdProblem:
    """Variables M, N with A = M^T M / ||M^T M||, B likewise."""

    def __init__(self, m, k):
        self.m, self.k = m, k

    def start(self, rng, n):
        return [self._scale(rng.standard_normal((n, n))), self._scale(rng.standard_normal((n, n)))]

    @staticmethod
    def _scale(M):
        return M / np.sqrt(hs_norm(M.T @ M))

    def matrices(self, x):
        return [_normalize(_sym(M.T @ M)) for M in x]

    def value(self, x):
        A, B = self.matrices(x)
        return trace_objective(A, B, self.m, self.k)

    def value_grad(self, x):
        m, k = self.m, self.k
        P, Q = (_sym(M.T @ M) for M in x)
        nP, nQ = hs_norm(P), hs_norm(Q)
        A, B = P / nP, Q / nQ
        v = trace_objective(A, B, m, k)
        gA, gB = grad_trace(A, B, m, k)
        # f(P/|P|, Q/|Q|) = f(P,Q) / (|P|^{2(m-k)} |Q|^{2k}); differentiate the quotient
        gP = (_sym(gA) - 2 * (m - k) * v * A) / nP
        gQ = (_sym(gB) - 2 * k * v * B) / nQ
        return v, [2 * x[0] @ gP, 2 * x[1] @ gQ]

    def retract(self, x, d, t):
        return [self._scale(xi - t * di) for xi, di in zip(x, d)]


def minimize_sphere(m: int, k: int, n: int, seed: int = 0, max_iter: int = 2000, psd: bool = False,
                    tol: float = 1e-10) -> MinimizerState:
    """Projected gradient descent with Armijo backtracking on the HS unit spheres.

    ``psd=True`` searches over PSD ``A, B`` through square-root factors.
    Accepted steps never increase the objective; the returned state is the
    last (hence best) iterate.
    """
    _validate(m, k)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    prob = _PsdProblem(m, k) if psd else _SymmetricProblem(m, k)
    x = prob.start(rng, n)
    v, g = prob.value_grad(x)
    history = [v]
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        gnorm2 = sum(float(np.sum(gi * gi)) for gi in g)
        if gnorm2 <= tol ** 2:
            converged = True
            break
        t = INITIAL_STEP
        while True:
            x_new = prob.retract(x, g, t)
            v_new = prob.value(x_new)
            if v_new <= v - ARMIJO_C * t * gnorm2:
                break
            t *= BACKTRACK
            if t < 1e-16:
                x_new = None
                break
        if x_new is None:
            converged = True
            break
        x = x_new
        v, g = prob.value_grad(x)
        history.append(v)
    A, B = prob.matrices(x)
    gA, gB = grad_trace(A, B, m, k)
    return MinimizerState(A, B, v, it, hs_norm(_tangent(_sym(gA), A)), hs_norm(_tangent(_sym(gB), B)),
                          "psd" if psd else "symmetric", seed, history, converged)


def search(m: int, k: int, n: int, seed: int = 0, restarts: int = 1, max_iter: int = 2000,
           psd: bool = False) -> MinimizerState:
    """Best of ``restarts`` runs with seeds ``seed, seed+1, ...``."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    best = None
    for r in range(restarts):
        st = minimize_sphere(m, k, n, seed + r, max_iter, psd)
        if best is None or st.value < best.value:
            best = st
    return best
