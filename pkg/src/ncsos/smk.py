"""BMV word sums and their evaluation on symmetric matrices."""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from .ncpoly import Poly, squares_substitution


def s_mk(m: int, k: int) -> Poly:
    """Sum of all words of length ``m`` containing exactly ``k`` letters Y."""
    if m < 0 or k < 0 or k > m:
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")
    terms = {}
    for pos in combinations(range(m), k):
        letters = ["X"] * m
        for p in pos:
            letters[p] = "Y"
        terms["".join(letters)] = 1
    return Poly(terms)


def s_mk_squares(m: int, k: int) -> Poly:
    """``S_{m,k}(X^2, Y^2)``."""
    return squares_substitution(s_mk(m, k))


def _check_pair(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if B.shape != A.shape:
        raise ValueError(f"dimension mismatch: A is {A.shape}, B is {B.shape}")
    return A, B


def eval_poly(f: Poly, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` at ``X = A``, ``Y = B``."""
    A, B = _check_pair(A, B)
    n = A.shape[0]
    letter = {"X": A, "Y": B}
    prefix: dict[str, np.ndarray] = {"": np.eye(n)}

    def value(w: str) -> np.ndarray:
        # shared prefixes are common in word sums, so memoize them
        v = prefix.get(w)
        if v is None:
            v = value(w[:-1]) @ letter[w[-1]]
            prefix[w] = v
        return v

    out = np.zeros((n, n))
    for w, c in f.items():
        out += float(c) * value(w)
    return out


def smk_table(A: np.ndarray, B: np.ndarray, m: int, k: int) -> list[list[np.ndarray]]:
    """All ``S_{j,i}(A, B)`` for ``j <= m`` and ``i <= min(j, k)``.

    Uses ``S_{j,i} = A S_{j-1,i} + B S_{j-1,i-1}``; entry ``[j][i]`` is the
    matrix value (zero when ``i > j``).
    """
    A, B = _check_pair(A, B)
    n = A.shape[0]
    zero = np.zeros((n, n))
    T = [[zero] * (k + 1) for _ in range(m + 1)]
    T[0][0] = np.eye(n)
    for j in range(1, m + 1):
        for i in range(0, min(j, k) + 1):
            acc = A @ T[j - 1][i] if i <= j - 1 else zero.copy()
            if i >= 1:
                acc = acc + B @ T[j - 1][i - 1]
            T[j][i] = acc
    return T


def eval_smk(A: np.ndarray, B: np.ndarray, m: int, k: int) -> np.ndarray:
    if m < 0 or k < 0 or k > m:
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")
    return smk_table(A, B, m, k)[m][k]


def trace_smk(A: np.ndarray, B: np.ndarray, m: int, k: int) -> float:
    """``tr S_{m,k}(A, B)``: the coefficient of ``t^k`` in ``tr (A + tB)^m``."""
    return float(np.trace(eval_smk(A, B, m, k)))


def random_psd(n: int, seed: int) -> np.ndarray:
    """``M^T M`` for a Gaussian ``n x n`` matrix ``M`` drawn from ``seed``."""
    if n <= 0:
        raise ValueError("n must be positive")
    M = np.random.default_rng(seed).standard_normal((n, n))
    P = M.T @ M
    return (P + P.T) / 2


def random_symmetric(n: int, seed: int) -> np.ndarray:
    if n <= 0:
        raise ValueError("n must be positive")
    M = np.random.default_rng(seed).standard_normal((n, n))
    return (M + M.T) / 2


def hs_norm(A: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.asarray(A) ** 2)))


def n_words(m: int, k: int) -> int:
    return comb(m, k)
