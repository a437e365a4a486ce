"""Exact rational linear algebra: PSD tests, characteristic polynomials,
rounding of float matrices and exact affine projection."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isfinite
from typing import Iterable, Sequence

import numpy as np

Q0 = Fraction(0)
Q1 = Fraction(1)


class RatMatrix:
    """Dense matrix of Fractions (row-major tuple of tuples)."""

    __slots__ = ("rows", "n_rows", "n_cols")

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(_to_fraction(x) for x in r) for r in rows)
        self.n_rows = len(self.rows)
        self.n_cols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != self.n_cols for r in self.rows):
            raise ValueError("ragged matrix")

    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "RatMatrix":
        return cls([[Q0] * (n if m is None else m) for _ in range(n)])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[Q1 if i == j else Q0 for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return self.n_rows

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def symmetric(self) -> bool:
        if self.n_rows != self.n_cols:
            return False
        return all(self.rows[i][j] == self.rows[j][i]
                   for i in range(self.n_rows) for j in range(i + 1, self.n_cols))

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"RatMatrix({[[str(x) for x in r] for r in self.rows]})"

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self.rows]

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows], dtype=float).reshape(self.shape)

    def transpose(self) -> "RatMatrix":
        return RatMatrix(zip(*self.rows)) if self.rows else RatMatrix([])

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        _same_shape(self, other)
        return RatMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        _same_shape(self, other)
        return RatMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def scale(self, c) -> "RatMatrix":
        c = _to_fraction(c)
        return RatMatrix([[c * a for a in r] for r in self.rows])

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.n_cols != other.n_rows:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.rows))
        return RatMatrix([[sum((a * b for a, b in zip(r, c) if a and b), Q0) for c in cols]
                          for r in self.rows])

    def quad(self, x: Sequence) -> Fraction:
        """``x^T Q x``."""
        return sum((xi * self.rows[i][j] * xj
                    for i, xi in enumerate(x) if xi
                    for j, xj in enumerate(x) if xj), Q0)

    def with_entry(self, i: int, j: int, value) -> "RatMatrix":
        rows = self.tolist()
        rows[i][j] = _to_fraction(value)
        return RatMatrix(rows)


def _same_shape(a: RatMatrix, b: RatMatrix) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        from .ncpoly import parse_rational
        return parse_rational(x)
    if isinstance(x, (float, np.floating)):
        if not isfinite(x):
            raise ValueError("non-finite entry")
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def as_ratmatrix(Q) -> RatMatrix:
    return Q if isinstance(Q, RatMatrix) else RatMatrix(Q)


# ---------------------------------------------------------------------------
# PSD test

@dataclass
class PsdProof:
    """``Q = P L D L^T P^T`` with unit lower ``L`` and ``D >= 0``.

    ``perm[i]`` is the original index placed at position ``i``.
    """

    perm: list[int]
    L: list[list[Fraction]]
    D: list[Fraction]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.D if d != 0)

    def reconstruct(self) -> RatMatrix:
        n = len(self.perm)
        out = [[Q0] * n for _ in range(n)]
        for a in range(n):
            for b in range(a, n):
                s = sum((self.L[a][t] * self.D[t] * self.L[b][t]
                         for t in range(min(a, b) + 1) if self.D[t]), Q0)
                i, j = self.perm[a], self.perm[b]
                out[i][j] = s
                out[j][i] = s
        return RatMatrix(out)

    def __bool__(self) -> bool:
        return True


@dataclass
class Witness:
    """Vector ``x`` with ``x^T Q x = value < 0``."""

    x: list[Fraction]
    value: Fraction

    def __bool__(self) -> bool:
        return False


def psd_check_exact(Q, verify: bool = True) -> PsdProof | Witness:
    """Decide ``Q >= 0`` exactly by pivoted LDL^T.

    The pivot is always the largest remaining diagonal entry of the Schur
    complement.  A negative diagonal entry, or a zero diagonal with a
    nonzero off-diagonal in its row, yields a witness vector.  Both results
    are re-checked by exact multiplication when ``verify`` is set.
    """
    Q = as_ratmatrix(Q)
    n = Q.n_rows
    if Q.n_rows != Q.n_cols:
        raise ValueError("matrix is not square")
    if not Q.symmetric:
        raise ValueError("matrix is not symmetric")
    S = [list(r) for r in Q.rows]  # Schur complement, updated in place on `rest`
    rest = list(range(n))
    perm: list[int] = []
    cols: list[dict[int, Fraction]] = []  # column t of L keyed by original index
    D: list[Fraction] = []

    def witness_from(z: dict[int, Fraction]) -> Witness:
        # x = [-A^{-1} B z; z] over the pivots processed so far
        x = [Q0] * n
        for i, v in z.items():
            x[i] = v
        # back substitution through L^T: the eliminated part solves L^T u = -(stuff)
        for t in range(len(perm) - 1, -1, -1):
            p = perm[t]
            s = sum((cols[t][i] * x[i] for i in cols[t] if i != p and x[i]), Q0)
            x[p] = -s
        return Witness(x, Q.quad(x))

    while rest:
        p = max(rest, key=lambda i: S[i][i])
        d = S[p][p]
        neg = [i for i in rest if S[i][i] < 0]
        if neg:
            w = witness_from({neg[0]: Q1})
            return _checked_witness(w, verify)
        if d == 0:
            for i in rest:
                for j in rest:
                    if i != j and S[i][j] != 0:
                        t = -(S[j][j] + 1) / (2 * S[i][j])
                        w = witness_from({i: t, j: Q1})
                        return _checked_witness(w, verify)
            for i in rest:
                perm.append(i)
                cols.append({i: Q1})
                D.append(Q0)
            break
        rest.remove(p)
        col = {p: Q1}
        for i in rest:
            if S[i][p]:
                col[i] = S[i][p] / d
        for i in rest:
            li = col.get(i)
            if not li:
                continue
            Si = S[i]
            for j in rest:
                lj = col.get(j)
                if lj:
                    Si[j] -= li * d * lj
        perm.append(p)
        cols.append(col)
        D.append(d)
    pos = {orig: a for a, orig in enumerate(perm)}
    L = [[Q0] * n for _ in range(n)]
    for t, col in enumerate(cols):
        for i, v in col.items():
            L[pos[i]][t] = v
    proof = PsdProof(perm, L, D)
    if verify and proof.reconstruct() != Q:
        raise ArithmeticError("LDL^T reconstruction mismatch")
    return proof


def _checked_witness(w: Witness, verify: bool) -> Witness:
    if verify and not w.value < 0:
        raise ArithmeticError("witness does not certify indefiniteness")
    return w


def is_psd_exact(Q) -> bool:
    return bool(psd_check_exact(Q))


# ---------------------------------------------------------------------------
# characteristic polynomial

CHAR_POLY_MAX_ORDER = 20


def char_poly_exact(Q, max_order: int = CHAR_POLY_MAX_ORDER) -> list[Fraction]:
    """Coefficients of ``det(tI - Q)``, highest degree first (leading 1).

    Faddeev-LeVerrier recursion over the rationals.
    """
    Q = as_ratmatrix(Q)
    n = Q.n_rows
    if Q.n_rows != Q.n_cols:
        raise ValueError("matrix is not square")
    if n > max_order:
        raise ValueError(f"order {n} exceeds the limit {max_order}")
    coeffs = [Q1]
    M = RatMatrix.zeros(n)
    I = RatMatrix.identity(n)
    for k in range(1, n + 1):
        M = Q @ M + I.scale(coeffs[-1])
        QM = Q @ M
        trace = sum((QM.rows[i][i] for i in range(n)), Q0)
        coeffs.append(-trace / k)
    return coeffs


def format_char_poly(coeffs: Sequence[Fraction], var: str = "t") -> str:
    n = len(coeffs) - 1
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        e = n - i
        mono = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
        mag = abs(c)
        body = (str(mag) if mono == "" or mag != 1 else "") + mono
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts) if parts else "0"


def eigen_sign_pattern_ok(coeffs: Sequence[Fraction]) -> bool:
    """True iff ``det(tI - Q)`` has coefficients alternating in sign or zero.

    For symmetric ``Q`` this is equivalent to ``Q >= 0`` (Descartes' rule).
    """
    for i, c in enumerate(coeffs):
        if c != 0 and (c > 0) != (i % 2 == 0):
            return False
    return True


# ---------------------------------------------------------------------------
# rounding

def rationalize_scalar(x: float, max_den: int) -> Fraction:
    if max_den < 1:
        raise ValueError("max_den must be at least 1")
    if not isfinite(float(x)):
        raise ValueError("non-finite entry")
    return Fraction(float(x)).limit_denominator(max_den)


def rationalize(G, max_den: int) -> RatMatrix:
    """Entrywise best rational approximation, then symmetrized by averaging."""
    A = np.asarray(G, dtype=float)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    R = [[rationalize_scalar(x, max_den) for x in row] for row in A]
    if A.shape[0] == A.shape[1]:
        n = A.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                if R[i][j] != R[j][i]:
                    R[i][j] = R[j][i] = (R[i][j] + R[j][i]) / 2
    return RatMatrix(R)


def default_denominators(max_den: int = 10 ** 6) -> list[int]:
    """The sweep 1, 2, 10, 100, ... up to ``max_den``."""
    out = [1, 2]
    d = 10
    while d <= max_den:
        out.append(d)
        d *= 10
    return [q for q in out if q <= max_den] or [1]


# ---------------------------------------------------------------------------
# sparse exact linear systems

def solve_sparse_exact(rows: list[dict[int, Fraction]], rhs: list[Fraction], n_vars: int
                       ) -> list[Fraction] | None:
    """One solution of a sparse rational linear system, ``None`` if inconsistent.

    Gaussian elimination on dict rows; pivots pick the sparsest row.
    Free variables are set to zero.
    """
    work = [(dict(r), Fraction(b)) for r, b in zip(rows, rhs)]
    pivots: list[tuple[int, dict[int, Fraction], Fraction]] = []
    active = [i for i in range(len(work))]
    # column -> rows containing it, for fast elimination
    while active:
        active = [i for i in active if work[i][0] or work[i][1] != 0]
        bad = [i for i in active if not work[i][0]]
        if bad:
            return None
        if not active:
            break
        i = min(active, key=lambda t: len(work[t][0]))
        r, b = work[i]
        col = min(r, key=lambda c: (abs(r[c]).denominator, c))
        pv = r[col]
        r = {c: v / pv for c, v in r.items()}
        b = b / pv
        active.remove(i)
        for t in active:
            rt, bt = work[t]
            f = rt.get(col)
            if f is None:
                continue
            for c, v in r.items():
                nv = rt.get(c, Q0) - f * v
                if nv:
                    rt[c] = nv
                else:
                    rt.pop(c, None)
            work[t] = (rt, bt - f * b)
        pivots.append((col, r, b))
    x = [Q0] * n_vars
    for col, r, b in reversed(pivots):
        x[col] = b - sum((v * x[c] for c, v in r.items() if c != col and x[c]), Q0)
    return x


def nullspace_exact(rows: Sequence[Sequence], n_cols: int) -> list[list[Fraction]]:
    """Basis of ``{x : R x = 0}`` from the reduced row echelon form."""
    R = [[_to_fraction(v) for v in r] for r in rows]
    pivots = []
    r = 0
    for c in range(n_cols):
        pr = next((i for i in range(r, len(R)) if R[i][c] != 0), None)
        if pr is None:
            continue
        R[r], R[pr] = R[pr], R[r]
        pv = R[r][c]
        R[r] = [v / pv for v in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fcol in free:
        x = [Q0] * n_cols
        x[fcol] = Q1
        for i, pc in enumerate(pivots):
            x[pc] = -R[i][fcol]
        basis.append(x)
    return basis


def project_affine_exact(blocks: Sequence, problem) -> list[RatMatrix]:
    """Nearest (Frobenius) block matrix satisfying the constraints exactly.

    ``G' = G - sum_l z_l A_l`` where ``z`` solves the normal equations
    ``<A_l, A_l'> z = <A_l, G> - b_l`` over the rationals.  Raises
    ``ValueError`` when the constraints are inconsistent.
    """
    G = [as_ratmatrix(B).tolist() for B in blocks]
    if [len(g) for g in G] != list(problem.block_sizes):
        raise ValueError("block sizes do not match the problem")
    # each constraint as {(blk,i,j): coeff} on the upper triangle, with inner
    # products weighting off-diagonal positions twice
    cons = []
    for row in problem.constraints:
        d: dict[tuple[int, int, int], Fraction] = {}
        for blk, i, j, v in row:
            key = (blk, min(i, j), max(i, j))
            d[key] = d.get(key, Q0) + _to_fraction(v)
        cons.append({k: v for k, v in d.items() if v})
    resid = []
    for c, b in zip(cons, problem.rhs):
        val = sum((v * G[blk][i][j] * (1 if i == j else 2) for (blk, i, j), v in c.items()), Q0)
        resid.append(val - _to_fraction(b))
    if all(r == 0 for r in resid):
        return [RatMatrix(g) for g in G]
    # Gram matrix of the constraints (sparse: positions are shared rarely)
    by_pos: dict[tuple[int, int, int], list[int]] = {}
    for l, c in enumerate(cons):
        for k in c:
            by_pos.setdefault(k, []).append(l)
    gram_rows = []
    for l, c in enumerate(cons):
        row: dict[int, Fraction] = {}
        for k, v in c.items():
            w = 1 if k[1] == k[2] else 2
            for l2 in by_pos[k]:
                row[l2] = row.get(l2, Q0) + w * v * cons[l2][k]
        gram_rows.append({a: b for a, b in row.items() if b})
    z = solve_sparse_exact(gram_rows, resid, len(cons))
    if z is None:
        raise ValueError("constraints are inconsistent over the rationals")
    for l, c in enumerate(cons):
        if not z[l]:
            continue
        for (blk, i, j), v in c.items():
            G[blk][i][j] -= z[l] * v
            if i != j:
                G[blk][j][i] -= z[l] * v
    return [RatMatrix(g) for g in G]


def constraint_residuals_exact(blocks: Sequence, problem) -> list[Fraction]:
    out = []
    for row, b in zip(problem.constraints, problem.rhs):
        val = Q0
        for blk, i, j, v in row:
            g = blocks[blk][i, j] if isinstance(blocks[blk], RatMatrix) else blocks[blk][i][j]
            val += _to_fraction(v) * g * (1 if i == j else 2)
        out.append(val - _to_fraction(b))
    return out
