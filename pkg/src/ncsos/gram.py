"""Gram-matrix formulation of sums of hermitian squares.

A symmetric ``f`` is a sum of hermitian squares (mode ``"sigma2"``) iff
``f = v* G v`` for some PSD ``G``; it is cyclically equivalent to one (mode
``"theta2"``) iff ``f ~ sum_i v_i* G_i v_i`` with PSD blocks ``G_i``.  The
coefficient matching is linear in the entries of ``G``; :func:`assemble`
turns it into an :class:`~ncsos.sdp.SdpProblem`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .ncpoly import Poly, Word, bidegree, cyclic_reduce, is_cyclically_symmetric, min_rotation, word_key
from .sdp import SdpProblem

SIGMA2 = "sigma2"
THETA2 = "theta2"
MODES = (SIGMA2, THETA2)


@dataclass
class GramBasis:
    blocks: list[list[Poly]]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = [f"V{i + 1}" for i in range(len(self.blocks))]

    @classmethod
    def from_words(cls, blocks: Sequence[Sequence[Word]], labels=None) -> "GramBasis":
        return cls([[Poly.word(w) for w in blk] for blk in blocks], list(labels or []))

    @property
    def sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def words(self, i: int) -> list[Word]:
        """Block ``i`` as words; fails if an entry is not a single word."""
        out = []
        for p in self.blocks[i]:
            (w, c), = p.items()
            if c != 1:
                raise ValueError("basis entry is not a word")
            out.append(w)
        return out


# ---------------------------------------------------------------------------
# bases

def _square_blocks(n_x2: int, n_y2: int) -> list[Word]:
    """All concatenations of ``n_x2`` copies of XX and ``n_y2`` copies of YY."""
    out = []
    for pat in product("XY", repeat=n_x2 + n_y2):
        if pat.count("X") == n_x2:
            out.append("".join(ch + ch for ch in pat))
    return out


def build_basis(m: int, k: int) -> GramBasis:
    """Reduced word blocks for ``S_{m,k}(X^2, Y^2)`` in the cyclic cone.

    Every word has length ``m`` with ``m - k`` letters X and ``k`` letters Y
    and is a run of squares framed by the boundary letters that the parities
    of ``m`` and ``k`` dictate.  Blocks are sorted lexicographically.
    """
    if not (1 <= k <= m - 1):
        raise ValueError(f"need 1 <= k <= m-1 for a nontrivial basis, got m={m}, k={k}")
    nx, ny = m - k, k

    def framed(left: str, right: str) -> list[Word]:
        inner_x = nx - left.count("X") - right.count("X")
        inner_y = ny - left.count("Y") - right.count("Y")
        if inner_x < 0 or inner_y < 0 or inner_x % 2 or inner_y % 2:
            return []
        return sorted(left + w + right for w in _square_blocks(inner_x // 2, inner_y // 2))

    if m % 2 == 0 and k % 2 == 0:
        blocks = [framed("", ""), framed("X", "X"), framed("Y", "Y")]
    elif m % 2 == 1 and k % 2 == 0:
        blocks = [framed("X", ""), framed("", "X")]
    elif m % 2 == 1 and k % 2 == 1:
        blocks = [framed("Y", ""), framed("", "Y")]
    else:
        blocks = [framed("X", "Y"), framed("Y", "X")]
    return GramBasis.from_words(blocks)


def all_words(max_degree: int, min_degree: int = 0) -> list[Word]:
    out = []
    for d in range(min_degree, max_degree + 1):
        out.extend("".join(t) for t in product("XY", repeat=d))
    return out


def general_basis(f: Poly, mode: str = THETA2) -> GramBasis:
    """Single block of words for a general symmetric ``f``.

    Words of degree ``<= deg(f)/2``.  Homogeneous targets only need half
    degree words: bidegree ``(a/2, b/2)`` when ``f`` has even bidegree
    ``(a, b)``, else all words of degree ``deg(f)/2``.
    """
    _check_mode(mode)
    if mode == SIGMA2 and not f.is_symmetric():
        raise ValueError("target is not symmetric")
    if mode == THETA2 and not is_cyclically_symmetric(f):
        raise ValueError("target is not cyclically equivalent to a symmetric polynomial")
    if f.is_zero():
        return GramBasis([[Poly.const(1)]])
    d = f.degree() // 2
    bideg = f.bidegrees()
    degs = {a + b for a, b in bideg}
    if len(bideg) == 1:
        a, b = next(iter(bideg))
        if a % 2 == 0 and b % 2 == 0:
            words = [w for w in all_words(d, d) if bidegree(w) == (a // 2, b // 2)]
            return GramBasis.from_words([words])
    if len(degs) == 1 and d * 2 == f.degree():
        return GramBasis.from_words([all_words(d, d)])
    return GramBasis.from_words([all_words(d)])


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


# ---------------------------------------------------------------------------
# assembly

@dataclass
class GramSdp(SdpProblem):
    """An :class:`SdpProblem` that remembers the Gram data it came from."""

    basis: GramBasis | None = None
    target: Poly | None = None
    mode: str = THETA2


def constraint_key(w: Word, mode: str) -> tuple[Word, Fraction]:
    """Constraint label of word ``w`` and the weight of ``w`` in it.

    A class and its reversal give the same constraint on symmetric Gram
    matrices, so both are merged under the smaller label; entries from a
    merged pair carry weight 1/2.
    """
    if mode == THETA2:
        cls = min_rotation(w)
        rcls = min_rotation(cls[::-1])
    else:
        cls, rcls = w, w[::-1]
    if cls == rcls:
        return cls, Fraction(1)
    return min(cls, rcls), Fraction(1, 2)


def target_coefficients(target: Poly, mode: str) -> dict[Word, Fraction]:
    """Right-hand sides indexed by constraint label."""
    if mode == THETA2:
        return cyclic_reduce(target)
    return dict(target.items())


def assemble(target: Poly, basis: GramBasis, mode: str = THETA2) -> GramSdp:
    """Linear constraints ``v* G v (~) target`` on block-diagonal ``G``.

    One constraint per (reversal-merged) cyclic class in mode ``"theta2"``,
    per (reversal-merged) word in mode ``"sigma2"``.  Classes reachable from
    the basis are constrained even when their target coefficient is zero.
    """
    _check_mode(mode)
    if not basis.blocks or any(len(b) == 0 for b in basis.blocks):
        raise ValueError("empty basis block")
    if mode == SIGMA2 and not target.is_symmetric():
        raise ValueError("target is not symmetric")
    if mode == THETA2 and not is_cyclically_symmetric(target):
        raise ValueError("target is not cyclically equivalent to a symmetric polynomial")

    rows: dict[Word, dict[tuple[int, int, int], Fraction]] = {}
    for bi, vec in enumerate(basis.blocks):
        stars = [p.star() for p in vec]
        for a in range(len(vec)):
            for b in range(a, len(vec)):
                prod_ab = stars[a] * vec[b]
                for w, c in prod_ab.items():
                    key, wt = constraint_key(w, mode)
                    row = rows.setdefault(key, {})
                    row[(bi, a, b)] = row.get((bi, a, b), Fraction(0)) + wt * Fraction(c)
    rhs_map = target_coefficients(target, mode)
    keys = set(rows)
    for w in rhs_map:
        key, _ = constraint_key(w, mode)
        keys.add(key)
    ordered = sorted(keys, key=word_key)
    constraints, rhs = [], []
    for key in ordered:
        entries = [(bi, a, b, v) for (bi, a, b), v in sorted(rows.get(key, {}).items()) if v != 0]
        constraints.append(entries)
        rhs.append(Fraction(rhs_map.get(key, 0)))
    return GramSdp(block_sizes=basis.sizes, constraints=constraints, rhs=rhs,
                   keys=ordered, basis=basis, target=target, mode=mode)


def gram_poly(basis: GramBasis, blocks: Sequence[np.ndarray]) -> Poly:
    """``sum_i v_i* G_i v_i`` (entries may be floats or Fractions)."""
    out: dict[Word, object] = {}
    for vec, G in zip(basis.blocks, blocks):
        stars = [p.star() for p in vec]
        n = len(vec)
        for a in range(n):
            for b in range(n):
                g = G[a][b]
                if g == 0:
                    continue
                for u, cu in stars[a].items():
                    for v, cv in vec[b].items():
                        w = u + v
                        out[w] = out.get(w, 0) + g * cu * cv
    return Poly(out)


def affine_family_dimension(problem: SdpProblem) -> int:
    """Dimension of the affine space of symmetric block matrices meeting the constraints."""
    from .sdp import _Blocks, _sparse_to_svec
    layout = _Blocks(problem.block_sizes)
    if not problem.constraints:
        return layout.dim
    A = np.array([_sparse_to_svec(r, layout) for r in problem.constraints])
    return layout.dim - int(np.linalg.matrix_rank(A))


# ---------------------------------------------------------------------------
# objective variants

def with_objective(problem: SdpProblem, objective) -> SdpProblem:
    """Same constraints, different objective.

    ``objective`` is ``"trace"``, ``"zero"`` (pure feasibility) or a list of
    dense symmetric blocks.
    """
    if objective == "trace":
        obj = None
    elif objective == "zero":
        obj = []
    else:
        obj = []
        for bi, Cb in enumerate(objective):
            Cb = np.asarray(Cb, dtype=float)
            n = Cb.shape[0]
            for i in range(n):
                for j in range(i, n):
                    if Cb[i, j] != 0:
                        obj.append((bi, i, j, float(Cb[i, j])))
    return SdpProblem(list(problem.block_sizes), problem.constraints, list(problem.rhs),
                      list(problem.keys), obj)


def max_lambda_min_problem(problem: SdpProblem, trace_bound: float) -> SdpProblem:
    """Maximize ``t`` with ``G - t I >= 0``, ``t >= 0``, ``tr G <= trace_bound``.

    Variables are ``G' = G - tI`` (original blocks) followed by two 1x1
    blocks ``t`` and a trace slack.  Use :func:`recover_max_lambda_min` to
    map a solution back.
    """
    nb = len(problem.block_sizes)
    ntot = sum(problem.block_sizes)
    t_blk, s_blk = nb, nb + 1
    cons = []
    for row in problem.constraints:
        diag = sum((v for blk, i, j, v in row if i == j), Fraction(0))
        new = list(row)
        if diag != 0:
            new.append((t_blk, 0, 0, diag))
        cons.append(new)
    trace_row = [(bi, i, i, 1) for bi, n in enumerate(problem.block_sizes) for i in range(n)]
    trace_row += [(t_blk, 0, 0, ntot), (s_blk, 0, 0, 1)]
    cons.append(trace_row)
    rhs = list(problem.rhs) + [trace_bound]
    return SdpProblem(list(problem.block_sizes) + [1, 1], cons, rhs,
                      list(problem.keys) + ["__trace__"], [(t_blk, 0, 0, -1.0)])


def recover_max_lambda_min(problem: SdpProblem, blocks: Sequence[np.ndarray]) -> tuple[list[np.ndarray], float]:
    nb = len(problem.block_sizes)
    t = float(blocks[nb][0, 0])
    return [blocks[i] + t * np.eye(problem.block_sizes[i]) for i in range(nb)], t


# ---------------------------------------------------------------------------
# reading off squares

def extract_sos(G: np.ndarray, v: Sequence[Poly], tol: float = 1e-9) -> list[tuple[float, Poly]]:
    """Write ``v* G v`` as ``sum_i w_i q_i* q_i`` with ``w_i >= 0``.

    Uses an unpivoted LDL^T factorization: pivots below ``tol`` (relative to
    the largest diagonal entry) are skipped, so a rank ``r`` matrix yields
    ``r`` squares whose coefficient vectors are the rows of the Cholesky
    factor up to scaling.
    """
    G = np.array(G, dtype=float)
    n = G.shape[0]
    if G.shape != (n, n) or len(v) != n:
        raise ValueError("G must be square and match the vector length")
    if not np.allclose(G, G.T, atol=tol * max(1.0, np.abs(G).max(initial=0.0))):
        raise ValueError("G is not symmetric")
    scale = max(1.0, float(np.max(np.abs(np.diag(G))))) if n else 1.0
    R = (G + G.T) / 2
    out = []
    for p in range(n):
        d = R[p, p]
        if d < -tol * scale:
            raise ValueError(f"G is indefinite (pivot {d:.3e} at position {p})")
        if d <= tol * scale:
            if np.max(np.abs(R[p, p:])) > np.sqrt(tol) * scale:
                raise ValueError(f"G is indefinite (zero pivot with nonzero column at {p})")
            continue
        col = R[p, :] / d
        col[:p] = 0.0
        R = R - d * np.outer(col, col)
        q = Poly()
        for j in range(p, n):
            if col[j] != 0.0:
                q = q + v[j] * float(col[j])
        out.append((float(d), q))
    return out


def sos_poly(squares: Sequence[tuple[object, Poly]]) -> Poly:
    out = Poly()
    for w, q in squares:
        out = out + (q.star() * q) * w
    return out


def fold_block(G1: np.ndarray, v1: Sequence[Poly], G2: np.ndarray, v2: Sequence[Poly]):
    """Merge the second block into the first by relabelling ``w -> w*``.

    Requires ``v2`` to consist of the reversals of ``v1``.  Returns
    ``(G, v1)`` with ``v1* G v1 ~ v1* G1 v1 + v2* G2 v2``.
    """
    idx = {p: i for i, p in enumerate(v2)}
    if len(v1) != len(v2):
        raise ValueError("blocks differ in size; the second block must be the reversal of the first")
    perm = []
    for p in v1:
        j = idx.get(p.star())
        if j is None:
            raise ValueError("second block is not the reversal of the first "
                             "(folding applies only when m or k is odd)")
        perm.append(j)
    G2 = np.asarray(G2)
    relabelled = G2[np.ix_(perm, perm)]
    return np.asarray(G1) + relabelled, list(v1)


def fold_basis_blocks(m: int, k: int, blocks: Sequence[np.ndarray]):
    """Fold a two-block solution for ``S_{m,k}(X^2, Y^2)`` onto the first block."""
    if m % 2 == 0 and k % 2 == 0:
        raise ValueError("folding needs m or k odd")
    basis = build_basis(m, k)
    G, v = fold_block(blocks[0], basis.blocks[0], blocks[1], basis.blocks[1])
    return G, GramBasis([v], [basis.labels[0]])


# ---------------------------------------------------------------------------
# problem dump

def write_dump(problem: SdpProblem, path) -> None:
    """Write a sparse SDPA-like text dump of ``problem``.

    Layout: comment lines start with ``#``; then the number of constraints,
    the number of blocks, the block sizes; then one line per nonzero upper
    triangle entry ``constraint-index block row col value`` (1-based indices,
    constraint 0 is the objective); finally the line ``rhs`` followed by one
    right-hand side per line.  Values are exact rationals when available.
    """
    from .ncpoly import format_rational, format_word

    def fmt(v):
        return format_rational(v) if isinstance(v, (int, Fraction)) else repr(float(v))

    lines = ["# ncsos sdp dump", f"{problem.n_constraints}", f"{len(problem.block_sizes)}",
             " ".join(str(n) for n in problem.block_sizes)]
    if problem.objective is None:
        obj = [(bi, i, i, 1) for bi, n in enumerate(problem.block_sizes) for i in range(n)]
    else:
        obj = problem.objective
    for bi, i, j, v in obj:
        lines.append(f"0 {bi + 1} {i + 1} {j + 1} {fmt(v)}")
    for l, row in enumerate(problem.constraints):
        for bi, i, j, v in row:
            lines.append(f"{l + 1} {bi + 1} {i + 1} {j + 1} {fmt(v)}")
    lines.append("rhs")
    for key, v in zip(problem.keys, problem.rhs):
        label = format_word(key) if isinstance(key, str) else str(key)
        lines.append(f"{fmt(v)} # {label}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_dump(path) -> SdpProblem:
    from .ncpoly import parse_rational

    def val(tok: str):
        try:
            return parse_rational(tok)
        except ValueError:
            return float(tok)

    with open(path, encoding="utf-8") as fh:
        raw = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in raw if ln]
    m = int(lines[0])
    nb = int(lines[1])
    sizes = [int(t) for t in lines[2].split()]
    if len(sizes) != nb:
        raise ValueError("block count does not match block sizes")
    cons: list[list] = [[] for _ in range(m)]
    obj = []
    pos = 3
    while lines[pos] != "rhs":
        l, bi, i, j, v = lines[pos].split()
        entry = (int(bi) - 1, int(i) - 1, int(j) - 1, val(v))
        (obj if int(l) == 0 else cons[int(l) - 1]).append(entry)
        pos += 1
    rhs = [val(t) for t in lines[pos + 1: pos + 1 + m]]
    return SdpProblem(sizes, cons, rhs, objective=obj)
