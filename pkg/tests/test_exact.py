import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ncsos.exact import (PsdProof, RatMatrix, Witness, char_poly_exact, constraint_residuals_exact,
                         eigen_sign_pattern_ok, format_char_poly, project_affine_exact, psd_check_exact,
                         rationalize, rationalize_scalar)
from ncsos.gram import THETA2, GramBasis, affine_family_dimension, assemble
from ncsos.ncpoly import Poly, cyclic_reduce, parse_poly

G1 = [[4, 4, 0, 3, 1, 1], [4, 4, 0, 3, 1, 1], [0, 0, 3, 0, 3, 3], [3, 3, 0, 3, 0, 0],
      [1, 1, 3, 0, 4, 4], [1, 1, 3, 0, 4, 4]]
G2 = [[1, 0, -1], [0, 0, 0], [-1, 0, 1]]


def random_rational_sym(rng, n, rank=None, indefinite=False):
    r = n if rank is None else rank
    C = [[Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(n)] for _ in range(r)]
    signs = [(-1 if (indefinite and i == 0) else 1) for i in range(r)]
    return RatMatrix([[sum(signs[t] * C[t][i] * C[t][j] for t in range(r)) for j in range(n)] for i in range(n)])


def sympy_is_psd(Q: RatMatrix) -> bool:
    M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in Q.tolist()])
    return bool(M.is_positive_semidefinite)


def test_psd_examples():
    res = psd_check_exact(RatMatrix(G2))
    assert isinstance(res, PsdProof) and res.rank == 1
    w = psd_check_exact(RatMatrix([[2, 1], [1, 0]]))
    assert isinstance(w, Witness) and w.value < 0
    assert RatMatrix([[2, 1], [1, 0]]).quad(w.x) == w.value
    assert psd_check_exact(RatMatrix.zeros(4)).rank == 0


def test_psd_rejects_asymmetric():
    with pytest.raises(ValueError):
        psd_check_exact(RatMatrix([[1, 2], [0, 1]]))


def test_psd_sound_both_ways_random():
    rng = random.Random(7)
    for trial in range(150):
        n = rng.randint(1, 7)
        rank = rng.randint(0, n)
        Q = random_rational_sym(rng, n, rank=max(rank, 1), indefinite=trial % 3 == 0)
        res = psd_check_exact(Q)
        if isinstance(res, PsdProof):
            assert res.reconstruct() == Q
            assert all(d >= 0 for d in res.D)
        else:
            assert Q.quad(res.x) < 0
        assert bool(res) == sympy_is_psd(Q)


def test_zero_diagonal_with_offdiagonal_is_witnessed():
    Q = RatMatrix([[1, 0, 0], [0, 0, 3], [0, 3, 0]])
    res = psd_check_exact(Q)
    assert not res and Q.quad(res.x) < 0


def test_char_poly_published_matrices():
    c1 = char_poly_exact(RatMatrix(G1))
    assert c1 == [1, -22, 129, -108, 0, 0, 0]
    assert format_char_poly(c1) == "t^6 - 22t^5 + 129t^4 - 108t^3"
    c2 = char_poly_exact(RatMatrix(G2))
    # t^3 - 2 t^2, i.e. -(2 t^2 - t^3)
    assert c2 == [1, -2, 0, 0]
    assert char_poly_exact(RatMatrix.identity(2)) == [1, -2, 1]


def test_char_poly_against_sympy():
    rng = random.Random(3)
    t = sympy.Symbol("t")
    for _ in range(25):
        n = rng.randint(1, 7)
        Q = random_rational_sym(rng, n, indefinite=rng.random() < 0.5)
        M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in Q.tolist()])
        ref = sympy.Poly(M.charpoly(t).as_expr(), t).all_coeffs()
        assert [Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in ref] == char_poly_exact(Q)


def test_char_poly_guard():
    with pytest.raises(ValueError):
        char_poly_exact(RatMatrix.identity(21))


def test_sign_pattern_agrees_with_ldlt():
    rng = random.Random(11)
    for _ in range(80):
        n = rng.randint(1, 8)
        Q = random_rational_sym(rng, n, rank=rng.randint(1, n), indefinite=rng.random() < 0.4)
        assert eigen_sign_pattern_ok(char_poly_exact(Q)) == bool(psd_check_exact(Q))


@pytest.mark.parametrize("x,den,expected", [(0.5, 10, Fraction(1, 2)), (0.33333333, 100, Fraction(1, 3)),
                                            (-0.144444, 100, Fraction(-13, 90)), (2.0, 1, Fraction(2)),
                                            (0.7, 1, Fraction(1))])
def test_rationalize_scalar(x, den, expected):
    assert rationalize_scalar(x, den) == expected


@settings(max_examples=200)
@given(st.floats(-1e3, 1e3, allow_nan=False), st.integers(1, 300))
def test_rationalize_scalar_best(x, den):
    q = rationalize_scalar(x, den)
    assert q.denominator <= den
    exact = Fraction(x)
    err = abs(q - exact)
    # brute force over every admissible denominator
    for d in range(1, den + 1):
        n0 = (exact * d).__floor__()
        for n in (n0, n0 + 1):
            assert err <= abs(Fraction(n, d) - exact)


def test_rationalize_matrix():
    G = np.array([[0.5, 0.3333333333], [0.33333334, -0.144444]])
    R = rationalize(G, 100)
    assert R.symmetric
    assert R[0, 0] == Fraction(1, 2) and R[0, 1] == Fraction(1, 3) and R[1, 1] == Fraction(-13, 90)
    with pytest.raises(ValueError):
        rationalize(np.array([[np.nan]]), 10)
    with pytest.raises(ValueError):
        rationalize(G, 0)


H = parse_poly("X4 + 2 X Y X + 2 X2 + Y2 + 2 Y + 1")
V7 = GramBasis.from_words([["", "X", "Y", "XX", "XY", "YX", "YY"]])


def test_project_fixed_point_and_family():
    p = assemble(H, V7, THETA2)
    # Gram matrix of q*q for q = 1 + Y + X^2
    c = [1, 0, 1, 1, 0, 0, 0]
    feasible = RatMatrix([[a * b for b in c] for a in c])
    assert project_affine_exact([feasible], p) == [feasible]
    rng = random.Random(5)
    for _ in range(5):
        M = [[Fraction(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(7)] for _ in range(7)]
        S = RatMatrix([[M[i][j] + M[j][i] for j in range(7)] for i in range(7)])
        P = project_affine_exact([S], p)
        assert all(r == 0 for r in constraint_residuals_exact(P, p))
        # the correction is orthogonal to the family directions: projecting again does nothing
        assert project_affine_exact(P, p) == P
    assert affine_family_dimension(p) == 12


def test_project_inconsistent():
    from ncsos.sdp import SdpProblem
    p = SdpProblem([1], [[(0, 0, 0, 1)], [(0, 0, 0, 1)]], [Fraction(1), Fraction(2)])
    with pytest.raises(ValueError):
        project_affine_exact([RatMatrix([[0]])], p)


def test_nonzero_sums_of_squares_do_not_reduce_to_zero():
    rng = random.Random(9)
    for _ in range(60):
        ps = []
        for _ in range(rng.randint(1, 3)):
            terms = {"".join(rng.choice("XY") for _ in range(rng.randint(0, 4))): Fraction(rng.randint(-5, 5), rng.randint(1, 3))
                     for _ in range(rng.randint(1, 3))}
            ps.append(Poly(terms))
        total = Poly()
        for p in ps:
            total = total + p.star() * p
        if any(not p.is_zero() for p in ps):
            assert cyclic_reduce(total) != {}
