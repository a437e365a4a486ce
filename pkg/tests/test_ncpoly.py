from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ncsos.ncpoly import (ONE, X, Y, Poly, PolySyntaxError, cyc_equiv, cyclic_reduce, format_poly,
                          min_rotation, parse_poly, rotations, substitute)
from ncsos.smk import s_mk, s_mk_squares

words = st.text(alphabet="XY", max_size=8)
rats = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.dictionaries(st.text(alphabet="XY", max_size=4), rats, max_size=5).map(Poly)


@pytest.mark.parametrize("w,expected", [("YX", "XY"), ("XYY", "XYY"), ("YXY", "XYY"), ("", ""),
                                        ("YYXYX", "XYXYY"), ("XYXY", "XYXY")])
def test_min_rotation_examples(w, expected):
    assert min_rotation(w) == expected


@given(words)
def test_min_rotation_is_least_rotation(w):
    r = min_rotation(w)
    assert r == min(rotations(w)) if w else r == ""
    assert min_rotation(r) == r


@given(words, st.integers(0, 10))
def test_min_rotation_rotation_invariant(w, s):
    if w:
        s %= len(w)
        assert min_rotation(w[s:] + w[:s]) == min_rotation(w)


@given(words, words)
def test_cyc_equiv_words_iff_rotation(v, w):
    expected = len(v) == len(w) and (v == w or w in rotations(v))
    assert cyc_equiv(Poly.word(v), Poly.word(w)) == expected


def test_star_examples():
    assert parse_poly("X Y + 2 X2 Y").star() == parse_poly("Y X + 2 Y X2")
    h = parse_poly("X4 + 2 X Y X + 2 X2 + Y2 + 2 Y + 1")
    assert h.star() == h
    assert Poly().star() == Poly()


@settings(max_examples=60)
@given(polys, polys)
def test_star_anti_automorphism(f, g):
    assert (f * g).star() == g.star() * f.star()
    assert f.star().star() == f
    assert (f + g).star() == f.star() + g.star()


@settings(max_examples=60)
@given(polys, polys, polys)
def test_ring_axioms(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f * ONE == f and ONE * f == f
    assert f - f == Poly()


def test_mul_noncommutative():
    assert (X + Y) * (X - Y) == parse_poly("X2 - X Y + Y X - Y2")
    q = parse_poly("X2 + Y + 1")
    assert q.star() * q == parse_poly("X4 + X2 Y + X2 + Y X2 + Y2 + Y + X2 + Y + 1")


def test_no_zero_coefficients_stored():
    f = parse_poly("X Y") - parse_poly("X Y")
    assert f.is_zero() and f.terms == {}


@settings(max_examples=60)
@given(polys, polys)
def test_commutators_vanish_cyclically(f, g):
    assert cyclic_reduce(f * g - g * f) == {}


def test_cyclic_reduce_examples():
    assert cyclic_reduce(X * Y - Y * X) == {}
    h = parse_poly("X4 + 2 X Y X + 2 X2 + Y2 + 2 Y + 1")
    q = parse_poly("X2 + Y + 1")
    assert cyclic_reduce(h) == cyclic_reduce(q.star() * q)
    assert cyclic_reduce(Poly.word("YXX")) == {"XXY": 1}


def test_cyc_equiv_examples():
    assert cyc_equiv(X * Y, Y * X)
    f = parse_poly("X Y2 + 3 Y")
    assert not cyc_equiv(f, f + X)


def test_substitute():
    sq = {"X": X * X, "Y": Y * Y}
    assert substitute(X * Y + Y * X, sq) == parse_poly("X2 Y2 + Y2 X2")
    f = parse_poly("X Y X - 3 Y")
    assert substitute(f, {"X": X, "Y": Y}) == f
    s = s_mk_squares(6, 3)
    assert len(s.terms) == 20 and all(len(w) == 12 for w in s.terms)


@pytest.mark.parametrize("text,word,coeff", [("7 Y2 X4 Y", "YYXXXXY", 7), ("-13/10 X Y", "XY", Fraction(-13, 10)),
                                             ("1", "", 1), ("2*X", "X", 2), ("- X", "X", -1)])
def test_parse_monomials(text, word, coeff):
    assert parse_poly(text) == Poly({word: coeff})


def test_parse_vector_entry():
    f = parse_poly("X8 Y4 X2 + X6 Y2 X2 Y2 X2")
    assert f == Poly({"X" * 8 + "YYYY" + "XX": 1, "X" * 6 + "YY" + "XX" + "YY" + "XX": 1})


@pytest.mark.parametrize("bad", ["X^2", "X2.5", "Z", "X +", "3/", "X Y -", "1/0 X", "++X", "X Y + Z"])
def test_parse_errors(bad):
    with pytest.raises(PolySyntaxError):
        parse_poly(bad)


def test_parse_error_has_position():
    with pytest.raises(PolySyntaxError) as e:
        parse_poly("X Y + Z")
    assert e.value.pos == 6


@settings(max_examples=100)
@given(polys)
def test_parse_format_round_trip(f):
    assert parse_poly(format_poly(f)) == f


def test_smk_letter_swap_symmetry():
    swap = {"X": Y, "Y": X}
    for m in range(7):
        for k in range(m + 1):
            assert substitute(s_mk(m, k), swap) == s_mk(m, m - k)
