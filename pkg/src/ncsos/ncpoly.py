"""Polynomials in two noncommuting variables X and Y.

Words are plain strings over the alphabet ``"XY"``; the empty string is the
unit word ``1``.  A :class:`Poly` maps words to coefficients.  Coefficients can
be floats or :class:`fractions.Fraction` (any field-like number type works);
zero coefficients are never stored, so two polynomials are equal exactly when
their term maps are equal.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Union

Word = str
Number = Union[int, float, Fraction]

ALPHABET = "XY"


def degree(w: Word) -> int:
    return len(w)


def bidegree(w: Word) -> tuple[int, int]:
    """Return ``(deg_X, deg_Y)`` of a word."""
    x = w.count("X")
    return x, len(w) - x


def reverse(w: Word) -> Word:
    return w[::-1]


def _booth(w: Word) -> int:
    # Booth's least-rotation algorithm, O(len(w)).
    s = w + w
    n = len(s)
    f = [-1] * n
    k = 0
    for j in range(1, n):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


@lru_cache(maxsize=1 << 18)
def min_rotation(w: Word) -> Word:
    """Lexicographically least rotation of ``w`` (with ``X < Y``)."""
    if len(w) < 2:
        return w
    k = _booth(w)
    return w[k:] + w[:k]


def rotations(w: Word) -> list[Word]:
    return [w[i:] + w[:i] for i in range(max(len(w), 1))]


def word_key(w: Word) -> tuple[int, Word]:
    """Sort key: degree first, then lexicographic."""
    return len(w), w


class Poly:
    """An element of the free algebra R<X,Y>.

    Instances are treated as immutable values.  Arithmetic with plain numbers
    is supported (numbers act as multiples of the unit word).
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Word, Number] | None = None):
        clean: dict[Word, Number] = {}
        if terms:
            for w, c in terms.items():
                if any(ch not in ALPHABET for ch in w):
                    raise ValueError(f"invalid word {w!r}: letters must be X or Y")
                if c != 0:
                    clean[w] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Word, Number]) -> "Poly":
        # trusted constructor: keys already valid, zeros already dropped
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def word(cls, w: Word, coeff: Number = 1) -> "Poly":
        return cls({w: coeff})

    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls({"": c})

    @classmethod
    def from_words(cls, words: Iterable[Word], coeff: Number = 1) -> "Poly":
        acc: dict[Word, Number] = {}
        for w in words:
            acc[w] = acc.get(w, 0) + coeff
        return cls(acc)

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict[Word, Number]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def support(self) -> list[Word]:
        return sorted(self._terms, key=word_key)

    def coeff(self, w: Word) -> Number:
        return self._terms.get(w, 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((len(w) for w in self._terms), default=-1)

    def bidegrees(self) -> set[tuple[int, int]]:
        return {bidegree(w) for w in self._terms}

    def is_symmetric(self) -> bool:
        return self == self.star()

    # -- algebra ----------------------------------------------------------
    def star(self) -> "Poly":
        return Poly._raw({w[::-1]: c for w, c in self._terms.items()})

    def __add__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for w, c in other._terms.items():
            v = out.get(w, 0) + c
            if v == 0:
                out.pop(w, None)
            else:
                out[w] = v
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw({w: -c for w, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            out: dict[Word, Number] = {}
            for u, a in self._terms.items():
                for v, b in other._terms.items():
                    w = u + v
                    out[w] = out.get(w, 0) + a * b
            return Poly._raw({w: c for w, c in out.items() if c != 0})
        if isinstance(other, (int, float, Fraction)):
            if other == 0:
                return Poly()
            return Poly._raw({w: c * other for w, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other) -> "Poly":
        if isinstance(other, (int, float, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, e: int) -> "Poly":
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = Poly.const(1)
        for _ in range(e):
            out = out * self
        return out

    def map_coeffs(self, fn: Callable[[Number], Number]) -> "Poly":
        return Poly({w: fn(c) for w, c in self._terms.items()})

    def substitute(self, images: Mapping[str, "Poly"]) -> "Poly":
        return substitute(self, images)

    # -- comparisons ------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)


def _coerce(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, float, Fraction)):
        return Poly.const(x)
    return NotImplemented


X = Poly.word("X")
Y = Poly.word("Y")
ONE = Poly.const(1)


def star(f: Poly) -> Poly:
    return f.star()


def mul(f: Poly, g: Poly) -> Poly:
    return f * g


def substitute(f: Poly, images: Mapping[str, Poly]) -> Poly:
    """Apply the algebra homomorphism sending each letter to ``images[letter]``.

    Letters missing from ``images`` are left fixed.
    """
    img = {a: images.get(a, Poly.word(a)) for a in ALPHABET}
    # powers are reused heavily (e.g. X -> X^2), memoize products of runs
    cache: dict[Word, Poly] = {"": ONE}

    def image_of(w: Word) -> Poly:
        if w in cache:
            return cache[w]
        r = image_of(w[:-1]) * img[w[-1]]
        cache[w] = r
        return r

    out = Poly()
    for w, c in f.items():
        out = out + image_of(w) * c
    return out


def squares_substitution(f: Poly) -> Poly:
    """``f(X^2, Y^2)``; on words this doubles every letter."""
    return Poly._raw({"".join(ch + ch for ch in w): c for w, c in f.items()})


def cyclic_reduce(f: Poly) -> dict[Word, Number]:
    """Sum coefficients over cyclic classes, keyed by the least rotation."""
    acc: dict[Word, Number] = {}
    for w, c in f.items():
        key = min_rotation(w)
        acc[key] = acc.get(key, 0) + c
    return {k: v for k, v in acc.items() if v != 0}


def cyc_equiv(f: Poly, g: Poly) -> bool:
    return not cyclic_reduce(f - g)


def is_cyclically_symmetric(f: Poly) -> bool:
    """True when ``f`` is cyclically equivalent to ``f*``."""
    return cyc_equiv(f, f.star())


# ---------------------------------------------------------------------------
# parsing and formatting

class PolySyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


_UINT = re.compile(r"\d+")


def parse_rational(s: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` (optionally signed) into a Fraction."""
    s = s.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", s):
        raise ValueError(f"not a rational literal: {s!r}")
    return Fraction(s)


def format_rational(q: Number) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_poly(text: str) -> Poly:
    """Parse a polynomial like ``"7 Y2 X4 Y - 13/10 X Y + 1"``.

    Coefficients are exact rationals.  Whitespace is ignored, ``X3`` means
    ``X^3`` and ``1`` is the empty word.
    """
    s = re.sub(r"\s+", "", text)
    n = len(s)
    # error positions refer to the original text
    where = [i for i, c in enumerate(text) if not c.isspace()] + [len(text)]

    def err(msg: str, p: int) -> PolySyntaxError:
        return PolySyntaxError(msg, text, where[p])

    if n == 0:
        raise PolySyntaxError("empty polynomial", text, 0)
    pos = 0
    acc: dict[Word, Fraction] = {}

    def read_uint() -> int | None:
        nonlocal pos
        m = _UINT.match(s, pos)
        if not m:
            return None
        pos = m.end()
        return int(m.group())

    def read_term(sign: int) -> None:
        nonlocal pos
        start = pos
        coeff = Fraction(sign)
        have_rat = False
        if pos < n and s[pos] in "+-":
            if s[pos] == "-":
                coeff = -coeff
            pos += 1
        num = read_uint()
        if num is not None:
            have_rat = True
            den = 1
            if pos < n and s[pos] == "/":
                pos += 1
                den = read_uint()
                if den is None:
                    raise err("expected denominator", pos)
                if den == 0:
                    raise err("zero denominator", pos)
            coeff *= Fraction(num, den)
            if pos < n and s[pos] == "*":
                pos += 1
                if pos >= n or s[pos] not in ALPHABET:
                    raise err("expected monomial after '*'", pos)
        letters: list[str] = []
        while pos < n and s[pos] in ALPHABET:
            ch = s[pos]
            pos += 1
            e = read_uint()
            if e is None:
                e = 1
            letters.append(ch * e)
            if pos < n and s[pos] == ".":
                raise err("exponent must be a nonnegative integer", pos)
        if not have_rat and not letters:
            raise err("expected a term", start)
        w = "".join(letters)
        acc[w] = acc.get(w, Fraction(0)) + coeff

    read_term(1)
    while pos < n:
        ch = s[pos]
        if ch not in "+-":
            raise err(f"unexpected character {ch!r}", pos)
        pos += 1
        read_term(1 if ch == "+" else -1)
    return Poly(acc)


def format_word(w: Word) -> str:
    if not w:
        return "1"
    parts = []
    for m in re.finditer(r"X+|Y+", w):
        run = m.group()
        parts.append(run[0] if len(run) == 1 else f"{run[0]}{len(run)}")
    return " ".join(parts)


def _format_coeff(c: Number) -> str:
    if isinstance(c, (int, Fraction)):
        return format_rational(c)
    return repr(c)


def format_poly(f: Poly) -> str:
    """Inverse of :func:`parse_poly` for rational coefficients."""
    if f.is_zero():
        return "0"
    out = []
    for i, w in enumerate(f.support()):
        c = f.coeff(w)
        neg = c < 0
        a = -c if neg else c
        if w == "":
            body = _format_coeff(a)
        elif a == 1:
            body = format_word(w)
        else:
            body = f"{_format_coeff(a)} {format_word(w)}"
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append(("- " if neg else "+ ") + body)
    return " ".join(out)
