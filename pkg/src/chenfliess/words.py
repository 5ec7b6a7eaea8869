"""Alphabets, words and the shuffle algebra of noncommutative polynomials.

Words are tuples of letter indices.  Letter ``i`` is written ``x<i>``; letter 0
is the drift letter, paired with the constant input ``u_0 = 1``.  All listings
use the length-lexicographic order (shorter words first, ties broken by
comparing letter indices left to right).

Coefficients in :class:`Polynomial` are kept exactly as given (``int``,
``fractions.Fraction`` or ``float``), so identities over integer polynomials
can be checked with ``==``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from numbers import Number
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple, Union

from .exceptions import ResourceCapError

DEFAULT_WORD_CAP = 10**7


@dataclass(frozen=True)
class Alphabet:
    """The letter set ``{x_0, ..., x_m}``.

    With ``drift=False`` the drift letter is left out and the alphabet is
    ``{x_1, ..., x_m}``.  This covers single-input examples written over
    ``X = {x_1}``, where the growth constants count one letter, not two.
    """

    m: int
    drift: bool = True

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a nonnegative integer, got {self.m!r}")
        if not self.drift and self.m < 1:
            raise ValueError("an alphabet without the drift letter needs m >= 1")

    @property
    def letters(self) -> Tuple[int, ...]:
        start = 0 if self.drift else 1
        return tuple(range(start, self.m + 1))

    @property
    def size(self) -> int:
        """Number of letters, the ``m + 1`` of the growth estimates."""
        return self.m + 1 if self.drift else self.m

    def __contains__(self, word) -> bool:
        lo = 0 if self.drift else 1
        return all(lo <= i <= self.m for i in word)

    def check_word(self, word) -> None:
        if word not in self:
            raise ValueError(f"word {Word(word)} is not over alphabet {self}")

    def to_dict(self) -> dict:
        return {"m": self.m, "drift": self.drift}


class Word(tuple):
    """An immutable word, stored as a tuple of letter indices.

    Comparison uses the canonical length-lexicographic order, so
    ``sorted(words)`` is the canonical listing.
    """

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        letters = tuple(int(i) for i in letters)
        if any(i < 0 for i in letters):
            raise ValueError(f"letter indices must be nonnegative: {letters}")
        return super().__new__(cls, letters)

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse ``"x0 x1 x1"``; ``"e"`` (or an empty string) is the empty word."""
        text = text.strip()
        if text in ("", "e"):
            return EMPTY
        letters = []
        for tok in text.split():
            if not tok.startswith("x") or not tok[1:].isdigit():
                raise ValueError(f"bad letter {tok!r} in word {text!r}")
            letters.append(int(tok[1:]))
        return cls(letters)

    @classmethod
    def power(cls, letter: int, k: int) -> "Word":
        return cls((letter,) * k)

    def sort_key(self):
        return (len(self), tuple(self))

    def is_power(self) -> bool:
        """True when all letters coincide (the empty word counts)."""
        return len(set(self)) <= 1

    def __getitem__(self, item):
        out = tuple.__getitem__(self, item)
        return Word(out) if isinstance(item, slice) else out

    def __add__(self, other):
        return Word(tuple(self) + tuple(other))

    def __lt__(self, other):
        return self.sort_key() < Word(other).sort_key()

    def __le__(self, other):
        return self.sort_key() <= Word(other).sort_key()

    def __gt__(self, other):
        return self.sort_key() > Word(other).sort_key()

    def __ge__(self, other):
        return self.sort_key() >= Word(other).sort_key()

    # tuple's hash/eq are kept so Word((1,)) and (1,) are interchangeable keys
    __hash__ = tuple.__hash__
    __eq__ = tuple.__eq__
    __ne__ = tuple.__ne__

    def __str__(self):
        return " ".join(f"x{i}" for i in self) if self else "e"

    def __repr__(self):
        return f"Word({str(self)!r})"


EMPTY = Word()


def as_word(w: Union[Word, str, Sequence[int]]) -> Word:
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        return Word.parse(w)
    return Word(w)


def count_words(alphabet: Alphabet, k: int) -> int:
    return alphabet.size ** k


def count_words_upto(alphabet: Alphabet, J: int) -> int:
    return sum(alphabet.size ** k for k in range(J + 1))


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise ResourceCapError(f"{what}: {n} words exceeds the cap of {cap}")


def enumerate_words(alphabet: Alphabet, k: int, cap: int = DEFAULT_WORD_CAP) -> List[Word]:
    """All words of length ``k`` in canonical order."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    _check_cap(count_words(alphabet, k), cap, f"X^{k}")
    return [Word(p) for p in itertools.product(alphabet.letters, repeat=k)]


def enumerate_words_upto(alphabet: Alphabet, J: int, cap: int = DEFAULT_WORD_CAP) -> List[Word]:
    """All words of length at most ``J`` in canonical order."""
    if J < 0:
        raise ValueError("J must be nonnegative")
    _check_cap(count_words_upto(alphabet, J), cap, f"X^<={J}")
    out = []
    for k in range(J + 1):
        out.extend(Word(p) for p in itertools.product(alphabet.letters, repeat=k))
    return out


def level_index(word: Sequence[int], alphabet: Alphabet) -> int:
    """Position of ``word`` inside the canonical listing of its length level."""
    lo = alphabet.letters[0]
    idx = 0
    for i in word:
        idx = idx * alphabet.size + (i - lo)
    return idx


def compositions(k: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to ``k``."""
    if parts == 0:
        if k == 0:
            yield ()
        return
    if parts == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in compositions(k - first, parts - 1):
            yield (first,) + rest


class Polynomial:
    """A finite linear combination of words with scalar coefficients.

    Zero coefficients are dropped on construction.  Instances are treated as
    immutable; arithmetic returns new objects.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Union[Mapping, Iterable[Tuple[object, Number]], None] = None):
        acc: Dict[Word, Number] = {}
        if terms is not None:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for w, c in items:
                w = as_word(w)
                acc[w] = acc.get(w, 0) + c
        self._terms = {w: c for w, c in acc.items() if c != 0}

    @classmethod
    def word(cls, w, coeff: Number = 1) -> "Polynomial":
        return cls({as_word(w): coeff})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    def coefficient(self, w) -> Number:
        return self._terms.get(as_word(w), 0)

    def items(self):
        """(word, coefficient) pairs in canonical word order."""
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def support(self) -> List[Word]:
        return sorted(self._terms, key=Word.sort_key)

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=-1)

    def coefficient_sum(self) -> Number:
        return sum(self._terms.values())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, Number) and other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0) + c
        return Polynomial(out)

    def __neg__(self):
        return Polynomial({w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, scalar: Number) -> "Polynomial":
        if not isinstance(scalar, Number):
            return NotImplemented
        return Polynomial({w: scalar * c for w, c in self._terms.items()})

    __rmul__ = __mul__

    def shuffle(self, other: "Polynomial", cap: int = DEFAULT_WORD_CAP) -> "Polynomial":
        return shuffle(self, other, cap=cap)

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for w, c in self.items():
            parts.append(str(w) if c == 1 else f"{c}*{w}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Polynomial({self})"


@lru_cache(maxsize=65536)
def _shuffle_words(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    # (x_i a') sh (x_j b') = x_i (a' sh x_j b') + x_j (x_i a' sh b')
    if not a:
        return ((b, 1),)
    if not b:
        return ((a, 1),)
    acc: Dict[Tuple[int, ...], int] = {}
    for w, c in _shuffle_words(a[1:], b):
        key = (a[0],) + w
        acc[key] = acc.get(key, 0) + c
    for w, c in _shuffle_words(a, b[1:]):
        key = (b[0],) + w
        acc[key] = acc.get(key, 0) + c
    return tuple(acc.items())


def shuffle_words(a, b, cap: int = DEFAULT_WORD_CAP) -> Polynomial:
    """Shuffle product of two words."""
    a, b = as_word(a), as_word(b)
    _check_cap(math.comb(len(a) + len(b), len(a)), cap, "shuffle")
    return Polynomial({Word(w): c for w, c in _shuffle_words(tuple(a), tuple(b))})


def shuffle(p: Polynomial, q: Polynomial, cap: int = DEFAULT_WORD_CAP) -> Polynomial:
    """Bilinear extension of the word shuffle to polynomials."""
    acc: Dict[Word, Number] = {}
    for wa, ca in p._terms.items():
        for wb, cb in q._terms.items():
            _check_cap(math.comb(len(wa) + len(wb), len(wa)), cap, "shuffle")
            for w, n in _shuffle_words(tuple(wa), tuple(wb)):
                w = Word(w)
                acc[w] = acc.get(w, 0) + ca * cb * n
    return Polynomial(acc)


def char_polynomial(alphabet: Alphabet, k: int, cap: int = DEFAULT_WORD_CAP) -> Polynomial:
    """Sum of all words of length ``k``, each with coefficient 1."""
    return Polynomial({w: 1 for w in enumerate_words(alphabet, k, cap=cap)})


def multinomial_shuffle_expansion(
    alphabet: Alphabet, exponents: Sequence[int], cap: int = DEFAULT_WORD_CAP
) -> Polynomial:
    """``x_{a_0}^{r_0} sh x_{a_1}^{r_1} sh ...`` over the letters ``a_j`` of the alphabet.

    ``exponents[j]`` is the power of the ``j``-th letter of ``alphabet.letters``.
    """
    if len(exponents) != alphabet.size:
        raise ValueError(f"expected {alphabet.size} exponents, got {len(exponents)}")
    if any(r < 0 for r in exponents):
        raise ValueError("exponents must be nonnegative")
    k = sum(exponents)
    n_terms = math.factorial(k)
    for r in exponents:
        n_terms //= math.factorial(r)
    _check_cap(n_terms, cap, "multinomial shuffle")
    out = Polynomial.word(EMPTY)
    for letter, r in zip(alphabet.letters, exponents):
        out = shuffle(out, Polynomial.word(Word.power(letter, r)), cap=cap)
    return out
