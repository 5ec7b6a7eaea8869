"""Generating series: finite-support polynomials and generator-backed series.

A :class:`Series` maps words to vectors in R^ell.  Finite-support series keep
an explicit word -> coefficient table.  Infinite series are represented by a
deterministic coefficient function together with a horizon ``L_max``: words
longer than the horizon cannot be queried, which keeps every truncation
explicit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from .exceptions import HorizonError, ResourceCapError
from .words import (
    DEFAULT_WORD_CAP,
    EMPTY,
    Alphabet,
    Polynomial,
    Word,
    as_word,
    enumerate_words,
    count_words_upto,
)

CoefficientFn = Callable[[Word], Union[float, Iterable[float]]]


def log_factorial(k: int) -> float:
    return math.lgamma(k + 1)


@dataclass(frozen=True)
class GrowthCertificate:
    """Claim that ``|(c, eta)| <= K * M**|eta| * (|eta|!)**s`` for every word.

    ``heuristic`` marks certificates fitted from finitely many coefficients
    rather than proven.
    """

    K: float
    M: float
    s: float = 1.0
    heuristic: bool = False

    def __post_init__(self):
        if not self.K >= 0:
            raise ValueError(f"K must be nonnegative, got {self.K}")
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        if not self.s >= 0:
            raise ValueError(f"s must be nonnegative, got {self.s}")

    @property
    def locally_convergent(self) -> bool:
        """Gevrey order at most 1."""
        return self.s <= 1.0

    def log_bound(self, k: int) -> float:
        if self.K == 0:
            return -math.inf
        return math.log(self.K) + k * math.log(self.M) + self.s * log_factorial(k)

    def bound(self, k: int) -> float:
        lb = self.log_bound(k)
        return 0.0 if lb == -math.inf else (math.exp(lb) if lb < 709 else math.inf)

    def to_dict(self) -> dict:
        return {"K": self.K, "M": self.M, "s": self.s, "heuristic": self.heuristic}

    @classmethod
    def from_dict(cls, d: Mapping) -> "GrowthCertificate":
        return cls(float(d["K"]), float(d["M"]), float(d.get("s", 1.0)), bool(d.get("heuristic", False)))


@dataclass(frozen=True)
class UltrametricParams:
    sigma: float = 0.5

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must lie strictly between 0 and 1, got {self.sigma}")


class Order(NamedTuple):
    """Result of :func:`order`.

    When ``exact`` is False no nonzero coefficient was found up to the scan
    limit and ``value`` is the certified lower bound ``J + 1``.
    """

    value: float
    exact: bool


class Distance(NamedTuple):
    """Ultrametric distance; an upper bound when ``exact`` is False."""

    value: float
    exact: bool


def _as_vector(value, ell: int) -> np.ndarray:
    v = np.array(value, dtype=float).reshape(-1)
    if v.size == 1 and ell > 1:
        raise ValueError(f"expected a coefficient vector of length {ell}, got a scalar")
    if v.size != ell:
        raise ValueError(f"expected a coefficient vector of length {ell}, got {v.size}")
    v.setflags(write=False)
    return v


class Series:
    """A formal power series over ``alphabet`` with coefficients in R^ell.

    Build instances with :meth:`polynomial` (finite support) or
    :meth:`generated` (coefficient function plus horizon).
    """

    def __init__(
        self,
        alphabet: Alphabet,
        ell: int = 1,
        *,
        terms: Optional[Mapping] = None,
        generator: Optional[CoefficientFn] = None,
        horizon: Optional[int] = None,
        certificate: Optional[GrowthCertificate] = None,
        name: Optional[str] = None,
    ):
        if ell < 1:
            raise ValueError("ell must be positive")
        if (terms is None) == (generator is None):
            raise ValueError("give exactly one of terms= or generator=")
        self.alphabet = alphabet
        self.ell = int(ell)
        self.certificate = certificate
        self.name = name
        self._generator = generator
        self._terms: Optional[Dict[Word, np.ndarray]] = None
        if terms is not None:
            table = {}
            for w, c in terms.items():
                w = as_word(w)
                alphabet.check_word(w)
                v = _as_vector(c, self.ell)
                if np.any(v != 0):
                    table[w] = v
            self._terms = table
            self._horizon = math.inf
        else:
            if horizon is None or horizon < 0:
                raise ValueError("generated series need a nonnegative horizon")
            self._horizon = int(horizon)

    # -- constructors -------------------------------------------------------
    @classmethod
    def polynomial(cls, terms: Mapping, alphabet: Alphabet, ell: int = 1, **kw) -> "Series":
        return cls(alphabet, ell, terms=terms, **kw)

    @classmethod
    def from_polynomial(cls, p: Polynomial, alphabet: Alphabet, **kw) -> "Series":
        return cls(alphabet, 1, terms={w: float(c) for w, c in p.items()}, **kw)

    @classmethod
    def generated(
        cls,
        fn: CoefficientFn,
        alphabet: Alphabet,
        horizon: int,
        ell: int = 1,
        certificate: Optional[GrowthCertificate] = None,
        name: Optional[str] = None,
    ) -> "Series":
        return cls(alphabet, ell, generator=fn, horizon=horizon, certificate=certificate, name=name)

    @classmethod
    def zero(cls, alphabet: Alphabet, ell: int = 1) -> "Series":
        return cls(alphabet, ell, terms={})

    # -- queries ------------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self._terms is not None

    @property
    def horizon(self) -> float:
        """Longest queryable word length (``inf`` for finite support)."""
        return self._horizon

    @property
    def terms(self) -> Dict[Word, np.ndarray]:
        if self._terms is None:
            raise TypeError("generated series have no explicit term table")
        return dict(self._terms)

    def support(self) -> List[Word]:
        return sorted(self.terms, key=Word.sort_key)

    def degree(self) -> int:
        """Length of the longest supported word of a finite series (-1 for zero)."""
        return max((len(w) for w in self.terms), default=-1)

    def check_horizon(self, J: float) -> None:
        if J > self._horizon:
            raise HorizonError(
                f"series {self.name or ''} is only queryable up to length {self._horizon}, asked for {J}"
            )

    def coefficient(self, word) -> np.ndarray:
        w = as_word(word)
        if self._terms is not None:
            v = self._terms.get(w)
            return np.zeros(self.ell) if v is None else v
        self.check_horizon(len(w))
        self.alphabet.check_word(w)
        return _as_vector(self._generator(w), self.ell)

    def level_coefficients(self, k: int, cap: int = DEFAULT_WORD_CAP) -> np.ndarray:
        """Coefficients of all words of length ``k`` as a ``(size**k, ell)`` array."""
        words = enumerate_words(self.alphabet, k, cap=cap)
        if self._terms is not None:
            zero = np.zeros(self.ell)
            return np.array([self._terms.get(w, zero) for w in words]).reshape(len(words), self.ell)
        self.check_horizon(k)
        return np.array([_as_vector(self._generator(w), self.ell) for w in words]).reshape(
            len(words), self.ell
        )

    def items_upto(self, J: int, cap: int = DEFAULT_WORD_CAP):
        """Yield ``(word, coefficient)`` for the nonzero coefficients in X^<=J."""
        if self._terms is not None:
            for w in self.support():
                if len(w) <= J:
                    yield w, self._terms[w]
            return
        self.check_horizon(J)
        if count_words_upto(self.alphabet, J) > cap:
            raise ResourceCapError(f"X^<={J} exceeds the word cap of {cap}")
        for k in range(J + 1):
            for w in enumerate_words(self.alphabet, k, cap=cap):
                v = self.coefficient(w)
                if np.any(v != 0):
                    yield w, v

    def truncate(self, J: int) -> "Series":
        """The polynomial keeping only words of length at most ``J``."""
        return Series(
            self.alphabet, self.ell, terms=dict(self.items_upto(J)), certificate=self.certificate
        )

    def with_certificate(self, certificate: Optional[GrowthCertificate]) -> "Series":
        out = object.__new__(Series)
        out.__dict__.update(self.__dict__)
        out.certificate = certificate
        return out

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "Series") -> "Series":
        return linear_combination(1.0, self, 1.0, other)

    def __sub__(self, other: "Series") -> "Series":
        return linear_combination(1.0, self, -1.0, other)

    def __neg__(self) -> "Series":
        return linear_combination(-1.0, self, 0.0, Series.zero(self.alphabet, self.ell))

    def __mul__(self, a: float) -> "Series":
        return linear_combination(float(a), self, 0.0, Series.zero(self.alphabet, self.ell))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        if not (self.is_finite and other.is_finite):
            return self is other
        if self.alphabet != other.alphabet or self.ell != other.ell:
            return False
        if self._terms.keys() != other._terms.keys():
            return False
        return all(np.array_equal(v, other._terms[w]) for w, v in self._terms.items())

    __hash__ = object.__hash__

    def __repr__(self):
        if self._terms is None:
            return f"Series(<{self.name or 'generated'}>, horizon={self._horizon})"
        parts = []
        for w in self.support():
            v = self._terms[w]
            parts.append(f"{v[0]:g}*{w}" if self.ell == 1 else f"{v.tolist()}*{w}")
        return f"Series({' + '.join(parts) or '0'})"

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        if self._terms is None:
            raise TypeError("only finite-support series serialize to JSON; truncate first")
        d = {
            "m": self.alphabet.m,
            "ell": self.ell,
            "terms": [{"word": str(w), "coeff": self._terms[w].tolist()} for w in self.support()],
        }
        if not self.alphabet.drift:
            d["drift"] = False
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_dict()
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "Series":
        alphabet = Alphabet(int(d["m"]), bool(d.get("drift", True)))
        ell = int(d.get("ell", 1))
        terms: Dict[Word, np.ndarray] = {}
        for t in d.get("terms", []):
            w = Word.parse(t["word"])
            v = np.array(t["coeff"], dtype=float).reshape(-1)
            terms[w] = terms[w] + v if w in terms else v
        cert = d.get("certificate")
        return cls(
            alphabet, ell, terms=terms, certificate=GrowthCertificate.from_dict(cert) if cert else None
        )

    @classmethod
    def from_json(cls, text: str) -> "Series":
        return cls.from_dict(json.loads(text))


def coefficient(c: Series, word) -> np.ndarray:
    return c.coefficient(word)


def _check_compatible(c: Series, d: Series) -> None:
    if c.alphabet != d.alphabet:
        raise ValueError(f"alphabets differ: {c.alphabet} vs {d.alphabet}")
    if c.ell != d.ell:
        raise ValueError(f"output dimensions differ: {c.ell} vs {d.ell}")


def order(c: Series, search_limit: Optional[int] = None, cap: int = DEFAULT_WORD_CAP) -> Order:
    """Length of the shortest word with a nonzero coefficient.

    Finite series give an exact answer (``inf`` for the zero series).  For
    generated series the scan covers X^<=J with ``J = search_limit`` (default:
    the horizon); if nothing is found the result is the lower bound ``J + 1``.
    """
    if c.is_finite:
        return Order(min((len(w) for w in c.terms), default=math.inf), True)
    J = c.horizon if search_limit is None else min(search_limit, c.horizon)
    for k in range(int(J) + 1):
        if np.any(c.level_coefficients(k, cap=cap) != 0):
            return Order(k, True)
    return Order(J + 1, False)


def ultrametric_dist(
    c: Series,
    d: Series,
    params: UltrametricParams = UltrametricParams(),
    search_limit: Optional[int] = None,
) -> Distance:
    """``sigma ** ord(c - d)``; an upper bound when the order scan is truncated."""
    _check_compatible(c, d)
    o = order(linear_combination(1.0, c, -1.0, d), search_limit)
    value = 0.0 if o.value == math.inf else params.sigma ** o.value
    return Distance(value, o.exact)


def linear_combination(a: float, c: Series, b: float, d: Series) -> Series:
    """Coefficient-wise ``a*c + b*d``.

    Two finite series stay finite.  Otherwise the result is generated with the
    smaller of the two horizons, and carries a certificate when both inputs
    do (or a side is multiplied by zero).
    """
    _check_compatible(c, d)
    if c.is_finite and d.is_finite:
        acc: Dict[Word, np.ndarray] = {}
        for w, v in c.terms.items():
            acc[w] = a * v
        for w, v in d.terms.items():
            acc[w] = acc[w] + b * v if w in acc else b * v
        cert = _combine_certificates(a, c, b, d)
        return Series(c.alphabet, c.ell, terms=acc, certificate=cert)

    horizon = min(c.horizon, d.horizon)

    def fn(w: Word, _a=a, _b=b, _c=c, _d=d):
        return _a * _c.coefficient(w) + _b * _d.coefficient(w)

    return Series(
        c.alphabet,
        c.ell,
        generator=fn,
        horizon=int(horizon),
        certificate=_combine_certificates(a, c, b, d),
    )


def _combine_certificates(a: float, c: Series, b: float, d: Series) -> Optional[GrowthCertificate]:
    parts = [(abs(w), s.certificate) for w, s in ((a, c), (b, d)) if w != 0]
    if not parts:
        return GrowthCertificate(0.0, 1.0, 0.0)
    if any(cert is None for _, cert in parts):
        return None
    return GrowthCertificate(
        K=sum(w * cert.K for w, cert in parts),
        M=max(cert.M for _, cert in parts),
        s=max(cert.s for _, cert in parts),
        heuristic=any(cert.heuristic for _, cert in parts),
    )


def geometric_horizon(M: float, s: float = 1.0, limit: int = 170) -> int:
    """Largest length whose coefficient ``M**k * (k!)**s`` still fits a float."""
    k = 0
    while k < limit and (k + 1) * math.log(M) + s * log_factorial(k + 1) < 700:
        k += 1
    return k


def series_is_zero(c: Series) -> bool:
    return c.is_finite and not c.terms


__all__ = [
    "EMPTY",
    "Distance",
    "GrowthCertificate",
    "Order",
    "Series",
    "UltrametricParams",
    "coefficient",
    "geometric_horizon",
    "linear_combination",
    "log_factorial",
    "order",
    "series_is_zero",
    "ultrametric_dist",
]
