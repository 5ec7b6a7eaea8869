"""Named series used in examples and by the command line.

Most of these live on the single-letter alphabet ``{x1}`` (no drift letter),
where ``(c, x1^k)`` is the only coefficient of length ``k``.
"""
from __future__ import annotations

import math
import re
from functools import lru_cache
from typing import Callable, Dict

from .series import GrowthCertificate, Series, geometric_horizon
from .words import Alphabet, Word

SINGLE_LETTER = Alphabet(1, drift=False)

EXAMPLE31_HORIZON = geometric_horizon(1.0, s=2.0)
CATALAN_HORIZON = 120


def _x1(k: int) -> Word:
    return Word.power(1, k)


def factorial_geometric(M: float, alphabet: Alphabet = SINGLE_LETTER, horizon=None) -> Series:
    """``(c, eta) = M**|eta| * |eta|!`` on every word; sits exactly on the ``M`` growth bound."""
    M = float(M)
    horizon = geometric_horizon(M) if horizon is None else horizon
    return Series.generated(
        lambda w: M ** len(w) * math.factorial(len(w)),
        alphabet,
        horizon,
        certificate=GrowthCertificate(1.0, M, 1.0),
        name=f"factorial_geometric({M:g})",
    )


def geometric(M: float, alphabet: Alphabet = SINGLE_LETTER, horizon=None) -> Series:
    """``(c, eta) = M**|eta|`` (Gevrey order 0)."""
    M = float(M)
    horizon = geometric_horizon(M, s=0.0) if horizon is None else horizon
    return Series.generated(
        lambda w: M ** len(w),
        alphabet,
        horizon,
        certificate=GrowthCertificate(1.0, M, 0.0),
        name=f"geometric({M:g})",
    )


def banach_example(j: int) -> Series:
    """``j! x1^j``: norm ``M**-j`` at weight ``M``, so it tends to zero only for ``M > 1``."""
    return Series.polynomial({_x1(j): math.factorial(j)}, SINGLE_LETTER, name=f"banach_example({j})")


def squared_factorial_partial(j: int) -> Series:
    """``sum_{k<=j} (k!)**2 x1^k``."""
    terms = {_x1(k): float(math.factorial(k) ** 2) for k in range(j + 1)}
    return Series.polynomial(terms, SINGLE_LETTER, name=f"squared_factorial_partial({j})")


def squared_factorial(horizon: int = EXAMPLE31_HORIZON) -> Series:
    """``sum_k (k!)**2 x1^k``; no ``M`` bounds it, so it lies outside every weighted space."""
    return Series.generated(
        lambda w: float(math.factorial(len(w)) ** 2),
        SINGLE_LETTER,
        horizon,
        certificate=GrowthCertificate(1.0, 1.0, 2.0),
        name="squared_factorial",
    )


def fixed_input_member(j: int, Ma: float = 1.0, Mb: float = 7.0) -> Series:
    """``factorial_geometric(M_j)`` with ``M_j = Mb - (Mb - Ma) / j``; tends to ``Mb`` as ``j`` grows."""
    return factorial_geometric(Mb - (Mb - Ma) / j)


@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def _catalan_coefficient(n: int, exponent: float) -> float:
    if n == 0:
        return 0.0
    return float(math.factorial(n) * catalan(n)) * n**exponent


def catalan_exponent(j) -> float:
    """``(5j - 2) / (2j)``; ``j = inf`` gives the limit ``5/2``."""
    if j == math.inf:
        return 2.5
    return (5 * j - 2) / (2 * j)


def catalan_gevrey(j, horizon: int = CATALAN_HORIZON) -> Series:
    """``(d_j, x1^n) = n! * n**((5j-2)/(2j)) * C_n`` with ``C_n`` the Catalan numbers.

    Weighted by ``M**n n!`` the coefficients are ``n**a C_n / M**n``: bounded
    at ``M = 4`` only for ``a <= 3/2`` (that is, ``j = 1``).
    """
    a = catalan_exponent(j)
    name = "catalan_limit" if j == math.inf else f"catalan_gevrey({j})"
    return Series.generated(
        lambda w: _catalan_coefficient(len(w), a), SINGLE_LETTER, horizon, name=name
    )


def catalan_limit(horizon: int = CATALAN_HORIZON) -> Series:
    return catalan_gevrey(math.inf, horizon)


def constant(value: float = 1.0, alphabet: Alphabet = SINGLE_LETTER) -> Series:
    return Series.polynomial({Word(): value}, alphabet, certificate=GrowthCertificate(abs(value), 1.0, 0.0))


BUILTINS: Dict[str, Callable[..., Series]] = {
    "factorial_geometric": factorial_geometric,
    "geometric": geometric,
    "banach_example": banach_example,
    "example31": squared_factorial_partial,
    "example31_limit": squared_factorial,
    "fixed_u": fixed_input_member,
    "catalan_gevrey": catalan_gevrey,
    "catalan_limit": catalan_limit,
    "constant": constant,
    "zero": lambda: Series.zero(SINGLE_LETTER),
}

_CALL = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\(([^)]*)\))?\s*$")


def _number(text: str):
    text = text.strip()
    if text in ("inf", "infinity"):
        return math.inf
    try:
        return int(text)
    except ValueError:
        return float(text)


def builtin_series(text: str) -> Series:
    """Parse ``name`` or ``name(arg, ...)`` into one of :data:`BUILTINS`."""
    match = _CALL.match(text)
    if not match or match.group(1) not in BUILTINS:
        raise ValueError(f"unknown built-in series {text!r}; choose from {', '.join(sorted(BUILTINS))}")
    args = [_number(a) for a in match.group(2).split(",") if a.strip()] if match.group(2) else []
    return BUILTINS[match.group(1)](*args)
