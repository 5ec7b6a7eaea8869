"""Iterated integrals and truncated evaluation of Chen-Fliess operators.

``E_eta[u]`` is defined by ``E_empty = 1`` and
``E_{x_i eta}[u](t) = int_{t0}^t u_i(tau) E_eta[u](tau) dtau``: the leftmost
letter is integrated last.

On a sampled input the integrals are computed exactly for the path whose
coordinates are the cumulative trapezoid integrals of the channels, linear on
each grid interval.  Chen's identity then gives, for a word ``v`` and a step
with per-channel increments ``d_i``,

    E_v(t_{k+1}) = sum_{j=0}^{|v|} d_{v_0} ... d_{v_{j-1}} / j! * E_{v[j:]}(t_k).

``E_{x_i}`` is the cumulative trapezoid integral of ``u_i``, and shuffle
identities such as ``E_{x_i^k} = E_{x_i}^k / k!`` hold to rounding, so the
integral bounds used for the tail estimate apply to the discrete model as
well.  Words made of a single repeated letter are evaluated through that
closed form, which avoids the error growth of the recursive route (it is
severe when the input lies outside the convergence radius).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ResourceCapError
from .series import GrowthCertificate, Series, linear_combination
from .signals import Exponent, Signal, conjugate_exponent, lp_norm, parse_exponent, running_integral
from .topology import ell_infty_M_norm
from .words import (
    DEFAULT_WORD_CAP,
    Alphabet,
    Polynomial,
    Word,
    as_word,
    count_words_upto,
    multinomial_shuffle_expansion,
)

DEFAULT_TAIL_TARGET = 1e-8


def _check_letters(word: Sequence[int], u: Signal) -> None:
    bad = [i for i in word if i > u.m]
    if bad:
        raise ValueError(f"word {Word(word)} uses letters {bad} but the signal has {u.m} channels")


class IteratedIntegrals:
    """Memo of ``E_eta[u]`` for one signal, keyed by word; suffixes are shared."""

    def __init__(self, u: Signal):
        self.u = u
        self._memo: Dict[Word, np.ndarray] = {}
        self._first: Dict[int, np.ndarray] = {}
        self._incr: Dict[int, np.ndarray] = {}

    def increment(self, i: int) -> np.ndarray:
        if i not in self._incr:
            self._incr[i] = self.u.increments([i])[0]
        return self._incr[i]

    def first(self, i: int) -> np.ndarray:
        """``E_{x_i}``: cumulative integral of channel ``i``."""
        if i not in self._first:
            out = np.zeros(self.u.n_points)
            np.cumsum(self.increment(i), out=out[1:])
            self._first[i] = out
        return self._first[i]

    def get(self, word) -> np.ndarray:
        w = as_word(word)
        hit = self._memo.get(w)
        if hit is not None:
            return hit
        _check_letters(w, self.u)
        L = len(w)
        if L == 0:
            out = np.ones(self.u.n_points)
        elif w.is_power():
            out = self.first(w[0]) ** L / math.factorial(L)
        else:
            inc = np.zeros(self.u.n)
            pref = np.ones(self.u.n)
            for j in range(1, L + 1):
                pref = pref * self.increment(w[j - 1])
                inc += pref * self.get(w[j:])[:-1] / math.factorial(j)
            out = np.zeros(self.u.n_points)
            np.cumsum(inc, out=out[1:])
        out.setflags(write=False)
        self._memo[w] = out
        return out

    def matrix(self, words: Sequence) -> np.ndarray:
        return np.array([self.get(w) for w in words]).reshape(len(words), self.u.n_points)


def integrals_for(u: Signal) -> IteratedIntegrals:
    """The memo attached to ``u`` (created on first use)."""
    cache = u._cache.get("iterated")
    if cache is None:
        cache = u._cache["iterated"] = IteratedIntegrals(u)
    return cache


def iterated_integral(word, u: Signal, method: str = "chen") -> np.ndarray:
    """``E_eta[u]`` on the grid of ``u``.

    ``method="trapezoid"`` applies the cumulative trapezoid rule to
    ``u_i * E_eta`` one letter at a time instead; it agrees with the default
    to ``O(dt**2)`` but does not preserve shuffle identities.
    """
    w = as_word(word)
    if method == "chen":
        return integrals_for(u).get(w)
    if method != "trapezoid":
        raise ValueError(f"unknown method {method!r}")
    _check_letters(w, u)
    E = np.ones(u.n_points)
    for i in reversed(w):
        E = running_integral(u.channel(i) * E, u.dt)
    return E


def iterated_integral_levels(
    u: Signal, alphabet: Alphabet, N: int, cap: int = DEFAULT_WORD_CAP
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(k, E_k)`` with ``E_k`` of shape ``(size**k, n_points)`` for ``k = 0..N``.

    Rows follow the canonical word order of each level.
    """
    _check_letters(alphabet.letters, u)
    total = count_words_upto(alphabet, N)
    if total > cap:
        raise ResourceCapError(f"X^<={N} has {total} words, over the cap of {cap}")
    S, n = alphabet.size, u.n
    delta = u.increments(alphabet.letters)
    first = np.zeros((S, n + 1))
    np.cumsum(delta, axis=1, out=first[:, 1:])
    E: List[np.ndarray] = [np.ones((1, n + 1))]
    P: List[np.ndarray] = [np.ones((1, n))]
    yield 0, E[0]
    for k in range(1, N + 1):
        P.append((P[-1][:, None, :] * delta[None, :, :]).reshape(S**k, n))
        inc = np.zeros((S**k, n))
        for j in range(1, k + 1):
            view = inc.reshape(S**j, S ** (k - j), n)
            view += P[j][:, None, :] * (E[k - j][None, :, :-1] / math.factorial(j))
        Ek = np.zeros((S**k, n + 1))
        np.cumsum(inc, axis=1, out=Ek[:, 1:])
        step = (S**k - 1) // (S - 1) if S > 1 else 0
        for p in range(S):
            Ek[p * step] = first[p] ** k / math.factorial(k)
        E.append(Ek)
        yield k, Ek


class RadiusCheck(NamedTuple):
    u_l1: float
    T: float
    threshold: float
    ok: bool
    n_letters: int
    drift: bool = True

    @property
    def R(self) -> float:
        """Largest L1 norm over the letters in use; the drift letter contributes ``T``."""
        return max(self.u_l1, self.T) if self.drift else self.u_l1

    @property
    def ratio(self) -> float:
        """``M R (m+1)``; the operator series converges geometrically when below 1."""
        return self.R / self.threshold


def input_l1(u: Signal, alphabet: Optional[Alphabet] = None) -> float:
    channels = [i for i in (alphabet.letters if alphabet else range(1, u.m + 1)) if i >= 1]
    norms = lp_norm(u, 1).per_channel
    return max((norms[i - 1] for i in channels), default=0.0)


def radius_check(
    certificate: GrowthCertificate, u: Signal, alphabet: Optional[Alphabet] = None
) -> RadiusCheck:
    """Test ``R < 1 / (M (m+1))`` with ``R = max(||u||_1, T)``.

    ``m + 1`` is the number of letters: ``alphabet.size`` when an alphabet is
    given, otherwise the stored channels plus the drift letter.  Without the
    drift letter ``T`` drops out of ``R``.
    """
    if certificate.s > 1:
        raise ValueError("the radius test needs a certificate with Gevrey order s <= 1")
    n_letters = alphabet.size if alphabet is not None else u.m + 1
    l1 = input_l1(u, alphabet)
    threshold = 1.0 / (certificate.M * n_letters)
    drift = alphabet.drift if alphabet is not None else True
    R = max(l1, u.T) if drift else l1
    return RadiusCheck(l1, u.T, threshold, R < threshold, n_letters, drift)


def tail_bound(certificate: GrowthCertificate, rc: RadiusCheck, N: int) -> float:
    """Uniform bound on the words longer than ``N``: ``K rho^(N+1) / (1 - rho)``."""
    if not rc.ok:
        return math.inf
    rho = rc.ratio
    return certificate.K * rho ** (N + 1) / (1.0 - rho)


def default_truncation(certificate: GrowthCertificate, rc: RadiusCheck, target: float = DEFAULT_TAIL_TARGET) -> int:
    """Smallest ``N`` whose tail bound is below ``target`` (radius must hold)."""
    if not rc.ok:
        raise ValueError("no certified truncation outside the convergence radius; pass N explicitly")
    rho = rc.ratio
    if certificate.K == 0 or rho == 0:
        return 0
    N = max(0, math.ceil(math.log(target * (1 - rho) / certificate.K) / math.log(rho)) - 1)
    while tail_bound(certificate, rc, N) >= target:
        N += 1
    return N


@dataclass
class EvalResult:
    y: Signal
    N: int
    tail_bound: float
    radius_ok: bool
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if math.isfinite(self.tail_bound) and self.tail_bound > 0 and not self.radius_ok:
            raise ValueError("a finite nonzero tail bound requires the radius condition")

    @property
    def t(self) -> np.ndarray:
        return self.y.times

    @property
    def values(self) -> np.ndarray:
        """Output samples, shape ``(ell, n_points)``."""
        return self.y.samples

    def to_dict(self) -> dict:
        def f(x):
            return "inf" if x == math.inf else x

        return {
            "N": self.N,
            "tail_bound": f(self.tail_bound),
            "radius_ok": self.radius_ok,
            "constants": {k: f(v) for k, v in self.constants.items()},
        }

    def to_csv(self, path, sidecar: bool = True) -> None:
        """Write ``t,y1..yell`` and, next to it, a JSON sidecar with the bound data."""
        self.y.to_csv(path, prefix="y")
        if sidecar:
            with open(f"{path}.json", "w") as fh:
                json.dump(self.to_dict(), fh, indent=2)


def evaluate_truncated(
    c: Series, u: Signal, N: Optional[int] = None, cap: int = DEFAULT_WORD_CAP
) -> EvalResult:
    """``y(t) = sum_{|eta| <= N} (c, eta) E_eta[u](t)``.

    With a certificate of Gevrey order at most 1 and ``u`` inside the radius,
    the result carries the geometric tail bound; otherwise the bound is
    ``inf`` (and 0 for a polynomial whose support fits within ``N``).
    ``N`` defaults to the smallest certified truncation reaching 1e-8, or to
    the degree of a polynomial.
    """
    alphabet = c.alphabet
    _check_letters(alphabet.letters, u)
    cert = c.certificate if c.certificate is not None and c.certificate.s <= 1 else None
    rc = radius_check(cert, u, alphabet) if cert is not None else None
    if N is None:
        if rc is not None and rc.ok:
            N = default_truncation(cert, rc)
            if not c.is_finite:
                N = min(N, int(c.horizon))
        elif c.is_finite:
            N = max(c.degree(), 0)
        else:
            raise ValueError("no certified truncation is available for this series and input; pass N")
    if N < 0:
        raise ValueError("N must be nonnegative")

    y = np.zeros((c.ell, u.n_points))
    if c.is_finite:
        E = integrals_for(u)
        for w, v in c.items_upto(N):
            y += np.outer(v, E.get(w))
        empty_tail = c.degree() <= N
    else:
        c.check_horizon(N)
        for k, Ek in iterated_integral_levels(u, alphabet, N, cap=cap):
            coeffs = c.level_coefficients(k, cap=cap)
            nz = np.any(coeffs != 0, axis=1)
            if np.any(nz):
                y += coeffs[nz].T @ Ek[nz]
        empty_tail = False

    constants = {"m": alphabet.size - 1, "n_letters": alphabet.size, "T": u.T}
    if empty_tail:
        tb = 0.0
    elif rc is not None:
        tb = tail_bound(cert, rc, N)
    else:
        tb = math.inf
    if rc is not None:
        constants.update(K=cert.K, M=cert.M, R=rc.R, u_l1=rc.u_l1, threshold=rc.threshold)
        if rc.ok:
            constants["S"] = cert.K / (1.0 - rc.ratio)
    return EvalResult(Signal(y, u.dt, u.t0), N, tb, bool(rc.ok) if rc is not None else False, constants)


def evaluate_polynomial(p: Polynomial, u: Signal) -> np.ndarray:
    """``E_p[u]`` for a scalar polynomial, by linearity."""
    E = integrals_for(u)
    out = np.zeros(u.n_points)
    for w, coef in p.items():
        out += float(coef) * E.get(w)
    return out


class IntegralBoundCheck(NamedTuple):
    ok: bool
    margin: float
    abs_margin: float
    product_margin: float
    radius_margin: float


def lemma2_bound_check(word, u: Signal, tol: float = 1e-8) -> IntegralBoundCheck:
    """Check the iterated-integral bounds for ``word`` pointwise on the grid.

    1. ``|E_eta[u]| <= E_eta[|u|]``;
    2. for ``P = x_0^{r_0} sh ... sh x_m^{r_m}`` with ``r_j`` the letter counts
       of ``word``: ``|E_P[u]| <= prod_j U_j^{r_j} / r_j!`` with
       ``U_j = int |u_j|``;
    3. ``|E_P[u]| <= R^k / prod_j r_j!`` with ``R = max(||u||_1, T)``.

    Each margin is the smallest slack (bound minus value) over the grid.
    """
    w = as_word(word)
    _check_letters(w, u)
    ubar = u.abs()
    abs_margin = float(np.min(iterated_integral(w, ubar) - np.abs(iterated_integral(w, u))))

    alphabet = Alphabet(u.m)
    r = [w.count(i) for i in alphabet.letters]
    P = multinomial_shuffle_expansion(alphabet, r)
    EP = np.abs(evaluate_polynomial(P, u))
    prod = np.ones(u.n_points)
    denom = 1
    for i, ri in zip(alphabet.letters, r):
        U = running_integral(np.abs(u.channel(i)), u.dt)
        prod *= U**ri / math.factorial(ri)
        denom *= math.factorial(ri)
    product_margin = float(np.min(prod - EP))
    R = max(input_l1(u), u.T)
    radius_margin = float(R ** len(w) / denom - np.max(EP))
    margin = min(abs_margin, product_margin, radius_margin)
    return IntegralBoundCheck(margin >= -tol, margin, abs_margin, product_margin, radius_margin)


class ProbeRow(NamedTuple):
    input_dist: float
    output_dist: float


def _output_dist(a: EvalResult, b: EvalResult, q: float) -> float:
    return lp_norm(a.y - b.y, q).value


def continuity_probe(
    c: Series,
    u: Signal,
    perturbations: Sequence[Signal],
    p: Exponent = 2,
    N: Optional[int] = None,
) -> List[ProbeRow]:
    """Empirical modulus of continuity ``(||v-u||_p, ||F_c[v]-F_c[u]||_q)``, ``q`` conjugate to ``p``.

    Pick ``u`` strictly inside the convergence radius: on the boundary the
    perturbed inputs may leave the ball and the rows say nothing.
    """
    p = parse_exponent(p)
    q = conjugate_exponent(p)
    base = evaluate_truncated(c, u, N)
    rows = []
    for v in perturbations:
        u.check_same_grid(v)
        if v.m != u.m:
            raise ValueError("perturbed inputs must have the same channel count")
        out = evaluate_truncated(c, v, base.N)
        rows.append(ProbeRow(lp_norm(v - u, p).value, _output_dist(out, base, q)))
    return rows


def scaled_perturbations(u: Signal, direction: Signal, scales: Sequence[float]) -> List[Signal]:
    """``u + eps * direction`` for each ``eps``."""
    return [u + direction * float(eps) for eps in scales]


class JointProbeRow(NamedTuple):
    joint: float
    series_term: float
    input_term: float
    series_norm: float
    phi_bound: float

    @property
    def split_slack(self) -> float:
        """``series_term + input_term - joint``; nonnegative by the triangle inequality."""
        return self.series_term + self.input_term - self.joint

    @property
    def bound_slack(self) -> float:
        """Same split with the series term replaced by its operator-norm bound."""
        return self.phi_bound + self.input_term - self.joint


def joint_continuity_probe(
    c: Series,
    u: Signal,
    series_perturbations: Sequence[Series],
    input_perturbations: Sequence[Signal],
    M: float,
    p: Exponent = 2,
    N: Optional[int] = None,
) -> List[JointProbeRow]:
    """Compare ``||F_{c'}[u] - F_c[v]||_q`` with the two single-variable distances.

    For each pair ``(c', v)`` the joint distance is split as
    ``||F_{c'}[u] - F_c[u]||_q + ||F_c[u] - F_c[v]||_q``.  The first term is
    also bounded by ``T^(1/q) ||c' - c||_M / (1 - M R (m+1))`` with ``R`` taken
    over both inputs (``inf`` outside the radius).
    """
    p = parse_exponent(p)
    q = conjugate_exponent(p)
    if len(series_perturbations) != len(input_perturbations):
        raise ValueError("pair each series perturbation with an input perturbation")
    base = evaluate_truncated(c, u, N)
    Nb = base.N
    n_letters = c.alphabet.size
    rows = []
    for c2, v in zip(series_perturbations, input_perturbations):
        u.check_same_grid(v)
        y_c2_u = evaluate_truncated(c2, u, Nb)
        y_c_v = evaluate_truncated(c, v, Nb)
        joint = _output_dist(y_c2_u, y_c_v, q)
        series_term = _output_dist(y_c2_u, base, q)
        input_term = _output_dist(base, y_c_v, q)
        diff = linear_combination(1.0, c2, -1.0, c)
        cn = ell_infty_M_norm(diff, M, None if diff.is_finite else Nb).value
        R = max(input_l1(u, c.alphabet), input_l1(v, c.alphabet), u.T)
        rho = M * R * n_letters
        Tq = 1.0 if q == math.inf else u.T ** (1.0 / q)
        phi = Tq * cn / (1.0 - rho) if rho < 1 else math.inf
        rows.append(JointProbeRow(joint, series_term, input_term, cn, phi))
    return rows
