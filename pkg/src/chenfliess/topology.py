"""Weighted sup-norms on series and convergence diagnostics built on them.

For ``M > 0`` the norm is

    ||c||_M = sup_eta |(c, eta)| / (M**|eta| * |eta|!)

Every sup over infinitely many words is computed over X^<=J and labelled:
``exact`` (finite support), ``certified_exact`` (a growth certificate proves
the unscanned tail cannot exceed the scanned value) or ``lower_bound``.
Nothing here is a decision procedure; verdicts are reported relative to the
examined horizon and M-grid.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DegenerateDataError
from .series import GrowthCertificate, Series, linear_combination, log_factorial
from .words import DEFAULT_WORD_CAP, Word, enumerate_words

EXACT = "exact"
LOWER_BOUND = "lower_bound"
CERTIFIED_EXACT = "certified_exact"

DEFAULT_TOL = 1e-6
DEFAULT_SILVA_GRID = tuple(float(k) for k in range(1, 9))
DEFAULT_FRECHET_GRID = tuple(1.0 / k for k in range(1, 9))
# upper-half log-log slope of the level sups above which growth is flagged
GROWTH_SLOPE = 0.25


@dataclass(frozen=True)
class NormEstimate:
    value: float
    attained_at: Optional[Word]
    horizon: float
    status: str
    M: float = 1.0
    level_sups: Tuple[Tuple[int, float], ...] = ()
    tail_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "value": _json_float(self.value),
            "attained_at": None if self.attained_at is None else str(self.attained_at),
            "horizon": _json_float(self.horizon),
            "status": self.status,
            "M": self.M,
            "tail_bound": None if self.tail_bound is None else _json_float(self.tail_bound),
        }


def _json_float(x: float):
    if x == math.inf:
        return "inf"
    return float(x)


def weighted_magnitude(a, M: float, k: int):
    """``a / (M**k * k!)`` computed without spurious rounding for moderate ``k``."""
    a = np.asarray(a, dtype=float)
    try:
        fk = float(math.factorial(k))
        Mk = float(M) ** k
    except OverflowError:
        fk = Mk = math.inf
    if math.isfinite(fk) and math.isfinite(Mk) and Mk > 0:
        return a / fk / Mk
    with np.errstate(divide="ignore"):
        return np.where(a > 0, np.exp(np.log(np.where(a > 0, a, 1.0)) - log_factorial(k) - k * math.log(M)), 0.0)


def _magnitudes(coeffs: np.ndarray) -> np.ndarray:
    # |z| := max_i |z_i| for vector coefficients
    return np.max(np.abs(coeffs), axis=1) if coeffs.size else np.zeros(coeffs.shape[0])


def certified_tail_sup(cert: GrowthCertificate, M: float, J: int, max_steps: int = 10**6) -> float:
    """Upper bound on ``|(c,eta)|/(M^k k!)`` over all words with ``|eta| > J``.

    Returns ``inf`` when the certificate does not force the tail to decay.
    """
    if cert.K == 0:
        return 0.0
    if cert.s > 1 or (cert.s == 1 and cert.M > M):
        return math.inf

    def log_f(k):
        return math.log(cert.K) + k * math.log(cert.M / M) + (cert.s - 1) * log_factorial(k)

    k = J + 1
    best = log_f(k)
    # f(k+1)/f(k) = (Mc/M) (k+1)^(s-1) is nonincreasing in k; walk to the peak
    for _ in range(max_steps):
        if (cert.M / M) * (k + 1) ** (cert.s - 1) <= 1:
            return math.exp(best) if best < 709 else math.inf
        k += 1
        best = max(best, log_f(k))
    return math.inf


def ell_infty_M_norm(
    c: Series, M: float, horizon: Optional[int] = None, cap: int = DEFAULT_WORD_CAP
) -> NormEstimate:
    """``||c||_M`` over X^<=horizon, with a status saying how far it can be trusted."""
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    best, arg = 0.0, None
    levels: List[Tuple[int, float]] = []
    if c.is_finite:
        by_level: Dict[int, float] = {}
        terms = c.terms
        for w in c.support():
            r = float(weighted_magnitude(np.max(np.abs(terms[w])), M, len(w)))
            by_level[len(w)] = max(by_level.get(len(w), 0.0), r)
            if r > best:
                best, arg = r, w
        levels = sorted(by_level.items())
        return NormEstimate(best, arg, c.degree(), EXACT, float(M), tuple(levels))

    J = c.horizon if horizon is None else horizon
    c.check_horizon(J)
    J = int(J)
    for k in range(J + 1):
        mags = weighted_magnitude(_magnitudes(c.level_coefficients(k, cap=cap)), M, k)
        i = int(np.argmax(mags))
        levels.append((k, float(mags[i])))
        if mags[i] > best:
            best = float(mags[i])
            arg = enumerate_words(c.alphabet, k, cap=cap)[i]
    status, tail = LOWER_BOUND, None
    if c.certificate is not None:
        tail = certified_tail_sup(c.certificate, M, J)
        if tail <= best:
            status = CERTIFIED_EXACT
    return NormEstimate(best, arg, J, status, float(M), tuple(levels), tail)


def growth_trend(est: NormEstimate) -> str:
    """Classify the scanned level sups: ``"bounded"`` or ``"growing"``.

    A series is flagged as growing when the log-log slope of its nonzero level
    sups over the upper half of the scan exceeds ``GROWTH_SLOPE``.  Exact and
    certified estimates are always bounded.
    """
    if est.status in (EXACT, CERTIFIED_EXACT):
        return "bounded"
    pts = [(k, w) for k, w in est.level_sups if k >= 1 and w > 0]
    if len(pts) < 3:
        return "bounded"
    kmax = pts[-1][0]
    upper = [(k, w) for k, w in pts if k >= kmax / 2]
    if len(upper) < 3:
        upper = pts[-3:]
    x = np.log([k for k, _ in upper])
    y = np.log([w for _, w in upper])
    slope = np.polyfit(x, y, 1)[0]
    return "growing" if slope > GROWTH_SLOPE else "bounded"


def verify_certificate(
    c: Series, cert: GrowthCertificate, horizon: Optional[int] = None, rtol: float = 1e-12
) -> bool:
    """Check ``|(c,eta)| <= K M^|eta| (|eta|!)^s`` on every scanned word."""
    if c.is_finite:
        items = ((len(w), float(np.max(np.abs(v)))) for w, v in c.terms.items())
    else:
        J = c.horizon if horizon is None else horizon
        c.check_horizon(J)
        items = (
            (k, float(a))
            for k in range(int(J) + 1)
            for a in _magnitudes(c.level_coefficients(k))
        )
    for k, a in items:
        if a == 0:
            continue
        if cert.K == 0 or math.log(a) > cert.log_bound(k) + math.log1p(rtol):
            return False
    return True


def fit_growth_certificate(c: Series, horizon: Optional[int] = None) -> GrowthCertificate:
    """Fit ``(K, M, s)`` from the largest coefficient magnitude on each length level.

    ``log a_k = log K + k log M + s log k!`` is solved by least squares over
    the nonzero levels; ``K`` is then raised to the smallest value making the
    bound hold on all of X^<=horizon, so the returned certificate always
    verifies on the scanned words.  It is marked heuristic.
    """
    J = (c.degree() if c.is_finite else c.horizon) if horizon is None else horizon
    if J < 4:
        raise DegenerateDataError("fitting a growth certificate needs a horizon of at least 4")
    if not c.is_finite:
        c.check_horizon(J)
    J = int(J)
    pts = []
    for k in range(J + 1):
        a = float(np.max(_magnitudes(c.level_coefficients(k)), initial=0.0))
        if a > 0:
            pts.append((k, a))
    if len(pts) < 3:
        raise DegenerateDataError(f"only {len(pts)} nonzero length levels up to {J}; need 3")
    ks = np.array([k for k, _ in pts], dtype=float)
    lf = np.array([log_factorial(int(k)) for k in ks])
    y = np.log([a for _, a in pts])
    A = np.column_stack([np.ones_like(ks), ks, lf])
    (_, logM, s), *_ = np.linalg.lstsq(A, y, rcond=None)
    s = max(0.0, round(float(s), 9))
    if not np.all(np.isfinite([logM, s])):
        raise DegenerateDataError("growth regression did not converge")
    # refit the rate with s pinned so K absorbs only the offset
    (_, logM), *_ = np.linalg.lstsq(A[:, :2], y - s * lf, rcond=None)
    M = math.exp(round(float(logM), 9))
    logK = max(y_k - k * math.log(M) - s * l for y_k, k, l in zip(y, ks, lf))
    return GrowthCertificate(K=math.exp(logK), M=M, s=s, heuristic=True)


@dataclass
class ConvergenceReport:
    """Outcome of a convergence check over an M-grid and a scan horizon."""

    mode: str
    M: Optional[float]
    per_index_norms: Dict[float, List[Tuple[int, float, str]]]
    grid: Tuple[float, ...]
    horizon: Optional[float]
    tol: float
    membership: Dict[float, bool] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.mode != "diverged"

    def norms_at(self, M: float) -> List[float]:
        return [v for _, v, _ in self.per_index_norms[float(M)]]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "M": self.M,
            "grid": list(self.grid),
            "horizon": None if self.horizon is None else _json_float(self.horizon),
            "tol": self.tol,
            "table": [
                {"M": M, "j": j, "norm": _json_float(v), "status": st}
                for M in self.grid
                for j, v, st in self.per_index_norms[M]
            ],
            "membership": {str(M): ok for M, ok in self.membership.items()},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _converges(values: Sequence[float], tol: float) -> bool:
    if not values or not values[-1] < tol:
        return False
    tail = values[-3:]
    return all(b <= a for a, b in zip(tail, tail[1:]))


def _scan_grid(sequence, limit, grid, horizon, tol, indices):
    if not sequence:
        raise ValueError("empty sequence")
    indices = list(range(1, len(sequence) + 1)) if indices is None else list(indices)
    diffs = [linear_combination(1.0, c, -1.0, limit) for c in sequence]
    table, membership, hit = {}, {}, None
    for M in grid:
        M = float(M)
        rows = []
        for j, d in zip(indices, diffs):
            est = ell_infty_M_norm(d, M, _clip(horizon, d))
            rows.append((j, est.value, est.status))
        table[M] = rows
        # every term and the limit must lie in the same Banach space
        members = [limit] + list(sequence)
        membership[M] = all(growth_trend(ell_infty_M_norm(s, M, _clip(horizon, s))) == "bounded" for s in members)
        if hit is None and membership[M] and _converges([v for _, v, _ in rows], tol):
            hit = M
    return table, membership, hit


def _clip(horizon, c: Series):
    if horizon is None or c.is_finite:
        return None
    return horizon


def silva_convergence_check(
    sequence: Sequence[Series],
    limit: Series,
    M_grid: Sequence[float] = DEFAULT_SILVA_GRID,
    horizon: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    indices: Optional[Sequence[int]] = None,
) -> ConvergenceReport:
    """Look for one grid value ``M`` at which ``||c_j - c||_M`` falls below ``tol``.

    Convergence at ``M`` requires the last norm below ``tol``, the last three
    norms nonincreasing, and no term (nor the limit) showing growth at that M.
    The smallest such grid value is reported; ``diverged`` only means none
    was found on this grid and horizon.
    """
    grid = tuple(sorted(float(M) for M in M_grid))
    if not grid:
        raise ValueError("M_grid must be nonempty")
    table, membership, hit = _scan_grid(sequence, limit, grid, horizon, tol, indices)
    return ConvergenceReport("silva" if hit is not None else "diverged", hit, table, grid, horizon, tol, membership)


def banach_convergence_check(
    sequence: Sequence[Series],
    limit: Series,
    M: float,
    horizon: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    indices: Optional[Sequence[int]] = None,
) -> ConvergenceReport:
    """Convergence in the single Banach space for the given ``M``."""
    grid = (float(M),)
    table, membership, hit = _scan_grid(sequence, limit, grid, horizon, tol, indices)
    return ConvergenceReport("banach" if hit is not None else "diverged", hit, table, grid, horizon, tol, membership)


@dataclass(frozen=True)
class FrechetProbe:
    estimates: Tuple[NormEstimate, ...]
    flags: Tuple[str, ...]

    @property
    def all_finite(self) -> bool:
        """No probed M showed growth (up to the horizon)."""
        return all(f != "growing" for f in self.flags)

    def to_dict(self) -> dict:
        return {
            "all_finite_up_to_horizon": self.all_finite,
            "estimates": [dict(e.to_dict(), flag=f) for e, f in zip(self.estimates, self.flags)],
        }


def frechet_membership_probe(
    c: Series, M_list: Sequence[float] = DEFAULT_FRECHET_GRID, horizon: Optional[int] = None
) -> FrechetProbe:
    """Norm estimates at each M in ``M_list``; advisory only, never a proof."""
    ests, flags = [], []
    for M in M_list:
        est = ell_infty_M_norm(c, float(M), horizon)
        ests.append(est)
        flags.append("certified" if est.status in (EXACT, CERTIFIED_EXACT) else growth_trend(est))
    return FrechetProbe(tuple(ests), tuple(flags))
