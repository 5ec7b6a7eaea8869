"""Recursive least-squares identification of truncated generating series.

Given input/output samples, the output is modelled as
``y(t) = sum_{eta in basis} (c, eta) E_eta[u](t)`` and the coefficients are
estimated by exponentially weighted RLS over the grid points in time order.
Multiple outputs share the regressors and the covariance matrix.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import DegenerateDataError, NumericalError
from .operator import integrals_for
from .series import Series
from .signals import Signal
from .words import Alphabet, Word, as_word, enumerate_words_upto

DEFAULT_DELTA = 1e3
CONDITION_WARNING = 1e12


class IllConditionedWarning(UserWarning):
    """The RLS covariance became badly conditioned."""


@dataclass(frozen=True)
class Regressor:
    t: float
    phi: np.ndarray


@dataclass(frozen=True)
class RlsState:
    basis: tuple
    theta: np.ndarray
    P: np.ndarray
    lam: float = 1.0
    sample_count: int = 0

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        if theta.ndim == 1:
            theta = theta[:, None]
        P = np.array(self.P, dtype=float)
        d = len(self.basis)
        if theta.shape[0] != d or P.shape != (d, d):
            raise ValueError(f"theta and P must match a basis of {d} words")
        if not 0 < self.lam <= 1:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {self.lam}")
        theta.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "basis", tuple(as_word(w) for w in self.basis))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "P", P)

    @classmethod
    def initial(cls, basis: Sequence, ell: int = 1, delta: float = DEFAULT_DELTA, lam: float = 1.0):
        d = len(basis)
        return cls(tuple(basis), np.zeros((d, ell)), delta * np.eye(d), lam, 0)

    @property
    def ell(self) -> int:
        return self.theta.shape[1]


def default_basis(u: Signal, J: int) -> List[Word]:
    """X^<=J over the drift letter and every stored channel, in canonical order."""
    return enumerate_words_upto(Alphabet(u.m), J)


def build_regressor(u: Signal, basis: Sequence, t_index: int) -> Regressor:
    if not 0 <= t_index < u.n_points:
        raise IndexError(f"t_index {t_index} outside the grid 0..{u.n}")
    E = integrals_for(u)
    phi = np.array([E.get(w)[t_index] for w in basis])
    return Regressor(float(u.times[t_index]), phi)


def regressor_matrix(u: Signal, basis: Sequence) -> np.ndarray:
    """All regressors at once, shape ``(n_points, len(basis))``."""
    return integrals_for(u).matrix([as_word(w) for w in basis]).T


def rls_update(state: RlsState, phi, y_obs) -> RlsState:
    phi = np.asarray(getattr(phi, "phi", phi), dtype=float)
    y_obs = np.atleast_1d(np.asarray(y_obs, dtype=float))
    if phi.shape != (len(state.basis),):
        raise ValueError(f"regressor has shape {phi.shape}, expected ({len(state.basis)},)")
    if y_obs.shape != (state.ell,):
        raise ValueError(f"observation has shape {y_obs.shape}, expected ({state.ell},)")
    P = state.P
    Pphi = P @ phi
    denom = state.lam + phi @ Pphi
    if not np.isfinite(denom) or denom <= np.finfo(float).tiny:
        raise NumericalError(f"RLS gain denominator {denom!r} is not usable")
    gain = Pphi / denom
    err = y_obs - phi @ state.theta
    theta = state.theta + np.outer(gain, err)
    P = (P - np.outer(gain, Pphi)) / state.lam
    P = 0.5 * (P + P.T)
    return RlsState(state.basis, theta, P, state.lam, state.sample_count + 1)


@dataclass
class IdentificationResult:
    series: Series
    state: RlsState
    residuals: np.ndarray
    times: np.ndarray
    condition: float
    rank: int
    warnings: List[str] = field(default_factory=list)

    @property
    def basis(self):
        return self.state.basis

    def residuals_to_csv(self, path) -> None:
        """Prior residuals ``y - phi^T theta`` before each update, one column per output."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"r{j + 1}" for j in range(self.residuals.shape[1])])
            for t, row in zip(self.times, self.residuals):
                w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in row])


def identify(
    u: Signal,
    y: Signal,
    J: int,
    lam: float = 1.0,
    delta: float = DEFAULT_DELTA,
    basis: Optional[Sequence] = None,
) -> IdentificationResult:
    """Estimate a polynomial ``p`` with ``F_p[u] ~ y`` by RLS over the grid.

    ``basis`` defaults to every word of length at most ``J``.  The result
    reports the rank and condition number of the stacked regressors because
    persistency of excitation is not checked otherwise.
    """
    u.check_same_grid(y)
    if J < 0:
        raise ValueError("J must be nonnegative")
    basis = [as_word(w) for w in (basis if basis is not None else default_basis(u, J))]
    if not basis:
        raise DegenerateDataError("empty regressor basis")
    Phi = regressor_matrix(u, basis)
    Y = y.samples.T
    state = RlsState.initial(basis, y.m, delta, lam)
    residuals = np.empty_like(Y)
    for k in range(u.n_points):
        residuals[k] = Y[k] - Phi[k] @ state.theta
        state = rls_update(state, Phi[k], Y[k])

    notes = []
    cond_P = float(np.linalg.cond(state.P))
    if not np.isfinite(cond_P) or cond_P > CONDITION_WARNING:
        msg = f"RLS covariance condition number {cond_P:.3g} exceeds {CONDITION_WARNING:g}"
        warnings.warn(msg, IllConditionedWarning, stacklevel=2)
        notes.append(msg)
    rank = int(np.linalg.matrix_rank(Phi))
    if rank < len(basis):
        notes.append(f"regressors have rank {rank} < {len(basis)}; the input is not exciting enough")
    terms = {w: state.theta[i] for i, w in enumerate(basis)}
    series = Series(Alphabet(u.m), y.m, terms=terms, name="identified")
    return IdentificationResult(series, state, residuals, u.times, cond_P, rank, notes)


__all__ = [
    "IdentificationResult",
    "IllConditionedWarning",
    "Regressor",
    "RlsState",
    "build_regressor",
    "default_basis",
    "identify",
    "regressor_matrix",
    "rls_update",
]
