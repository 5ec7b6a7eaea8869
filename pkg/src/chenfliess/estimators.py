"""scikit-learn style wrappers.

Samples are time points: ``X`` has shape ``(n_points, m)`` holding the input
channels on a uniform grid of step ``dt``, and ``y`` has shape
``(n_points,)`` or ``(n_points, ell)``.  Rows must stay in time order because
iterated integrals depend on the whole past.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .ident import default_basis, identify, regressor_matrix
from .operator import evaluate_truncated
from .signals import Signal


def as_signal(X, dt: float, t0: float = 0.0) -> Signal:
    """Validate a ``(n_points, m)`` array and wrap it as a :class:`Signal`."""
    X = check_array(X, ensure_min_samples=2, ensure_min_features=1, dtype=float)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return Signal(X.T, dt, t0)


def as_targets(y, n_points: int) -> np.ndarray:
    y = check_array(y, ensure_2d=False, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != n_points:
        raise ValueError(f"y has {y.shape[0]} rows but X has {n_points}")
    return y


class IteratedIntegralFeatures(TransformerMixin, BaseEstimator):
    """Map an input record to the iterated integrals ``E_eta[u](t)`` for every word up to length ``J``."""

    def __init__(self, J=2, dt=1e-3):
        self.J = J
        self.dt = dt

    def fit(self, X, y=None):
        u = as_signal(X, self.dt)
        self.n_features_in_ = u.m
        self.basis_ = default_basis(u, self.J)
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        u = as_signal(X, self.dt)
        if u.m != self.n_features_in_:
            raise ValueError(f"X has {u.m} channels, fitted with {self.n_features_in_}")
        return regressor_matrix(u, self.basis_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "basis_")
        return np.array([f"E[{w}]" for w in self.basis_], dtype=object)


class ChenFliessOperator(TransformerMixin, BaseEstimator):
    """Apply a fixed series: ``transform(X)`` returns ``F_c[u]`` sampled on the grid."""

    def __init__(self, series=None, dt=1e-3, N=None):
        self.series = series
        self.dt = dt
        self.N = N

    def fit(self, X=None, y=None):
        if self.series is None:
            raise ValueError("series must be set")
        self.n_outputs_ = self.series.ell
        return self

    def transform(self, X):
        check_is_fitted(self, "n_outputs_")
        res = evaluate_truncated(self.series, as_signal(X, self.dt), self.N)
        self.last_result_ = res
        return res.values.T


class ChenFliessRegressor(RegressorMixin, BaseEstimator):
    """Identify a truncated series from ``(X, y)`` by recursive least squares."""

    def __init__(self, J=2, dt=1e-3, lam=1.0, delta=1e3):
        self.J = J
        self.dt = dt
        self.lam = lam
        self.delta = delta

    def fit(self, X, y):
        u = as_signal(X, self.dt)
        Y = as_targets(y, u.n_points)
        self._single_output = np.ndim(y) == 1
        out = Signal(Y.T, u.dt, u.t0)
        res = identify(u, out, self.J, lam=self.lam, delta=self.delta)
        self.series_ = res.series
        self.coef_ = res.state.theta.T.copy()
        self.basis_ = list(res.basis)
        self.residuals_ = res.residuals
        self.condition_ = res.condition
        self.n_features_in_ = u.m
        return self

    def predict(self, X):
        check_is_fitted(self, "series_")
        u = as_signal(X, self.dt)
        y = evaluate_truncated(self.series_, u, self.J).values.T
        return y[:, 0] if self._single_output else y
