"""Uniformly sampled signals, L_p norms and trapezoid quadrature.

A :class:`Signal` holds ``m`` stored channels sampled at ``n + 1`` equally
spaced points of ``[t0, t0 + T]``.  Channel 0, the drift input ``u_0 = 1``, is
implicit and never stored.  Between samples a signal is read as linear
interpolation, which is exactly what the trapezoid rule integrates.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

Exponent = Union[float, int, str]

UNIFORM_RTOL = 1e-9


def _as_exponent(p: Exponent) -> float:
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "∞") else float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


@dataclass(frozen=True, eq=False)
class Signal:
    samples: np.ndarray
    dt: float
    t0: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[None, :]
        if s.ndim != 2:
            raise ValueError("samples must be a (channels, points) array")
        if s.shape[1] < 2:
            raise ValueError("a signal needs at least two grid points")
        if not np.all(np.isfinite(s)):
            raise ValueError("signal samples must be finite")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", float(self.t0))

    # grid -------------------------------------------------------------------
    @property
    def m(self) -> int:
        """Number of stored channels."""
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        """Number of grid intervals."""
        return self.samples.shape[1] - 1

    @property
    def n_points(self) -> int:
        return self.samples.shape[1]

    @property
    def T(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_points)

    def channel(self, i: int) -> np.ndarray:
        """Samples of input ``u_i``; ``i = 0`` is the drift (all ones)."""
        if i == 0:
            return np.ones(self.n_points)
        if not 1 <= i <= self.m:
            raise IndexError(f"signal has channels 1..{self.m}, asked for {i}")
        return self.samples[i - 1]

    def same_grid(self, other: "Signal") -> bool:
        return (
            self.n_points == other.n_points
            and math.isclose(self.dt, other.dt, rel_tol=1e-12)
            and math.isclose(self.t0, other.t0, rel_tol=1e-12, abs_tol=1e-15)
        )

    def check_same_grid(self, other: "Signal") -> None:
        if not self.same_grid(other):
            raise ValueError("signals are sampled on different grids")

    def increments(self, letters: Sequence[int]) -> np.ndarray:
        """Per-interval integrals of ``u_i`` for each requested letter, shape ``(len(letters), n)``."""
        rows = []
        for i in letters:
            if i == 0:
                rows.append(np.full(self.n, self.dt))
            else:
                u = self.channel(i)
                rows.append(0.5 * self.dt * (u[1:] + u[:-1]))
        return np.array(rows).reshape(len(rows), self.n)

    # construction ---------------------------------------------------------
    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.dt, self.t0)

    def abs(self) -> "Signal":
        return self.with_samples(np.abs(self.samples))

    def __add__(self, other: "Signal") -> "Signal":
        self.check_same_grid(other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "Signal") -> "Signal":
        self.check_same_grid(other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, a: float) -> "Signal":
        return self.with_samples(a * self.samples)

    __rmul__ = __mul__

    @classmethod
    def from_functions(
        cls, funcs: Sequence[Callable[[np.ndarray], np.ndarray]], T: float, dt: float, t0: float = 0.0
    ) -> "Signal":
        n = grid_intervals(T, dt)
        t = t0 + np.linspace(0.0, T, n + 1)
        rows = [np.broadcast_to(np.asarray(f(t), dtype=float), t.shape) for f in funcs]
        return cls(np.array(rows).reshape(len(rows), n + 1), T / n, t0)

    @classmethod
    def zeros(cls, m: int, T: float, dt: float, t0: float = 0.0) -> "Signal":
        n = grid_intervals(T, dt)
        return cls(np.zeros((m, n + 1)), T / n, t0)

    # CSV ------------------------------------------------------------------
    def to_csv(self, path, prefix: str = "u") -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"{prefix}{i + 1}" for i in range(self.m)])
            for t, row in zip(self.times, self.samples.T):
                w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in row])

    @classmethod
    def from_csv(cls, path) -> "Signal":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0].strip() != "t":
            raise ValueError(f"{path}: expected a header starting with 't'")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        if data.ndim != 2 or data.shape[0] < 2:
            raise ValueError(f"{path}: need at least two samples")
        t = data[:, 0]
        steps = np.diff(t)
        dt = (t[-1] - t[0]) / (len(t) - 1)
        if dt <= 0 or np.max(np.abs(steps - dt)) > UNIFORM_RTOL * max(abs(dt), abs(t[-1])):
            raise ValueError(f"{path}: time grid is not uniform")
        return cls(data[:, 1:].T, dt, t[0])


def grid_intervals(T: float, dt: float) -> int:
    """Number of intervals for a horizon ``T`` with step at most ``dt``."""
    if not T > 0 or not dt > 0:
        raise ValueError("T and dt must be positive")
    return max(1, int(math.ceil(T / dt - 1e-9)))


def default_dt(T: float) -> float:
    """Step giving 1000 intervals over the horizon."""
    return T / 1000


class LpNorm(NamedTuple):
    p: float
    value: float
    per_channel: List[float]


def lp_norm(u: Signal, p: Exponent = 2) -> LpNorm:
    """``max_i ||u_i||_p`` with composite trapezoid quadrature (sample max for p = inf)."""
    p = _as_exponent(p)
    a = np.abs(u.samples)
    if p == math.inf:
        per = a.max(axis=1) if u.m else np.zeros(0)
    else:
        per = trapezoid(a**p, dx=u.dt, axis=1) ** (1.0 / p) if u.m else np.zeros(0)
    per = [float(x) for x in per]
    return LpNorm(p, max(per, default=0.0), per)


def running_integral(f: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative trapezoid integral with ``out[0] = 0``."""
    f = np.asarray(f, dtype=float)
    return cumulative_trapezoid(f, dx=dt, initial=0.0, axis=-1)


def integral(f: np.ndarray, dt: float) -> float:
    return float(trapezoid(np.asarray(f, dtype=float), dx=dt, axis=-1))


def conjugate_exponent(p: Exponent) -> float:
    """``q`` with ``1/p + 1/q = 1``."""
    p = _as_exponent(p)
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def parse_exponent(text: Exponent) -> float:
    return _as_exponent(text)
