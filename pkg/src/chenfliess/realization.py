"""Generating series of polynomial control-affine systems.

The system is

    z' = g_0(z) + sum_i g_i(z) u_i,   y_j = h_j(z),   z(t0) = z0

with polynomial vector fields and outputs.  For a word ``eta = x_{i_k} ... x_{i_1}``
the coefficient is ``L_{g_{i_1}} ... L_{g_{i_k}} h_j (z0)``: the Lie derivative
for the *leftmost* letter is applied first.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .exceptions import NumericalError, ResourceCapError
from .series import Series
from .signals import Signal
from .words import Alphabet, Word

DEFAULT_TERM_CAP = 10**5
BLOWUP_GUARD = 1e9

Exps = Tuple[int, ...]


class MultiPoly:
    """Polynomial in ``n`` variables stored as ``{exponent tuple: coefficient}``."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[Exps, float] | Iterable[Tuple[Exps, float]] = ()):
        self.n = int(n)
        acc: Dict[Exps, float] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for e, c in items:
            e = tuple(int(x) for x in e)
            if len(e) != self.n or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e} for {self.n} variables")
            acc[e] = acc.get(e, 0) + c
        self._terms = {e: c for e, c in acc.items() if c != 0}

    @classmethod
    def constant(cls, c: float, n: int) -> "MultiPoly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, i: int, n: int, coef: float = 1) -> "MultiPoly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): coef})

    @classmethod
    def zero(cls, n: int) -> "MultiPoly":
        return cls(n)

    @property
    def terms(self) -> Dict[Exps, float]:
        return dict(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def _same_n(self, other: "MultiPoly"):
        if other.n != self.n:
            raise ValueError(f"variable counts differ: {self.n} vs {other.n}")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._same_n(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.n, out)

    def __neg__(self):
        return MultiPoly(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.n, {e: c * other for e, c in self._terms.items()})
        self._same_n(other)
        out: Dict[Exps, float] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.n, out)

    __rmul__ = __mul__

    def derivative(self, i: int) -> "MultiPoly":
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        return MultiPoly(self.n, out)

    def __call__(self, z) -> float:
        z = np.asarray(z, dtype=float)
        total = 0.0
        for e, c in self._terms.items():
            total += c * float(np.prod(z ** np.array(e)))
        return total

    def compile(self):
        """Vectorized evaluator ``z -> value`` (``z`` of shape ``(n,)``)."""
        if not self._terms:
            return lambda z: 0.0
        E = np.array(list(self._terms), dtype=float)
        C = np.array(list(self._terms.values()), dtype=float)
        return lambda z: float(C @ np.prod(np.asarray(z, dtype=float) ** E, axis=1))

    def to_terms(self) -> List[dict]:
        return [{"exps": list(e), "coef": c} for e, c in sorted(self._terms.items())]

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Mapping]) -> "MultiPoly":
        return cls(n, [(tuple(t["exps"]), float(t["coef"])) for t in terms])

    def __repr__(self):
        if not self._terms:
            return "MultiPoly(0)"
        parts = []
        for e, c in sorted(self._terms.items()):
            mono = "*".join(f"z{i + 1}^{k}" if k > 1 else f"z{i + 1}" for i, k in enumerate(e) if k)
            parts.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(parts) + ")"


def lie_derivative(h: MultiPoly, g: Sequence[MultiPoly], cap: int = DEFAULT_TERM_CAP) -> MultiPoly:
    """``L_g h = sum_i g_i * dh/dz_i``."""
    if len(g) != h.n:
        raise ValueError(f"vector field has {len(g)} components for {h.n} variables")
    out = MultiPoly.zero(h.n)
    for i, gi in enumerate(g):
        out = out + gi * h.derivative(i)
    if len(out) > cap:
        raise ResourceCapError(f"Lie derivative has {len(out)} terms, over the cap of {cap}")
    return out


@dataclass(frozen=True)
class StateSpace:
    vector_fields: Tuple[Tuple[MultiPoly, ...], ...]
    outputs: Tuple[MultiPoly, ...]
    z0: Tuple[float, ...]

    def __post_init__(self):
        n = len(self.z0)
        object.__setattr__(self, "vector_fields", tuple(tuple(g) for g in self.vector_fields))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "z0", tuple(float(x) for x in self.z0))
        if not self.vector_fields:
            raise ValueError("need at least the drift vector field g_0")
        for g in self.vector_fields:
            if len(g) != n or any(p.n != n for p in g):
                raise ValueError(f"every vector field needs {n} components in {n} variables")
        if not self.outputs or any(h.n != n for h in self.outputs):
            raise ValueError(f"outputs must be polynomials in {n} variables")

    @property
    def n(self) -> int:
        return len(self.z0)

    @property
    def m(self) -> int:
        return len(self.vector_fields) - 1

    @property
    def ell(self) -> int:
        return len(self.outputs)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.m)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "z0": list(self.z0),
            "vector_fields": [[p.to_terms() for p in g] for g in self.vector_fields],
            "outputs": [h.to_terms() for h in self.outputs],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StateSpace":
        n = int(d["n"])
        return cls(
            vector_fields=[[MultiPoly.from_terms(n, p) for p in g] for g in d["vector_fields"]],
            outputs=[MultiPoly.from_terms(n, h) for h in d["outputs"]],
            z0=d["z0"],
        )

    @classmethod
    def from_json(cls, text: str) -> "StateSpace":
        return cls.from_dict(json.loads(text))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def series_from_realization(sys: StateSpace, J: int, cap: int = DEFAULT_TERM_CAP) -> Series:
    """Finite-support series on X^<=J with ``(c_j, eta) = L_{g_eta} h_j (z0)``.

    Lie-derivative polynomials are memoized on word prefixes; a prefix whose
    polynomial vanishes is not extended.
    """
    if J < 0:
        raise ValueError("J must be nonnegative")
    z0 = np.array(sys.z0)
    coeffs: Dict[Word, np.ndarray] = {}
    for j, h in enumerate(sys.outputs):
        level: Dict[Word, MultiPoly] = {Word(): h}
        for k in range(J + 1):
            for w, p in level.items():
                val = p(z0)
                if val != 0:
                    coeffs.setdefault(w, np.zeros(sys.ell))[j] = val
            if k == J:
                break
            nxt: Dict[Word, MultiPoly] = {}
            for w, p in level.items():
                for i, g in enumerate(sys.vector_fields):
                    q = lie_derivative(p, g, cap=cap)
                    if q:
                        nxt[w + (i,)] = q
            level = nxt
    return Series(sys.alphabet, sys.ell, terms=coeffs, name="realization")


def simulate(sys: StateSpace, u: Signal, guard: float = BLOWUP_GUARD) -> Signal:
    """Classical RK4 on the grid of ``u``; midpoint inputs by linear interpolation."""
    if sys.m > u.m:
        raise ValueError(f"system has {sys.m} inputs but the signal only {u.m} channels")
    fields = [[p.compile() for p in g] for g in sys.vector_fields]
    outs = [h.compile() for h in sys.outputs]

    def rhs(z, uv):
        dz = np.array([f(z) for f in fields[0]])
        for i in range(1, sys.m + 1):
            if uv[i - 1] != 0:
                dz = dz + uv[i - 1] * np.array([f(z) for f in fields[i]])
        return dz

    U = u.samples[: sys.m]
    h = u.dt
    z = np.array(sys.z0, dtype=float)
    y = np.empty((sys.ell, u.n_points))
    y[:, 0] = [f(z) for f in outs]
    for k in range(u.n):
        ua, ub = U[:, k], U[:, k + 1]
        um = 0.5 * (ua + ub)
        k1 = rhs(z, ua)
        k2 = rhs(z + 0.5 * h * k1, um)
        k3 = rhs(z + 0.5 * h * k2, um)
        k4 = rhs(z + h * k3, ub)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > guard:
            raise NumericalError(f"state left the guard |z| <= {guard:g} at t = {u.times[k + 1]:g}")
        y[:, k + 1] = [f(z) for f in outs]
    return Signal(y, u.dt, u.t0)
