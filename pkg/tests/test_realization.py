import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chenfliess.exceptions import NumericalError, ResourceCapError
from chenfliess.operator import evaluate_truncated
from chenfliess.realization import MultiPoly, StateSpace, lie_derivative, series_from_realization, simulate
from chenfliess.signals import Signal
from chenfliess.words import Word

Z = MultiPoly.variable


def test_multipoly_drops_zeros_and_merges():
    p = MultiPoly(1, [((1,), 2.0), ((1,), -2.0), ((0,), 3.0)])
    assert p.terms == {(0,): 3.0}
    with pytest.raises(ValueError):
        MultiPoly(2, {(1,): 1.0})


def test_lie_derivative_examples():
    z = Z(0, 1)
    assert lie_derivative(z, [z]) == z
    assert lie_derivative(z * z, [MultiPoly.constant(1.0, 1)]) == z * 2.0
    z1, z2 = Z(0, 2), Z(1, 2)
    assert lie_derivative(z1 * z2, [z2, -z1]) == z2 * z2 - z1 * z1


def test_lie_derivative_cap():
    z1, z2 = Z(0, 2), Z(1, 2)
    h = (z1 + z2 + MultiPoly.constant(1.0, 2)) * (z1 + z2) * (z1 - z2)
    with pytest.raises(ResourceCapError):
        lie_derivative(h * h, [z1 * z2, z2], cap=3)


def test_series_examples():
    z = Z(0, 1)
    bilinear = StateSpace([[MultiPoly.zero(1)], [z]], [z], [1.0])
    c = series_from_realization(bilinear, 6)
    assert all(c.coefficient(Word.power(1, k))[0] == 1.0 for k in range(7))
    assert all(0 not in w for w in c.terms)

    drift = StateSpace([[MultiPoly.constant(1.0, 1)]], [z], [0.0])
    c = series_from_realization(drift, 4)
    assert c.coefficient(Word())[0] == 0.0
    assert c.coefficient(Word((0,)))[0] == 1.0
    assert all(c.coefficient(Word.power(0, k))[0] == 0.0 for k in range(2, 5))

    a, b = 0.5, -3.0
    linear = StateSpace([[Z(0, 1, a)], [MultiPoly.constant(b, 1)]], [z], [0.0])
    c = series_from_realization(linear, 6)
    assert c.coefficient("x1")[0] == b
    for k in range(6):
        assert c.coefficient(Word([0] * k + [1]))[0] == pytest.approx(a**k * b, rel=1e-15)
    # the input letter only ever appears last in a nonzero word
    assert all(w[-1] == 1 and 1 not in w[:-1] for w in c.terms)


def test_word_order_convention_nonlinear():
    # z1' = u, z2' = z1 ; y = z2 : (c, x0 x1) = L_g1 L_g0 h = 1 and (c, x1 x0) = 0
    z1, z2 = Z(0, 2), Z(1, 2)
    one, zero = MultiPoly.constant(1.0, 2), MultiPoly.zero(2)
    sys_ = StateSpace([[zero, z1], [one, zero]], [z2], [0.0, 0.0])
    c = series_from_realization(sys_, 3)
    assert c.coefficient("x0 x1")[0] == 1.0
    assert c.coefficient("x1 x0")[0] == 0.0
    u = Signal.from_functions([np.cos], 1.0, 1e-3)
    assert np.allclose(evaluate_truncated(c, u, 3).values[0], simulate(sys_, u).samples[0], atol=1e-7)


def test_simulate_examples():
    z = Z(0, 1)
    const = StateSpace([[MultiPoly.zero(1)]], [z], [1.0])
    assert np.all(simulate(const, Signal.zeros(1, 1.0, 1e-2)).samples == 1.0)

    bilinear = StateSpace([[MultiPoly.zero(1)], [z]], [z], [1.0])
    u = Signal.from_functions([lambda t: np.ones_like(t)], 1.0, 1e-3)
    assert np.max(np.abs(simulate(bilinear, u).samples[0] - np.exp(u.times))) <= 1e-8

    integrator = StateSpace([[MultiPoly.zero(1)], [MultiPoly.constant(1.0, 1)]], [z], [0.0])
    # linear interpolation at half steps turns the input quadrature into the trapezoid rule,
    # so this example is second order in dt
    u = Signal.from_functions([np.cos], 2.0, 2.5e-4)
    assert np.max(np.abs(simulate(integrator, u).samples[0] - np.sin(u.times))) <= 1e-8


def test_simulate_blowup_guard():
    z = Z(0, 1)
    riccati = StateSpace([[z * z]], [z], [1.0])
    with pytest.raises(NumericalError):
        simulate(riccati, Signal.zeros(1, 2.0, 1e-3))


def test_json_round_trip():
    z1, z2 = Z(0, 2), Z(1, 2)
    sys_ = StateSpace([[z2, -z1], [z1 * z2, MultiPoly.constant(1.5, 2)]], [z1 + z2 * 2.0], [0.3, -1.0])
    back = StateSpace.from_json(sys_.to_json())
    assert back == sys_
    term = sys_.to_dict()["vector_fields"][1][1][0]
    assert term == {"exps": [0, 0], "coef": 1.5}


poly_st = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2)), st.integers(-3, 3).map(float), max_size=4
).map(lambda d: MultiPoly(2, d))


@settings(max_examples=60, deadline=None)
@given(poly_st, poly_st, poly_st, poly_st)
def test_lie_derivative_is_a_derivation(h1, h2, g1, g2):
    g = [g1, g2]
    assert lie_derivative(h1 * h2, g) == h1 * lie_derivative(h2, g) + h2 * lie_derivative(h1, g)
    assert lie_derivative(h1 + h2, g) == lie_derivative(h1, g) + lie_derivative(h2, g)


small_poly_st = st.dictionaries(
    st.tuples(st.integers(0, 1), st.integers(0, 1)).filter(lambda e: sum(e) <= 2),
    st.floats(-0.5, 0.5).filter(lambda x: abs(x) > 1e-3),
    max_size=3,
).map(lambda d: MultiPoly(2, d))


@settings(max_examples=15, deadline=None)
@given(st.lists(small_poly_st, min_size=4, max_size=4), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_realization_consistency(polys, a, b):
    z1, z2 = Z(0, 2), Z(1, 2)
    sys_ = StateSpace([polys[:2], polys[2:]], [z1 + z2 * 0.5], [a, b])
    u = Signal.from_functions([lambda t: 0.5 * np.cos(4 * t)], 0.15, 1e-3)
    y = simulate(sys_, u).samples[0]
    errs = [np.max(np.abs(evaluate_truncated(series_from_realization(sys_, J), u, J).values[0] - y)) for J in (2, 4, 6)]
    assert errs[-1] <= max(1e-6, errs[0])
    assert errs[-1] <= 1e-5
