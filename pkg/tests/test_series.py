import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chenfliess.catalog import SINGLE_LETTER, squared_factorial, squared_factorial_partial
from chenfliess.exceptions import HorizonError
from chenfliess.series import (
    GrowthCertificate,
    Series,
    UltrametricParams,
    geometric_horizon,
    linear_combination,
    order,
    ultrametric_dist,
)
from chenfliess.words import Alphabet, Word

X1 = Alphabet(1)


def factorial_series(horizon=30):
    return Series.generated(lambda w: math.factorial(len(w)), SINGLE_LETTER, horizon)


def test_coefficient_lookup():
    c = Series.polynomial({"x1": 1, "x1 x1": 3}, X1)
    assert c.coefficient("x1 x1")[0] == 3
    assert c.coefficient("x0")[0] == 0
    g = Series.generated(lambda w: math.factorial(len(w)) * 2 ** len(w), SINGLE_LETTER, 10)
    assert g.coefficient(Word.power(1, 3))[0] == 48


def test_horizon_error():
    g = factorial_series(5)
    with pytest.raises(HorizonError):
        g.coefficient(Word.power(1, 6))
    with pytest.raises(HorizonError):
        list(g.items_upto(6))


def test_zero_coefficients_dropped():
    c = Series.polynomial({"x1": 0.0, "x0": 1.0}, X1)
    assert c.support() == [Word.parse("x0")]


def test_vector_coefficients():
    c = Series.polynomial({"x1": [1.0, 2.0]}, X1, ell=2)
    assert c.coefficient("x1").tolist() == [1.0, 2.0]
    assert c.coefficient("x0").tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        Series.polynomial({"x1": 1.0}, X1, ell=2)


def test_word_outside_alphabet():
    with pytest.raises(ValueError):
        Series.polynomial({"x2": 1.0}, X1)


def test_order_examples():
    assert order(Series.zero(X1)) == (math.inf, True)
    assert order(Series.polynomial({"x0 x1": 5}, X1)).value == 2
    assert order(Series.polynomial({"x1": 1, "x1 x1 x1": 1}, X1)).value == 1


def test_order_lower_bound_on_generated():
    g = Series.generated(lambda w: 0.0, SINGLE_LETTER, 12)
    assert order(g, search_limit=8) == (9, False)


def test_ultrametric_examples():
    c = Series.polynomial({"x1": 1}, X1)
    d = Series.polynomial({"x1": 1, "x1 x1 x1": 1}, X1)
    assert ultrametric_dist(c, c).value == 0
    assert ultrametric_dist(c, d, UltrametricParams(0.5)).value == 0.125
    limit = squared_factorial(30)
    for j in (0, 3, 10):
        assert ultrametric_dist(squared_factorial_partial(j), limit, search_limit=30).value == 2.0 ** -(j + 1)


def test_linear_combination_examples():
    c = Series.polynomial({"x1": 2.0, "x0 x1": -1.0}, X1)
    assert linear_combination(1.0, c, -1.0, c) == Series.zero(X1)
    a = Series.polynomial({"x1": 1}, X1)
    b = Series.polynomial({"x0": 1}, X1)
    assert linear_combination(2.0, a, 1.0, b) == Series.polynomial({"x0": 1, "x1": 2}, X1)
    g = factorial_series(30)
    diff = linear_combination(1.0, g, -1.0, g.truncate(3))
    assert not diff.is_finite
    assert order(diff).value == 4


def test_combined_certificate():
    cert = GrowthCertificate(1.0, 2.0, 1.0)
    g = Series.generated(lambda w: 2.0 ** len(w) * math.factorial(len(w)), SINGLE_LETTER, 20, certificate=cert)
    h = linear_combination(3.0, g, -1.0, g)
    assert h.certificate == GrowthCertificate(4.0, 2.0, 1.0)
    assert linear_combination(1.0, g, 1.0, factorial_series()).certificate is None


def test_json_round_trip_and_format():
    c = Series.polynomial({"x0 x1": [1.5, 0.0], "e": [0.0, -2.0]}, X1, ell=2)
    d = json.loads(c.to_json())
    assert d == {
        "m": 1,
        "ell": 2,
        "terms": [{"word": "e", "coeff": [0.0, -2.0]}, {"word": "x0 x1", "coeff": [1.5, 0.0]}],
    }
    assert Series.from_json(c.to_json()) == c


def test_json_keeps_alphabet_and_certificate():
    c = Series.polynomial({"x1": 1.0}, SINGLE_LETTER, certificate=GrowthCertificate(1.0, 2.0))
    back = Series.from_json(c.to_json())
    assert back.alphabet == SINGLE_LETTER
    assert back.certificate == c.certificate


def test_generated_series_do_not_serialize():
    with pytest.raises(TypeError):
        factorial_series().to_dict()


def test_certificate_bound():
    cert = GrowthCertificate(2.0, 3.0, 1.0)
    assert cert.bound(2) == pytest.approx(2 * 9 * 2)
    assert cert.locally_convergent
    assert not GrowthCertificate(1.0, 1.0, 2.0).locally_convergent
    with pytest.raises(ValueError):
        GrowthCertificate(1.0, 0.0)


def test_geometric_horizon_fits_floats():
    k = geometric_horizon(7.0)
    assert math.isfinite(7.0**k * math.factorial(k))


coeff_st = st.integers(-4, 4).map(float)
word_st = st.lists(st.integers(0, 1), max_size=4).map(Word)
series_st = st.dictionaries(word_st, coeff_st, max_size=5).map(lambda t: Series.polynomial(t, X1))


@settings(max_examples=60, deadline=None)
@given(series_st, series_st, series_st)
def test_ultrametric_axioms(c, d, e):
    dist = lambda a, b: ultrametric_dist(a, b).value
    assert (dist(c, d) == 0) == (c == d)
    assert dist(c, d) == dist(d, c)
    assert dist(c, e) <= max(dist(c, d), dist(d, e))


@settings(max_examples=60, deadline=None)
@given(series_st, series_st, coeff_st, coeff_st, word_st)
def test_linear_combination_is_linear(c, d, a, b, w):
    lhs = linear_combination(a, c, b, d).coefficient(w)
    assert np.allclose(lhs, a * c.coefficient(w) + b * d.coefficient(w))


@settings(max_examples=60, deadline=None)
@given(series_st)
def test_json_round_trip_property(c):
    assert Series.from_json(c.to_json()) == c
