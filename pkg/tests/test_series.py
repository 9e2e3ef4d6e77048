from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadow_merton.errors import SeriesError
from shadow_merton.series import (
    BivariateSeries,
    PuiseuxSeries,
    exact_pow,
    lagrange_coefficients,
    series_pow,
    series_reversion,
    solve_implicit,
)

small = st.fractions(min_value=-3, max_value=3, max_denominator=7)


def series(order=6, nonzero_const=False, zero_const=False):
    def build(cs):
        cs = list(cs)
        if zero_const:
            cs[0] = Fraction(0)
        if nonzero_const and cs[0] == 0:
            cs[0] = Fraction(1)
        return PuiseuxSeries(cs)

    return st.lists(small, min_size=order + 1, max_size=order + 1).map(build)


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == PuiseuxSeries([0] * 7)
    assert a * PuiseuxSeries.constant(Fraction(1), 6) == a


@settings(max_examples=40, deadline=None)
@given(series(nonzero_const=True))
def test_inverse(a):
    one = PuiseuxSeries.constant(Fraction(1), 6)
    assert a * a.inverse() == one


@settings(max_examples=30, deadline=None)
@given(series(nonzero_const=True), st.integers(min_value=1, max_value=4))
def test_power_law_integer(a, n):
    prod = PuiseuxSeries.constant(Fraction(1), 6)
    for _ in range(n):
        prod = prod * a
    assert series_pow(a, n) == prod


@settings(max_examples=30, deadline=None)
@given(series(), st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(-2, 3), Fraction(5, 3)]),
       st.sampled_from([Fraction(1, 3), Fraction(2), Fraction(-1, 2)]))
def test_power_law_exponents_add(a, r, s):
    # a**r * a**s == a**(r+s) for a series with constant term 1
    a = 1 + (a - a.coeffs[0])
    assert series_pow(a, r) * series_pow(a, s) == series_pow(a, r + s)
    assert series_pow(series_pow(a, r), s) == series_pow(a, r * s)


def test_cube_root_known_expansion():
    # (1 + 3t)^(1/3) = 1 + t - t^2 + 5/3 t^3 - 10/3 t^4 + ...
    a = PuiseuxSeries([1, 3, 0, 0, 0])
    assert series_pow(a, Fraction(1, 3)) == PuiseuxSeries([1, 1, -1, Fraction(5, 3), Fraction(-10, 3)])


def test_pow_with_valuation():
    t3 = PuiseuxSeries([0, 0, 0, 8, 8, 0, 0])  # 8 t^3 (1 + t)
    r = series_pow(t3, Fraction(1, 3))
    assert r.coeffs[0] == 0 and r.coeffs[1] == 2
    with pytest.raises(SeriesError):
        series_pow(PuiseuxSeries([0, 0, 1, 0]), Fraction(1, 3))


def test_irrational_root_falls_back_to_float():
    r = series_pow(PuiseuxSeries([2, 1, 0]), Fraction(1, 2))
    assert not r.exact
    assert r.coeffs[0] == pytest.approx(2**0.5)
    assert exact_pow(Fraction(8, 27), Fraction(2, 3)) == Fraction(4, 9)


@settings(max_examples=25, deadline=None)
@given(st.lists(small, min_size=12, max_size=12), st.integers(min_value=1, max_value=3))
def test_reversion_involution_order_12(tail, lead):
    a = PuiseuxSeries([Fraction(0), Fraction(lead)] + tail[:11])
    assert a.order == 12
    inv = series_reversion(a)
    assert series_reversion(inv) == a
    ident = PuiseuxSeries.variable(12)
    assert a.compose(inv) == ident
    assert inv.compose(a) == ident


def _brute_force_reversion(a, order):
    """Coefficient matching: solve a(b(w)) = w one coefficient at a time."""
    b = [Fraction(0)] * (order + 1)
    b[1] = 1 / a[1]
    for n in range(2, order + 1):
        # coefficient of w^n in sum_k a_k b(w)^k with b_n unknown enters only via k = 1
        total = Fraction(0)
        power = [Fraction(1)] + [Fraction(0)] * order
        for k in range(1, order + 1):
            power = [sum(power[i] * b[j - i] for i in range(j + 1)) for j in range(order + 1)]
            if k < len(a):
                total += a[k] * power[n]
        b[n] = -total / a[1]
    return b


def test_catalan_reversion_against_brute_force():
    # w = z + z^2  ->  z = sum (-1)^(n-1) Catalan(n-1) w^n
    order = 8
    a = [Fraction(0), Fraction(1), Fraction(1)] + [Fraction(0)] * (order - 2)
    got = series_reversion(PuiseuxSeries(a))
    assert list(got.coeffs) == _brute_force_reversion(a, order)
    catalan = [1, 1, 2, 5, 14, 42, 132, 429]
    assert [got.coeffs[n] for n in range(1, order + 1)] == [(-1) ** (n - 1) * catalan[n - 1] for n in range(1, order + 1)]


def test_lagrange_needs_nonzero_phi0():
    with pytest.raises(SeriesError):
        lagrange_coefficients(PuiseuxSeries([0, 1, 0]), 2)


def test_compose_and_log1p():
    x = PuiseuxSeries.variable(5)
    geo = (1 - x).inverse()
    assert list(geo.coeffs) == [1] * 6
    log = x.log1p()
    assert list(log.coeffs) == [0, 1, Fraction(-1, 2), Fraction(1, 3), Fraction(-1, 4), Fraction(1, 5)]
    # log1p(x) composed with x/(1-x)... log(1/(1-x)) = sum x^k/k
    assert (geo - 1).log1p() == PuiseuxSeries([0, 1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 5)])


def test_rescale_and_divide_monomial():
    a = PuiseuxSeries([0, 0, 1, 2])
    assert a.divide_monomial(2) == PuiseuxSeries([1, 2])
    assert PuiseuxSeries([1, 1, 1]).rescale(Fraction(2)) == PuiseuxSeries([1, 2, 4])
    with pytest.raises(SeriesError):
        PuiseuxSeries([1, 2]).divide_monomial(1)


def test_implicit_function():
    # y - x - y^2 = 0 -> y = x + x^2 + 2x^3 + 5x^4
    F = BivariateSeries.zeros((4, 4), exact=True)
    F.coeffs[0, 1] = Fraction(1)
    F.coeffs[1, 0] = Fraction(-1)
    F.coeffs[0, 2] = Fraction(-1)
    assert solve_implicit(F, 4) == PuiseuxSeries([0, 1, 1, 2, 5], base="x")


def test_bivariate_inverse_and_substitution():
    F = BivariateSeries(np.array([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(0)]], dtype=object))
    G = F * F.inverse()
    assert G.coeffs[0, 0] == 1 and all(v == 0 for v in G.coeffs.flat[1:])
    p = PuiseuxSeries([0, 1])
    # F(x=y, y) = 2 + y + y = 2 + 2y
    assert F.substitute_x(p) == PuiseuxSeries([2, 2])


def test_json_round_trip_and_str():
    a = PuiseuxSeries([1, Fraction(1, 3), -2, 0])
    assert PuiseuxSeries.from_json(a.to_json()) == a
    f = a.to_float()
    assert PuiseuxSeries.from_json(f.to_json()).allclose(f, atol=0)
    text = str(a)
    assert "lambda^(1/3)" in text and "lambda^(2/3)" in text and "O(lambda^(4/3))" in text


def test_base_mismatch_rejected():
    with pytest.raises(SeriesError):
        PuiseuxSeries([1, 2], base="x") + PuiseuxSeries([1, 2], base="y")
