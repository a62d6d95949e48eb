import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resetsearch.analysis import comparison_bounds
from resetsearch.errors import KindMismatch, MissingTail, ParameterError
from resetsearch.harmonic import PHI1, PHI3, build_phi_closed_form, solve_phi
from resetsearch.hitting import (CLOSED_FORM, INTERVAL_CLOSED, INTERVAL_GENERAL, Finiteness,
                                 classify_finiteness, expected_hitting,
                                 expected_hitting_constant, expected_hitting_general,
                                 expected_hitting_interval, expected_hitting_many,
                                 growth_descriptor, hitting_components)
from resetsearch.model import (Constant, PowerLaw, QuadDecayPoly, StretchedExpHarmonic,
                               Tabulated, inverse_square)


def closed(r, D, a):
    return (math.exp(math.sqrt(2 * r / D) * abs(a)) - 1) / r


@pytest.mark.parametrize("r,D,a,expect", [
    (2.0, 2.0, 1.0, (math.exp(math.sqrt(2)) - 1) / 2),
    (1.0, 1.0, 0.0, 0.0),
    (0.125, 1.0, 3.0, (math.exp(1.5) - 1) / 0.125),
])
def test_constant_examples(r, D, a, expect):
    res = expected_hitting_constant(r, D, a)
    assert res.value == pytest.approx(expect, rel=1e-14, abs=0)
    assert res.method == CLOSED_FORM


def test_constant_rounded_values():
    assert expected_hitting_constant(2, 2, 1).value == pytest.approx(1.55663, abs=5e-6)
    # (e^1.5 - 1) / 0.125 = 27.85351...
    assert expected_hitting_constant(0.125, 1, 3).value == pytest.approx(27.853515, abs=5e-6)


def test_constant_tiny_argument_keeps_precision():
    # expm1 territory: naive exp(x) - 1 would lose every digit
    v = expected_hitting_constant(1.0, 1.0, 1e-12).value
    assert v == pytest.approx(math.sqrt(2) * 1e-12, rel=1e-9)


def test_constant_rejects_zero_rate():
    with pytest.raises(ParameterError):
        expected_hitting_constant(0.0, 1.0, 1.0)


def test_components_constant_rate():
    phi1 = build_phi_closed_form(Constant(0.5), 1.0, PHI1)
    comp = hitting_components(phi1, 1.0)
    assert comp.u == pytest.approx(math.exp(-1), rel=1e-13)
    assert comp.v == pytest.approx((1 - math.exp(-1)) / 0.5, rel=1e-10)
    phi3 = build_phi_closed_form(Constant(0.5), 1.0, PHI3)
    assert hitting_components(phi3, 1.0).log_ratio == pytest.approx(comp.log_ratio, rel=1e-10)


def test_components_inverse_square_v_infinite():
    phi = build_phi_closed_form(inverse_square(1.0, 1.0, 1.0), 1.0)
    for a in (0.5, 3.0, -2.0):
        comp = hitting_components(phi, a)
        assert not comp.v_finite and comp.v == math.inf
        assert 0 < comp.u < 1


def test_kind_mismatch():
    phi1 = build_phi_closed_form(Constant(0.5), 1.0, PHI1)
    with pytest.raises(KindMismatch):
        hitting_components(phi1, -1.0)


RATES = [
    (Constant(2.0), 2.0),
    (QuadDecayPoly(3.0, 1.0, 1.0), 1.0),
    (PowerLaw(3.0, 1.0, -1.0), 1.0),
    (PowerLaw(1.0, 1.0, 0.5), 1.0),
    (StretchedExpHarmonic(1.0, 1.0, 0.5, 1.0), 1.0),
]


@pytest.mark.parametrize("rate,D", RATES)
def test_phi3_and_phi1_paths_agree(rate, D):
    a = [-3.0, -0.4, 0.4, 1.0, 3.0]
    p3 = expected_hitting_many(rate, D, a, phi=PHI3)
    p1 = expected_hitting_many(rate, D, a, phi=PHI1)
    for x, y in zip(p3, p1):
        assert x.finite and y.finite
        tol = x.error_estimate + y.error_estimate
        assert abs(x.log_value - y.log_value) <= tol
        assert tol < 1e-5


@pytest.mark.parametrize("rate,D", RATES)
def test_symmetry_for_even_rates(rate, D):
    for a in (0.3, 2.0, 6.0):
        plus = expected_hitting_general(rate, D, a).log_value
        minus = expected_hitting_general(rate, D, -a).log_value
        assert plus == pytest.approx(minus, abs=1e-8)


def test_zero_target():
    res = expected_hitting_general(QuadDecayPoly(3.0, 1.0, 1.0), 1.0, 0.0)
    assert res.finite and res.value == 0.0


@pytest.mark.parametrize("rate,double", [
    (Constant(0.7), Constant(1.4)),
    (PowerLaw(1.0, 1.0, 1.0), PowerLaw(2.0, 1.0, 1.0)),
    (PowerLaw(3.0, 1.0, -1.0), PowerLaw(6.0, 1.0, -1.0)),
])
def test_components_nonincreasing_in_rate(rate, double):
    s1, s2 = solve_phi(rate, 1.0), solve_phi(double, 1.0)
    for a in (0.5, 2.0, -3.0):
        c1, c2 = hitting_components(s1, a), hitting_components(s2, a)
        assert c2.log_u <= c1.log_u + 1e-9
        assert c2.log_v <= c1.log_v + 1e-9


def test_constant_rate_non_monotone_extremes():
    mid = expected_hitting_constant(1.0, 1.0, 1.0).value
    assert expected_hitting_constant(1e-6, 1.0, 1.0).value > 400 * mid
    huge = expected_hitting_constant(1e6, 1.0, 1.0)
    assert huge.finite and huge.log_value > 1000
    assert huge.value == math.inf
    general = expected_hitting_general(Constant(1e-6), 1.0, 1.0)
    assert general.value == pytest.approx(closed(1e-6, 1.0, 1.0), rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0.05, 20), D=st.floats(0.2, 5), a=st.floats(-8, 8).filter(lambda v: abs(v) > 1e-3))
def test_constant_closed_form_is_even_and_positive(r, D, a):
    e1 = expected_hitting_constant(r, D, a)
    e2 = expected_hitting_constant(r, D, -a)
    assert e1.log_value == e2.log_value
    assert e1.value > 0


def test_comparison_sandwich_power_law():
    lo = StretchedExpHarmonic(1 / math.sqrt(2), 1.0, 1.0, 1.0)
    hi = StretchedExpHarmonic(1.0, 1.0, 1.0, 1.0)
    target = PowerLaw(1.0, 1.0, 1.0)
    a = np.array([0.5, 1.0, 2.0, 4.0])
    bounds = comparison_bounds(target, lo, hi, 1.0, a)
    low, high = bounds[:, 0], bounds[:, 1]
    assert np.all(low < high)
    mid = np.array([expected_hitting_general(target, 1.0, x).log_value for x in a])
    assert np.all(low <= mid + 1e-8) and np.all(mid <= high + 1e-8)


@pytest.mark.parametrize("D", [0.5, 1.0, 2.0])
def test_classifier_dichotomy(D):
    assert classify_finiteness(inverse_square(1.0, 1.0, D), D) is Finiteness.INFINITE
    assert classify_finiteness(inverse_square(2.0, 1.0, D), D) is Finiteness.FINITE
    assert classify_finiteness(Constant(0.3), D) is Finiteness.FINITE
    assert classify_finiteness(Constant(0.0), D) is Finiteness.INFINITE


def test_classifier_tabulated():
    grid, vals = (-2.0, 0.0, 2.0), (1.0, 1.0, 1.0)
    with pytest.raises(MissingTail):
        classify_finiteness(Tabulated(grid, vals), 1.0)
    boundary = Tabulated(grid, vals, tail_left=(1.0, 2.0), tail_right=(1.0, 2.0))
    assert classify_finiteness(boundary, 1.0) is Finiteness.BOUNDARY
    fast = Tabulated(grid, vals, tail_left=(0.5, 1.0), tail_right=(3.0, 2.0))
    assert classify_finiteness(fast, 1.0) is Finiteness.FINITE


def test_growth_descriptor():
    assert growth_descriptor(QuadDecayPoly(3.0, 1.0, 1.0), 1.0, 1) == ("power", pytest.approx(3.0))
    assert growth_descriptor(Constant(0.5), 1.0, -1) == ("exp", pytest.approx(1.0))
    assert growth_descriptor(inverse_square(1.0, 1.0, 1.0), 1.0, 1) == ("infinite",)


def test_quadrature_channel_records_divergence():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = expected_hitting_general(inverse_square(1.0, 1.0, 1.0), 1.0, 1.0)
    assert not res.finite and res.value == math.inf
    assert res.classifier == res.quadrature == "infinite"
    assert res.channels_agree


def test_interval_zero_rate():
    zero = Constant(0.0)
    assert expected_hitting_interval(zero, 1.0, 2.0, 3.0, 1.0).value == pytest.approx(3.0, rel=1e-14)
    assert expected_hitting_interval(zero, 1.0, 2.0, 3.0, -1.0).value == pytest.approx(4.0, rel=1e-14)
    gen = expected_hitting_interval(zero, 1.0, 2.0, 3.0, 1.0, method="general")
    assert gen.value == pytest.approx(3.0, rel=1e-9)


def _interval_mp(r, D, A, a):
    mp.mp.dps = 40
    x = mp.sqrt(2 * mp.mpf(r) / D) * A
    t = mp.mpf(a) / A
    num = mp.sinh(x * (1 + t)) - mp.sinh(x * t) - mp.sinh(x)
    return float(num / (r * mp.sinh(x)))


def test_interval_constant_against_independent_evaluation():
    oracle = _interval_mp(1, 1, 1, 0.5)
    assert oracle == pytest.approx(0.7279054912963254, rel=1e-14)
    cf = expected_hitting_interval(Constant(1.0), 1.0, 1.0, 1.0, 0.5)
    gen = expected_hitting_interval(Constant(1.0), 1.0, 1.0, 1.0, 0.5, method="general")
    assert cf.method == INTERVAL_CLOSED and gen.method == INTERVAL_GENERAL
    assert cf.value == pytest.approx(oracle, rel=1e-13)
    assert gen.value == pytest.approx(cf.value, rel=1e-8)


@pytest.mark.parametrize("r,D,A,a", [(0.3, 2.0, 1.5, -0.7), (5.0, 1.0, 2.0, 1.9), (40.0, 0.5, 1.0, 0.2)])
def test_interval_closed_form_grid(r, D, A, a):
    cf = expected_hitting_interval(Constant(r), D, A, A, a)
    assert cf.value == pytest.approx(_interval_mp(r, D, A, abs(a)), rel=1e-12)


def test_interval_small_rate_limit():
    lim = expected_hitting_interval(Constant(0.0), 1.0, 1.0, 2.0, 0.5).value
    near = expected_hitting_interval(Constant(1e-10), 1.0, 1.0, 2.0, 0.5).value
    assert near == pytest.approx(lim, rel=1e-6)


def test_interval_general_rate_between_constants():
    # r between 0.5 and 2 on the interval: hitting times are bracketed
    rate = PowerLaw(0.5, 1.0, 1.0)
    L = 1.0
    lo = expected_hitting_interval(Constant(2.0), 1.0, L, L, 0.8).value
    hi = expected_hitting_interval(Constant(0.5), 1.0, L, L, 0.8).value
    mid = expected_hitting_interval(rate, 1.0, L, L, 0.8).value
    assert min(lo, hi) <= mid <= max(lo, hi)


def test_interval_rejects_outside_target():
    with pytest.raises(ParameterError):
        expected_hitting_interval(Constant(1.0), 1.0, 1.0, 1.0, 1.5)


def test_expected_hitting_dispatch():
    assert expected_hitting(Constant(2.0), 2.0, 1.0).method == CLOSED_FORM
    res = expected_hitting(QuadDecayPoly(3.0, 1.0, 1.0), 1.0, 1.0)
    assert res.finite and res.method != CLOSED_FORM
