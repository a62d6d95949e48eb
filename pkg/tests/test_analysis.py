import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resetsearch.analysis import (Affine, Exponential, FamilyBox, HyperbolicCosine,
                                  MollifiedPolynomial, PhiCandidate, StretchedExponential,
                                  estimate_growth, expected_search_time, moment_gate,
                                  optimize_constant_rate, optimize_family, sandwich_bounds,
                                  variational_objective)
from resetsearch.errors import (BoxExhausted, InadmissiblePhi, InfiniteSample, NonFinite,
                                ParameterError)
from resetsearch.harmonic import _Closed
from resetsearch.model import (Constant, Interval, Mixture, PointMass, PowerLaw, QuadDecayPoly,
                               StretchedExpHarmonic, TabulatedDensity, TriangularInterval,
                               TwoSidedExponential, UniformInterval, inverse_square)
from resetsearch.hitting import expected_hitting


def exp_objective(r, D, beta):
    s = math.sqrt(2 * r / D)
    return s / (r * (beta - s)) if s < beta else math.inf


# ---------------------------------------------------------------- objective


def test_objective_examples():
    assert expected_search_time(Constant(0.125), 1.0, TwoSidedExponential(1.0)).value == \
        pytest.approx(8.0, rel=1e-9)
    inf = expected_search_time(Constant(0.5), 1.0, TwoSidedExponential(1.0))
    assert not inf.finite and inf.value == math.inf
    uni = expected_search_time(Constant(0.0), 1.0, UniformInterval(1.0), Interval(1.0, 1.0))
    assert uni.value == pytest.approx(5 / 6, rel=1e-9)


@pytest.mark.parametrize("r", [0.01, 0.1, 0.3, 1.0, 3.0])
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_objective_matches_exponential_closed_form(r, beta):
    got = expected_search_time(Constant(r), 1.0, TwoSidedExponential(beta))
    want = exp_objective(r, 1.0, beta)
    if math.isinf(want):
        assert not got.finite
    else:
        assert got.value == pytest.approx(want, rel=1e-8)


def test_objective_boundary_s_equals_beta_is_infinite():
    # s = sqrt(2r/D) = beta exactly: the integrand tends to a constant
    assert not expected_search_time(Constant(2.0), 1.0, TwoSidedExponential(2.0)).finite


def _uniform_closed(x, A=1.0, D=1.0):
    return (2 * A * A / D) * ((math.cosh(2 * x) - 2 * math.cosh(x) + 1) / (x ** 3 * math.sinh(x))
                              - 1 / x ** 2)


def _interval_mp_objective(r, D, A, density):
    mp.mp.dps = 30
    k = mp.sqrt(2 * mp.mpf(r) / D)

    def e(t):
        return (mp.sinh(k * (A + t)) - mp.sinh(k * t) - mp.sinh(k * A)) / (r * mp.sinh(k * A))

    return float(2 * mp.quad(lambda t: e(t) * density(t), [0, A]))


@pytest.mark.parametrize("x", [0.3, 1.0, 2.5, 6.0])
def test_uniform_interval_closed_form(x):
    r = x * x / 2
    got = expected_search_time(Constant(r), 1.0, UniformInterval(1.0), Interval(1.0, 1.0)).value
    assert got == pytest.approx(_uniform_closed(x), rel=1e-9)
    assert got == pytest.approx(_interval_mp_objective(r, 1.0, 1.0, lambda t: 0.5), rel=1e-9)


@pytest.mark.parametrize("r", [0.2, 0.916, 4.0])
def test_triangular_interval_against_independent_quadrature(r):
    got = expected_search_time(Constant(r), 1.0, TriangularInterval(1.0), Interval(1.0, 1.0)).value
    want = _interval_mp_objective(r, 1.0, 1.0, lambda t: 1 - t)
    assert got == pytest.approx(want, rel=1e-9)


def test_asymmetric_interval_and_target():
    mu = Mixture((0.3, 0.7), (PointMass(-0.5), PointMass(1.5)))
    sup = Interval(1.0, 2.0)
    got = expected_search_time(Constant(0.8), 1.0, mu, sup).value
    from resetsearch.hitting import expected_hitting_interval as ehi
    want = 0.3 * ehi(Constant(0.8), 1.0, 1.0, 2.0, -0.5).value + \
        0.7 * ehi(Constant(0.8), 1.0, 1.0, 2.0, 1.5).value
    assert got == pytest.approx(want, rel=1e-12)


def test_point_mass_objective_is_hitting_time():
    rate = QuadDecayPoly(3.0, 1.0, 1.0)
    got = expected_search_time(rate, 1.0, Mixture((0.5, 0.5), (PointMass(2.0), PointMass(-1.0))))
    want = 0.5 * expected_hitting(rate, 1.0, 2.0).value + 0.5 * expected_hitting(rate, 1.0, -1.0).value
    assert got.value == pytest.approx(want, rel=1e-10)


def test_objective_target_outside_interval():
    with pytest.raises(ParameterError):
        expected_search_time(Constant(1.0), 1.0, UniformInterval(2.0), Interval(1.0, 1.0))


def test_objective_infinite_for_inverse_square_rate():
    res = expected_search_time(inverse_square(1.0, 1.0, 1.0), 1.0, UniformInterval(1.0))
    assert not res.finite and "classifier" in res.reason
    assert res.to_dict() == {"finite": False, "reason": res.reason}


def test_objective_quad_decay_finite_and_consistent_with_quadrature():
    rate = QuadDecayPoly(3.0, 1.0, 1.0)
    mu = TwoSidedExponential(1.0)
    got = expected_search_time(rate, 1.0, mu).value
    from scipy.integrate import quad
    f = lambda a: expected_hitting(rate, 1.0, a).value * math.exp(-a)
    want = quad(f, 0, 60, limit=200, epsrel=1e-9)[0]
    assert got == pytest.approx(want, rel=1e-6)


@pytest.mark.parametrize("lam,finite", [(1.5, True), (2.5, True), (2.9, True), (3.0, False),
                                        (4.0, False)])
def test_pareto_window_with_power_law_rate(lam, finite):
    # density tail |x|^-(p0+1) with p0 = 3; E_0 T_a ~ |a|^m with m(lam) = (1 + sqrt(1+8 lam))/2
    mu = TabulatedDensity((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), tail_index=3.0)
    res = expected_search_time(inverse_square(lam, 1.0, 1.0), 1.0, mu)
    assert res.finite == finite


def test_pareto_tail_too_heavy_for_any_power():
    mu = TabulatedDensity((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), tail_index=2.0)
    for lam in (1.5, 3.0):
        assert not expected_search_time(inverse_square(lam, 1.0, 1.0), 1.0, mu).finite


@pytest.mark.parametrize("desc,tail,expect", [
    (("exp", 0.5), ("exp", 1.0), True),
    (("exp", 1.0), ("exp", 1.0), False),
    (("power", 3.0), ("exp", 0.1), True),
    (("subexp",), ("exp", 1.0), True),
    (("superexp",), ("exp", 1.0), False),
    (("power", 2.0), ("power", 3.0), True),
    (("power", 3.0), ("power", 3.0), False),
    (("exp", 0.1), ("power", 9.0), False),
    (("superexp",), ("compact",), True),
    (("infinite",), ("compact",), False),
    (("boundary",), ("exp", 1.0), None),
])
def test_moment_gate(desc, tail, expect):
    assert moment_gate(desc, tail) is expect


# ---------------------------------------------------------------- optimizers


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_constant_rate_optimum_exponential(beta):
    rep = optimize_constant_rate(1.0, TwoSidedExponential(beta))
    assert rep.params["r"] == pytest.approx(beta ** 2 / 8, rel=1e-4)
    assert rep.value == pytest.approx(8 / beta ** 2, rel=1e-8)
    assert rep.converged and not rep.boundary
    assert rep.value == min(v for _, v in rep.trace)
    assert rep.evaluations == len(rep.trace)


def test_constant_rate_optimum_is_sound():
    rep = optimize_constant_rate(2.0, TwoSidedExponential(1.5))
    for factor in (0.9, 1.1):
        neighbour = expected_search_time(Constant(rep.params["r"] * factor), 2.0,
                                         TwoSidedExponential(1.5)).value
        assert neighbour >= rep.value


def test_uniform_interval_boundary_optimum():
    rep = optimize_constant_rate(1.0, UniformInterval(1.0), Interval(1.0, 1.0))
    assert rep.params["r"] == 0.0 and rep.boundary
    assert rep.value == pytest.approx(5 / 6, abs=1e-9)


def test_triangular_interval_optimum():
    rep = optimize_constant_rate(1.0, TriangularInterval(1.0), Interval(1.0, 1.0))
    assert rep.params["x"] == pytest.approx(1.3538, abs=1e-3)
    assert rep.value == pytest.approx(0.495, rel=1e-2)
    assert rep.params["r"] == pytest.approx(0.916, rel=1e-2)
    assert isinstance(rep.params["r"], float)


def test_constant_optimizer_nonfinite():
    mu = TabulatedDensity((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), tail_index=2.0)
    with pytest.raises(NonFinite):
        optimize_constant_rate(1.0, mu)


def test_family_objective_near_m2_is_worse():
    mu = TwoSidedExponential(1.0)
    at3 = expected_search_time(QuadDecayPoly(3.0, 1.0, 1.0), 1.0, mu).value
    prev = at3
    for m in (2.05, 2.01, 2.001):
        near = expected_search_time(QuadDecayPoly(m, 1.0, 1.0), 1.0, mu)
        assert not near.finite or near.value > prev
        prev = near.value


def test_family_box_exhausted_reports_trace():
    with pytest.raises(BoxExhausted) as info:
        optimize_family(1.0, TwoSidedExponential(1.0), box=FamilyBox(m=(2.05, 3.0)))
    rep = info.value.report
    assert rep.boundary and not rep.converged
    assert rep.params["m"] == pytest.approx(3.0, abs=1e-2)
    assert rep.trace and rep.value == min(v for _, v in rep.trace)


def test_family_rejects_bad_box():
    with pytest.raises(ParameterError):
        optimize_family(1.0, TwoSidedExponential(1.0), box=FamilyBox(m=(1.5, 3.0)))


# ---------------------------------------------------------------- variational


def test_variational_cosh_equals_constant_rate():
    val = variational_objective(HyperbolicCosine(1.0), 2.0, TwoSidedExponential(2.0))
    assert val.value == pytest.approx(1.0, rel=1e-9)
    direct = expected_search_time(Constant(1.0), 2.0, TwoSidedExponential(2.0)).value
    assert val.value == pytest.approx(direct, rel=1e-9)


def test_variational_exponential_candidate_mixed_forms():
    # phi = e^{x/2}: induced r = D/8, phi^-2 integrable only at +inf
    val = variational_objective(Exponential(0.5), 1.0, TwoSidedExponential(1.0))
    assert val.value == pytest.approx(8.0, rel=1e-8)
    with pytest.raises(InadmissiblePhi):
        variational_objective(Exponential(0.5), 1.0, TwoSidedExponential(1.0), form="i")
    assert variational_objective(Exponential(0.5), 1.0, TwoSidedExponential(1.0),
                                 form="ii").value == pytest.approx(8.0, rel=1e-8)


def test_variational_polynomial_matches_oracle():
    mu = TwoSidedExponential(1.0)
    val = variational_objective(MollifiedPolynomial(3.0, 1.0), 1.0, mu).value
    oracle = expected_search_time(QuadDecayPoly(3.0, 1.0, 1.0), 1.0, mu).value
    assert val == pytest.approx(oracle, rel=1e-5)


def test_variational_stretched_matches_oracle():
    mu = TwoSidedExponential(3.0)
    val = variational_objective(StretchedExponential(0.5, 1.0, 0.0), 1.0, mu).value
    oracle = expected_search_time(StretchedExpHarmonic(0.5, 1.0, 0.0, 1.0), 1.0, mu).value
    assert val == pytest.approx(oracle, rel=1e-5)


@settings(max_examples=15, deadline=None)
@given(s=st.floats(0.05, 0.9), beta=st.floats(1.0, 3.0))
def test_variational_cosh_matches_closed_form(s, beta):
    D = 1.0
    r = 0.5 * D * s * s
    val = variational_objective(HyperbolicCosine(s), D, TwoSidedExponential(beta))
    assert val.value == pytest.approx(exp_objective(r, D, beta), rel=1e-7)


class _GaussRep(_Closed):
    name = "gauss"

    def lf(self, x):
        return -np.asarray(x, dtype=float) ** 2

    def psi(self, x):
        return -2.0 * np.asarray(x, dtype=float)

    def dpsi(self, x):
        return np.full(np.shape(x), -2.0)


@dataclass(frozen=True)
class _Gauss(PhiCandidate):
    name = "gauss"

    def rep(self):
        return _GaussRep()


def test_variational_rejects_concave_and_affine():
    with pytest.raises(InadmissiblePhi):
        variational_objective(_Gauss(), 1.0, TwoSidedExponential(1.0))
    with pytest.raises(InadmissiblePhi):
        variational_objective(Affine(1.0, 0.0), 1.0, TwoSidedExponential(1.0))
    with pytest.raises(InadmissiblePhi):
        variational_objective(Affine(1.0, 0.5), 1.0, TwoSidedExponential(1.0))
    with pytest.raises(InadmissiblePhi):
        variational_objective(HyperbolicCosine(-1.0), 1.0, TwoSidedExponential(1.0))


def test_variational_form_mismatch_for_two_sided_phi():
    with pytest.raises(InadmissiblePhi):
        variational_objective(HyperbolicCosine(1.0), 1.0, TwoSidedExponential(2.0), form="ii")


# ---------------------------------------------------------------- growth


@pytest.mark.parametrize("m", [2.5, 3.0, 4.0])
def test_power_growth_exponent(m):
    fit = estimate_growth(QuadDecayPoly(m, 1.0, 1.0), 1.0, [10, 20, 40, 80, 160])
    assert fit.exponent == pytest.approx(m, abs=0.05)
    assert fit.r_squared > 0.999


def test_logpoly_constant_rate():
    fit = estimate_growth(Constant(1.0), 1.0, [5, 10, 20, 40], model="logpoly", l=0.0)
    assert fit.K == pytest.approx(math.sqrt(2), abs=0.02)
    assert fit.exponent == 1.0


@pytest.mark.parametrize("l", [0.5, 1.0])
def test_logpoly_stretched_within_sandwich(l):
    rate = StretchedExpHarmonic(1.0, 1.0, l, 1.0)
    fit = estimate_growth(rate, 1.0, np.linspace(5, 40, 8), model="logpoly", l=l)
    box = sandwich_bounds(rate, 1.0, l)
    assert box.K1 <= fit.K <= box.K2
    assert fit.r_squared > 0.999


def test_sandwich_requires_valid_l():
    with pytest.raises(ParameterError):
        sandwich_bounds(Constant(1.0), 1.0, -1.0)


def test_growth_errors():
    with pytest.raises(InfiniteSample):
        estimate_growth(inverse_square(1.0, 1.0, 1.0), 1.0, [1, 2, 3, 4])
    with pytest.raises(ParameterError):
        estimate_growth(Constant(1.0), 1.0, [1, 2, 3])
    with pytest.raises(ParameterError):
        estimate_growth(Constant(1.0), 1.0, [0, 1, 2, 3])
    with pytest.raises(ParameterError):
        estimate_growth(Constant(1.0), 1.0, [1, 2, 3, 4], model="cubic")


def test_growth_fit_serializes():
    fit = estimate_growth(PowerLaw(3.0, 1.0, -1.0), 1.0, [10, 20, 40, 80])
    d = fit.to_dict()
    assert d["model"] == "power" and d["a_range"] == [10.0, 80.0]
    assert len(fit.table) == 4


@pytest.mark.parametrize("beta", [0.05, 0.1, 0.5, 2.0])
def test_quad_family_objective_scales_as_inverse_beta_squared(beta):
    # x -> beta x maps QuadDecayPoly(m, gamma) to QuadDecayPoly(m, gamma beta^-m)
    m, gamma = 4.2, 3.0
    base = expected_search_time(QuadDecayPoly(m, gamma, 1.0), 1.0, TwoSidedExponential(1.0)).value
    moved = expected_search_time(QuadDecayPoly(m, gamma * beta ** -m, 1.0), 1.0,
                                 TwoSidedExponential(beta)).value
    assert moved * beta ** 2 == pytest.approx(base, rel=1e-7)
