"""The ten acceptance criteria, one test each, at their stated tolerances.

Each test records a PASS/FAIL line through ``acceptance_report`` before
asserting, so the summary shows every criterion even when one fails.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from resetsearch import (Constant, HyperbolicCosine, Interval, MollifiedPolynomial, PowerLaw,
                         QuadDecayPoly, SimConfig, StretchedExpHarmonic, TriangularInterval,
                         TwoSidedExponential, UniformInterval, classify_finiteness,
                         estimate_growth, expected_hitting_constant, expected_hitting_general,
                         expected_hitting_interval, expected_search_time, hitting_components,
                         inverse_square, optimize_constant_rate, optimize_family,
                         simulate_hitting, solve_phi, variational_objective)

ARTIFACTS = Path(__file__).resolve().parent.parent / "acceptance_artifacts"


def _rel(x, y):
    return abs(x - y) / abs(y)


def test_criterion_01_constant_closed_form(acceptance_report):
    t0 = time.perf_counter()
    worst = 0.0
    for r in (0.1, 1.0, 10.0):
        for D in (0.5, 1.0, 2.0):
            for a in (0.5, -0.5, 1.0, -1.0, 5.0, -5.0):
                want = expected_hitting_constant(r, D, a).value
                for phi in ("phi3", "phi1"):
                    got = expected_hitting_general(Constant(r), D, a, phi=phi).value
                    worst = max(worst, _rel(got, want))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt < 10
    acceptance_report(1, ok, f"max rel err {worst:.2e} over 54 x 2 paths, {dt:.2f} s")
    assert worst <= 1e-6
    assert dt < 10


def test_criterion_02_monte_carlo(acceptance_report):
    t0 = time.perf_counter()
    cfg = SimConfig(dt=1e-4, n_paths=200_000, bridge_correction=True, seed=0)
    full = simulate_hitting(Constant(2.0), 2.0, 1.0, None, cfg)
    truth_full = expected_hitting_constant(2.0, 2.0, 1.0).value
    box = simulate_hitting(Constant(0.0), 1.0, 0.5, Interval(1.0, 1.0), cfg)
    truth_box = expected_hitting_interval(Constant(0.0), 1.0, 1.0, 1.0, 0.5).value
    dt = time.perf_counter() - t0
    z_full = (full.mean - truth_full) / full.stderr
    z_box = (box.mean - truth_box) / box.stderr
    ok = abs(z_full) <= 3 and abs(z_box) <= 3 and dt < 120
    acceptance_report(2, ok, f"full line {full.mean:.5f} vs {truth_full:.5f} (z={z_full:+.2f}), "
                             f"interval {box.mean:.5f} vs {truth_box:.5f} (z={z_box:+.2f}), "
                             f"{dt:.0f} s")
    assert abs(z_full) <= 3 and abs(z_box) <= 3
    assert dt < 120


def test_criterion_03_exponential_target_optimum(acceptance_report):
    details, ok = [], True
    for beta in (0.5, 1.0, 2.0):
        rep = optimize_constant_rate(1.0, TwoSidedExponential(beta))
        er = _rel(rep.params["r"], beta ** 2 / 8)
        ev = _rel(rep.value, 8 / beta ** 2)
        ok &= er <= 0.01 and ev <= 0.005
        details.append(f"beta={beta}: r* err {er:.1e}, value err {ev:.1e}")
    acceptance_report(3, ok, "; ".join(details))
    assert ok


def test_criterion_04_uniform_interval(acceptance_report):
    rep = optimize_constant_rate(1.0, UniformInterval(1.0), Interval(1.0, 1.0))
    ok = rep.params["r"] == 0.0 and abs(rep.value - 5 / 6) <= 1e-6
    acceptance_report(4, ok, f"r*={rep.params['r']}, value={rep.value:.10f} (5/6={5/6:.10f})")
    assert ok


def test_criterion_05_triangular_interval(acceptance_report):
    mu = TriangularInterval(1.0)
    rep = optimize_constant_rate(1.0, mu, Interval(1.0, 1.0))
    x, value = rep.params["x"], rep.value
    ratio = value / mu.avg_dist() ** 2
    ok = abs(x - 1.3538) <= 0.01 and _rel(value, 0.495) <= 0.01 and _rel(ratio, 4.455) <= 0.01
    acceptance_report(5, ok, f"x*={x:.5f}, objective={value:.6f}, r*={rep.params['r']:.5f}, "
                             f"ratio={ratio:.4f}")
    assert ok


def test_criterion_06_finiteness_dichotomy(acceptance_report):
    rows, ok = [], True
    for D in (0.5, 1.0, 2.0):
        for lam, expect in ((1.0, "infinite"), (2.0, "finite")):
            rate = inverse_square(lam, 1.0, D)
            cls = classify_finiteness(rate, D).value
            quad = expected_hitting_general(rate, D, 1.0, check=False).quadrature
            ok &= cls == expect and quad == expect
            rows.append(f"D={D},lam={lam}:{cls}/{quad}")
    acceptance_report(6, ok, " ".join(rows))
    assert ok


def test_criterion_07_power_law_exponent(acceptance_report):
    t0 = time.perf_counter()
    a = np.geomspace(10, 160, 5)
    rows, ok = [], True
    for lam in (1.5, 3.0, 6.0):
        m = 0.5 * (1 + math.sqrt(1 + 8 * lam))
        fit = estimate_growth(QuadDecayPoly(m, 1.0, 1.0), 1.0, a)
        ok &= abs(fit.exponent - m) <= 0.1
        rows.append(f"lam={lam}: m={m:.4f} fit={fit.exponent:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    acceptance_report(7, ok, "; ".join(rows) + f"; {dt:.1f} s")
    assert ok


def test_criterion_08_stretched_growth(acceptance_report):
    rows, ok = [], True
    for l in (0.5, 1.0):
        rate = StretchedExpHarmonic(1.0, 1.0, l, 1.0)
        base = estimate_growth(rate, 1.0, np.linspace(5, 40, 8), model="logpoly", l=l)
        wide = estimate_growth(rate, 1.0, np.linspace(5, 80, 16), model="logpoly", l=l)
        drift = _rel(wide.K, base.K)
        ok &= base.r_squared > 0.999 and base.K > 0 and drift <= 0.05
        rows.append(f"l={l}: K={base.K:.5f} R2={base.r_squared:.7f} doubled K={wide.K:.5f} "
                    f"({drift:.1e})")
    acceptance_report(8, ok, "; ".join(rows))
    assert ok


def test_criterion_09_quadratic_family(acceptance_report):
    ARTIFACTS.mkdir(exist_ok=True)
    rows, strict_ok, allowed_ok, dump = [], True, True, {}
    for beta in (0.05, 0.1, 0.5):
        rep = optimize_family(1.0, TwoSidedExponential(beta))
        target = (8.14 + 12.42 * math.exp(-35.66 * beta)) / beta ** 2
        dev = (rep.value - target) / target
        strict_ok &= abs(dev) <= 0.02
        allowed_ok &= abs(dev) <= 0.05
        rows.append(f"beta={beta}: {rep.value:.6g} vs fit {target:.6g} ({dev:+.2%}), "
                    f"m={rep.params['m']:.4f} gamma={rep.params['gamma']:.4g}")
        dump[str(beta)] = {"target": target, "deviation": dev, **rep.to_dict()}
    path = ARTIFACTS / "criterion09_trace.json"
    path.write_text(json.dumps(dump, indent=1))
    acceptance_report(9, allowed_ok, "; ".join(rows) + f"; trace in {path.name}"
                      + ("" if strict_ok else " (outside 2%)"))
    # 2% is the target; up to 5% is acceptable when the trace is attached
    assert allowed_ok


def test_criterion_10_property_suite(acceptance_report):
    t0 = time.perf_counter()
    checks = {}
    rates = [QuadDecayPoly(3.0, 1.0, 1.0), PowerLaw(3.0, 1.0, -1.0), Constant(0.7),
             StretchedExpHarmonic(1.0, 1.0, 0.5, 1.0)]
    ok = True
    for rate in rates:
        for a in (-2.0, 0.5, 3.0):
            p3 = expected_hitting_general(rate, 1.0, a, phi="phi3")
            p1 = expected_hitting_general(rate, 1.0, a, phi="phi1")
            ok &= abs(p3.log_value - p1.log_value) <= p3.error_estimate + p1.error_estimate
    checks["equivalence"] = ok

    ok = True
    for rate, double in ((Constant(0.7), Constant(1.4)),
                         (PowerLaw(1.0, 1.0, 1.0), PowerLaw(2.0, 1.0, 1.0)),
                         (PowerLaw(3.0, 1.0, -1.0), PowerLaw(6.0, 1.0, -1.0))):
        s1, s2 = solve_phi(rate, 1.0), solve_phi(double, 1.0)
        for a in (0.5, -2.0, 4.0):
            c1, c2 = hitting_components(s1, a), hitting_components(s2, a)
            ok &= c2.log_u <= c1.log_u + 1e-9 and c2.log_v <= c1.log_v + 1e-9
    checks["monotonicity"] = ok

    ok = True
    for rate in rates:
        for a in (0.3, 2.0, 6.0):
            ok &= abs(expected_hitting_general(rate, 1.0, a).log_value
                      - expected_hitting_general(rate, 1.0, -a).log_value) <= 1e-8
    checks["symmetry"] = ok

    mu = TwoSidedExponential(1.0)
    var = variational_objective(MollifiedPolynomial(3.0, 1.0), 1.0, mu).value
    oracle = expected_search_time(QuadDecayPoly(3.0, 1.0, 1.0), 1.0, mu).value
    cosh = variational_objective(HyperbolicCosine(1.0), 2.0, TwoSidedExponential(2.0)).value
    checks["variational"] = _rel(var, oracle) <= 1e-5 and abs(cosh - 1.0) <= 1e-8

    cfg = SimConfig(dt=1e-3, n_paths=5000, seed=7)
    first = simulate_hitting(Constant(2.0), 2.0, 1.0, None, cfg)
    second = simulate_hitting(Constant(2.0), 2.0, 1.0, None, cfg)
    checks["replay"] = first == second

    dt = time.perf_counter() - t0
    ok = all(checks.values())
    acceptance_report(10, ok, ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items())
                      + f"; {dt:.1f} s (full-suite time is reported by pytest)")
    assert ok
