import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from resetsearch import Constant, QuadDecayPoly, Tabulated
from resetsearch._kernels import BACKEND, ZIG_FI, ZIG_KI, ZIG_WI, get_backend, thread_count

core = pytest.importorskip("resetsearch._kernels._core")
py = get_backend("python")


def _probe_backend(env_value):
    env = dict(os.environ)
    env.pop("RESETSEARCH_BACKEND", None)
    if env_value is not None:
        env["RESETSEARCH_BACKEND"] = env_value
    out = subprocess.run([sys.executable, "-c", "import resetsearch; print(resetsearch.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_backend_selection():
    assert BACKEND in ("compiled", "python")
    assert _probe_backend(None) == "compiled"
    assert _probe_backend("python") == "python"
    with pytest.raises(ValueError):
        get_backend("gpu")


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("RESETSEARCH_THREADS", "1")
    assert thread_count() == 1
    monkeypatch.setenv("RESETSEARCH_THREADS", "junk")
    assert thread_count() >= 1


def test_normal_streams_identical_across_backends():
    a = core.normals(123, 4, 2000, ZIG_KI, ZIG_WI, ZIG_FI)
    b = py.normals(123, 4, 2000, ZIG_KI, ZIG_WI, ZIG_FI)
    np.testing.assert_array_equal(a, b)


def test_normal_streams_are_standard_normal():
    z = core.normals(7, 0, 100_000, ZIG_KI, ZIG_WI, ZIG_FI)
    assert abs(z.mean()) < 0.02 and abs(z.std() - 1) < 0.02
    assert stats.kstest(z, "norm").pvalue > 1e-3
    other = core.normals(7, 1, 1000, ZIG_KI, ZIG_WI, ZIG_FI)
    assert not np.array_equal(z[:1000], other)


@pytest.mark.parametrize("rate", [
    Constant(1.5),
    QuadDecayPoly(3.0, 1.0, 1.0),
    Tabulated((-2.0, -0.5, 0.5, 2.0), (1.0, 0.2, 0.4, 2.0), tail_left=(1.0, 0.0),
              tail_right=(2.0, 0.0)),
])
@pytest.mark.parametrize("interval", [False, True])
def test_hitting_steps_identical(rate, interval):
    spec = rate.kernel_spec
    args = (spec.kind, spec.params, spec.knots, spec.coef, 1.0, 0.6, interval, 1.0, 1.0,
            1e-3, 20_000, True, 99, 10, 150, ZIG_KI, ZIG_WI, ZIG_FI, 1)
    np.testing.assert_array_equal(core.hitting_steps(*args), py.hitting_steps(*args))


def test_hitting_steps_thread_count_does_not_matter():
    spec = Constant(1.0).kernel_spec
    base = (spec.kind, spec.params, spec.knots, spec.coef, 1.0, 0.6, False, 0.0, 0.0,
            1e-3, 20_000, True, 5, 0, 500, ZIG_KI, ZIG_WI, ZIG_FI)
    np.testing.assert_array_equal(core.hitting_steps(*base, 1), core.hitting_steps(*base, 4))


@pytest.mark.parametrize("rate", [Constant(0.5), QuadDecayPoly(3.0, 1.0, 1.0),
                                  Tabulated((-1.0, 0.0, 1.0), (0.5, 0.0, 1.0))])
def test_rate_values_agree(rate):
    spec = rate.kernel_spec
    x = np.linspace(-5, 5, 1001)
    np.testing.assert_allclose(core.rate_values(spec.kind, spec.params, spec.knots, spec.coef, x),
                               py.rate_values(spec.kind, spec.params, spec.knots, spec.coef, x),
                               rtol=1e-13, atol=0)
    np.testing.assert_allclose(core.rate_values(spec.kind, spec.params, spec.knots, spec.coef, x),
                               rate(x), rtol=1e-13, atol=1e-300)


def test_riccati_sweep_agrees():
    spec = QuadDecayPoly(3.0, 1.0, 1.0).kernel_spec
    args = (spec.kind, spec.params, spec.knots, spec.coef, 1.0, 0.0, 20.0, 0.0, 1e-8, 1e-3, 0.05,
            1e-12, 10**6)
    for a, b in zip(core.riccati_sweep(*args), py.riccati_sweep(*args)):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)
