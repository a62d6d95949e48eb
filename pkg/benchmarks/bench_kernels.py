"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel runs on both
backends with identical inputs; integer outputs (Monte Carlo steps) must
match exactly and float outputs to 1e-13 relative.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from resetsearch import Constant, QuadDecayPoly
from resetsearch._kernels import ZIG_FI, ZIG_KI, ZIG_WI, get_backend


def _time(fn, repeat: int) -> tuple[float, object]:
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_mc(kern, n_paths: int, dt: float):
    spec = Constant(2.0).kernel_spec
    return lambda: kern.hitting_steps(spec.kind, spec.params, spec.knots, spec.coef, 2.0, 1.0,
                                      False, 0.0, 0.0, dt, 10**8, True, 7, 0, n_paths,
                                      ZIG_KI, ZIG_WI, ZIG_FI, 1)


def bench_riccati(kern):
    spec = QuadDecayPoly(3.0, 1.0, 1.0).kernel_spec
    return lambda: kern.riccati_sweep(spec.kind, spec.params, spec.knots, spec.coef, 1.0,
                                      0.0, 50.0, 0.0, 1e-8, 1e-3, 0.05, 1e-12, 10**6)


def bench_rate(kern, n: int):
    spec = QuadDecayPoly(3.0, 1.0, 1.0).kernel_spec
    x = np.linspace(-20.0, 20.0, n)
    return lambda: kern.rate_values(spec.kind, spec.params, spec.knots, spec.coef, x)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        fast = get_backend("compiled")
    except ImportError:
        raise SystemExit("compiled backend not built; run pip install -e . --no-build-isolation")
    slow = get_backend("python")
    cases = [
        ("monte carlo steps", lambda k: bench_mc(k, args.paths, args.dt)),
        ("riccati sweep", bench_riccati),
        ("rate values (1e5)", lambda k: bench_rate(k, 100_000)),
    ]
    print(f"{'kernel':<22}{'compiled s':>12}{'python s':>12}{'speedup':>10}  match")
    for name, make in cases:
        tc, oc = _time(make(fast), args.repeat)
        tp, op = _time(make(slow), 1)
        if isinstance(oc, tuple):
            same = all(np.allclose(a, b, rtol=1e-12, atol=0) if np.ndim(a) else a == b
                       for a, b in zip(oc, op))
        elif np.asarray(oc).dtype.kind == "f":
            same = bool(np.allclose(oc, op, rtol=1e-13, atol=0))
        else:
            same = bool(np.array_equal(oc, op))
        print(f"{name:<22}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}  {same}")


if __name__ == "__main__":
    main()
