"""Log-space helpers and Gauss-Legendre rules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

LOG2 = float(np.log(2.0))


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def log_expm1(x):
    """log(exp(x) - 1) for x > 0 without overflow or cancellation."""
    x = np.asarray(x, dtype=float)
    small = x < 30.0
    with np.errstate(divide="ignore"):
        out = np.where(small, np.log(np.expm1(np.minimum(x, 30.0))), x + np.log1p(-np.exp(-x)))
    return out if out.ndim else float(out)


def log1mexp(x):
    """log(1 - exp(-x)) for x > 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(x < LOG2, np.log(-np.expm1(-x)), np.log1p(-np.exp(-x)))
    return out if out.ndim else float(out)


def log_sinhc(x):
    """log(sinh(x)/x), with value 0 at x = 0."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x < 1e-4
    xs = np.where(small, 1.0, x)
    big = xs + log1mexp(2.0 * xs) - LOG2 - np.log(xs)
    out = np.where(small, x * x / 6.0, big)
    return out if out.ndim else float(out)


def log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    out = x + np.log1p(np.exp(-2.0 * x)) - LOG2
    return out if out.ndim else float(out)


def lse(values, b=None) -> float:
    return float(logsumexp(values, b=b))
