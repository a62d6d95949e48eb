"""Pure-Python twins of the compiled kernels.

Monte Carlo is vectorized across paths; each path still draws from its own
stream in the same order as the compiled loop, so both backends return the
same hitting steps for the same seed.
"""
from __future__ import annotations

import math

import numpy as np

from ._rng import ZIG_FI, ZIG_INV_R, ZIG_KI, ZIG_R, ZIG_WI, VecStreams, path_states


def _rate_scalar(kind: int, p: np.ndarray, knots: np.ndarray, coef: np.ndarray):
    """Return a scalar ``r(x)`` closure mirroring the compiled ``rate_at``."""
    p = [float(v) for v in p] + [0.0] * 6
    if kind == 0:
        r0 = p[0]
        return lambda x: r0
    if kind == 1:
        c, g, l = p[0], p[1], p[2]
        return lambda x: c * math.pow(g + x * x, l)
    if kind == 2:
        m, g, d = p[0], p[1], p[2]

        def quad(x):
            ax = abs(x)
            return 0.5 * m * (m - 1.0) * d * math.pow(ax, m - 2.0) / (g + math.pow(ax, m))

        return quad
    if kind == 3:
        lam, g, l, d = p[0], p[1], p[2], p[3]

        def stretched(x):
            s = g + x * x
            return (0.5 * d * lam * (l + 1.0) * math.pow(s, 0.5 * (l - 3.0))
                    * ((l + 1.0) * lam * x * x * math.pow(s, 0.5 * (l + 1.0)) + g + l * x * x))

        return stretched
    kn = [float(v) for v in knots]
    n = len(kn)
    cf = np.asarray(coef, dtype=float).reshape(4, n - 1)
    cl, pl, cr, pr = p[0], p[1], p[2], p[3]

    def tabulated(x):
        if x < kn[0]:
            return cl * math.pow(abs(x), -pl)
        if x > kn[n - 1]:
            return cr * math.pow(abs(x), -pr)
        lo, hi = 0, n - 1
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if kn[mid] <= x:
                lo = mid
            else:
                hi = mid
        dx = x - kn[lo]
        s = ((cf[0, lo] * dx + cf[1, lo]) * dx + cf[2, lo]) * dx + cf[3, lo]
        return s if s > 0.0 else 0.0

    return tabulated


def _rate_vector(kind: int, p: np.ndarray, knots: np.ndarray, coef: np.ndarray, x: np.ndarray):
    p = np.concatenate([np.asarray(p, dtype=float), np.zeros(6)])
    x = np.asarray(x, dtype=float)
    if kind == 0:
        return np.full(x.shape, p[0])
    if kind == 1:
        return p[0] * np.power(p[1] + x * x, p[2])
    if kind == 2:
        m, g, d = p[0], p[1], p[2]
        ax = np.abs(x)
        return 0.5 * m * (m - 1.0) * d * np.power(ax, m - 2.0) / (g + np.power(ax, m))
    if kind == 3:
        lam, g, l, d = p[0], p[1], p[2], p[3]
        s = g + x * x
        return (0.5 * d * lam * (l + 1.0) * np.power(s, 0.5 * (l - 3.0))
                * ((l + 1.0) * lam * x * x * np.power(s, 0.5 * (l + 1.0)) + g + l * x * x))
    f = _rate_scalar(kind, p, knots, coef)
    return np.array([f(float(v)) for v in x.ravel()]).reshape(x.shape)


def rate_values(kind, params, knots, coef, x):
    return _rate_vector(kind, np.asarray(params), np.asarray(knots), np.asarray(coef),
                        np.asarray(x, dtype=float))


def normals(seed, path, n, ki=None, wi=None, fi=None):
    streams = VecStreams(seed, np.array([path], dtype=np.uint64))
    idx = np.zeros(1, dtype=np.intp)
    return np.array([streams.normal(idx)[0] for _ in range(n)])


def hitting_steps(kind, params, knots, coef, D, a, interval, L1, L2, dt, max_steps, bridge,
                  seed, first_path, n_paths, ki=None, wi=None, fi=None, num_threads=1):
    paths = np.arange(first_path, first_path + n_paths, dtype=np.uint64)
    streams = VecStreams(seed, paths)
    out = np.full(n_paths, -1, dtype=np.int64)
    x = np.zeros(n_paths)
    hz = np.zeros(n_paths)
    all_idx = np.arange(n_paths)
    thr = -np.log1p(-streams.next_double(all_idx))
    steps = np.zeros(n_paths, dtype=np.int64)
    sdt = math.sqrt(D * dt)
    ddt = D * dt
    p = np.asarray(params, dtype=float)
    kn = np.asarray(knots, dtype=float)
    cf = np.asarray(coef, dtype=float)
    live = all_idx.copy()
    while live.size:
        live = live[steps[live] < max_steps]
        if not live.size:
            break
        xl = x[live]
        rx = _rate_vector(kind, p, kn, cf, xl)
        pos = rx > 0.0
        hz_new = np.where(pos, hz[live] + rx * dt, hz[live])
        hz[live] = hz_new
        reset = pos & (hz_new >= thr[live])
        steps[live] += 1
        if reset.any():
            r_idx = live[reset]
            x[r_idx] = 0.0
            hz[r_idx] = 0.0
            thr[r_idx] = -np.log1p(-streams.next_double(r_idx))
        mv = live[~reset]
        if not mv.size:
            continue
        x0 = x[mv]
        xn = x0 + sdt * streams.normal(mv)
        hit = (x0 - a) * (xn - a) <= 0.0
        if bridge:
            arg = 2.0 * (a - x0) * (a - xn) / ddt
            test = ~hit & (arg < 40.0)
            if test.any():
                u = streams.next_double(mv[test])
                sub = np.flatnonzero(test)
                hit[sub[u < np.exp(-arg[test])]] = True
        out[mv[hit]] = steps[mv[hit]]
        stay = ~hit
        if interval:
            back = stay & ((xn <= -L1) | (xn >= L2))
            if bridge:
                for edge in (-L1, L2):
                    arg = 2.0 * (x0 - edge) * (xn - edge) / ddt
                    test = stay & ~back & (arg < 40.0)
                    if test.any():
                        u = streams.next_double(mv[test])
                        sub = np.flatnonzero(test)
                        back[sub[u < np.exp(-arg[test])]] = True
            xn = np.where(back, 0.0, xn)
        x[mv[stay]] = xn[stay]
        live = np.concatenate([live[reset], mv[stay]])
        live.sort()
    return out


def _rk4(rate, two_d, x, psi, lphi, h):
    k1 = two_d * rate(x) - psi * psi
    p2 = psi + 0.5 * h * k1
    k2 = two_d * rate(x + 0.5 * h) - p2 * p2
    p3 = psi + 0.5 * h * k2
    k3 = two_d * rate(x + 0.5 * h) - p3 * p3
    p4 = psi + h * k3
    k4 = two_d * rate(x + h) - p4 * p4
    return (psi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0,
            lphi + h * (psi + 2.0 * p2 + 2.0 * p3 + p4) / 6.0)


def riccati_sweep(kind, params, knots, coef, D, x0, x1, psi0, tol, h0, hmax, hmin, max_steps):
    rate = _rate_scalar(kind, np.asarray(params), np.asarray(knots), np.asarray(coef))
    two_d = 2.0 / D
    direction = 1.0 if x1 > x0 else -1.0
    x, psi, lphi, h = x0, psi0, 0.0, h0
    xs, ps, ls = [x], [psi], [lphi]
    status = 0
    while True:
        remaining = (x1 - x) * direction
        if remaining <= 0.0:
            break
        if len(xs) >= max_steps:
            status = 2
            break
        h = min(h, remaining)
        hs = direction * h
        fp, fl = _rk4(rate, two_d, x, psi, lphi, hs)
        hp, hl = _rk4(rate, two_d, x, psi, lphi, 0.5 * hs)
        hp2, hl2 = _rk4(rate, two_d, x + 0.5 * hs, hp, hl, 0.5 * hs)
        err = max(abs(hp2 - fp) / (15.0 * (1.0 + abs(hp2))), abs(hl2 - fl) / 15.0)
        if err <= tol * h:
            x = x1 if h == remaining else x + hs
            psi = hp2 + (hp2 - fp) / 15.0
            lphi = hl2 + (hl2 - fl) / 15.0
            xs.append(x)
            ps.append(psi)
            ls.append(lphi)
            fac = min(4.0, max(0.2, 0.9 * (tol * h / err) ** 0.25)) if err > 0.0 else 4.0
            h = min(h * fac, hmax)
        else:
            h *= max(0.2, 0.9 * (tol * h / err) ** 0.25)
            if h < hmin:
                status = 1
                break
    return np.array(xs), np.array(ps), np.array(ls), status


__all__ = ["hitting_steps", "normals", "path_states", "rate_values", "riccati_sweep",
           "ZIG_FI", "ZIG_INV_R", "ZIG_KI", "ZIG_R", "ZIG_WI"]
