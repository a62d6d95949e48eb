# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: rate evaluation, Monte Carlo hitting times, Riccati sweep.

Every routine here has a line-for-line twin in ``_fallback.py``; keep the
floating-point operation order identical when editing either file.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, fabs, log1p, pow, sqrt
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc, realloc

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t PATH_SALT = 0xD1B54A32D192ED03ULL
cdef double ZIG_R = 3.6541528853610088
cdef double ZIG_INV_R = 1.0 / 3.6541528853610088


ctypedef struct RateSpec:
    int kind
    double p[6]
    const double* knots
    const double* coef
    Py_ssize_t nk


cdef inline double rate_at(const RateSpec* rs, double x) noexcept nogil:
    cdef double ax, s, m, g, l
    cdef Py_ssize_t lo, hi, mid, n
    cdef double dx
    if rs.kind == 0:
        return rs.p[0]
    elif rs.kind == 1:
        return rs.p[0] * pow(rs.p[1] + x * x, rs.p[2])
    elif rs.kind == 2:
        m = rs.p[0]
        g = rs.p[1]
        ax = fabs(x)
        return 0.5 * m * (m - 1.0) * rs.p[2] * pow(ax, m - 2.0) / (g + pow(ax, m))
    elif rs.kind == 3:
        g = rs.p[1]
        l = rs.p[2]
        s = g + x * x
        return (0.5 * rs.p[3] * rs.p[0] * (l + 1.0) * pow(s, 0.5 * (l - 3.0))
                * ((l + 1.0) * rs.p[0] * x * x * pow(s, 0.5 * (l + 1.0)) + g + l * x * x))
    else:
        n = rs.nk
        if x < rs.knots[0]:
            return rs.p[0] * pow(fabs(x), -rs.p[1])
        if x > rs.knots[n - 1]:
            return rs.p[2] * pow(fabs(x), -rs.p[3])
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if rs.knots[mid] <= x:
                lo = mid
            else:
                hi = mid
        dx = x - rs.knots[lo]
        s = ((rs.coef[lo] * dx + rs.coef[(n - 1) + lo]) * dx
             + rs.coef[2 * (n - 1) + lo]) * dx + rs.coef[3 * (n - 1) + lo]
        return s if s > 0.0 else 0.0


cdef RateSpec make_spec(int kind, const double[::1] params, const double[::1] knots,
                        const double[::1] coef):
    cdef RateSpec rs
    cdef Py_ssize_t i
    rs.kind = kind
    for i in range(6):
        rs.p[i] = params[i] if i < params.shape[0] else 0.0
    rs.nk = knots.shape[0]
    rs.knots = &knots[0] if knots.shape[0] > 0 else NULL
    rs.coef = &coef[0] if coef.shape[0] > 0 else NULL
    return rs


def rate_values(int kind, const double[::1] params, const double[::1] knots,
                const double[::1] coef, const double[::1] x):
    """Evaluate a rate family on an array of positions."""
    cdef RateSpec rs = make_spec(kind, params, knots, coef)
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = rate_at(&rs, x[i])
    return out


# ---------------------------------------------------------------- random streams

cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline void seed_path(uint64_t* s, uint64_t seed, uint64_t path) noexcept nogil:
    cdef uint64_t st = mix64(seed) ^ mix64(path ^ PATH_SALT)
    cdef uint64_t z
    cdef int k
    for k in range(4):
        st = st + GOLDEN
        z = st
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        s[k] = z ^ (z >> 31)
    if s[0] == 0 and s[1] == 0 and s[2] == 0 and s[3] == 0:
        s[0] = 1


cdef inline uint64_t next_u64(uint64_t* s) noexcept nogil:
    cdef uint64_t result = rotl(s[0] + s[3], 23) + s[0]
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)
    return result


cdef inline double next_double(uint64_t* s) noexcept nogil:
    return <double>(next_u64(s) >> 11) * (1.0 / 9007199254740992.0)


cdef inline double zig_normal(uint64_t* s, const uint64_t* ki, const double* wi,
                              const double* fi) noexcept nogil:
    cdef uint64_t r, rabs
    cdef int idx, sign
    cdef double x, xx, yy
    while True:
        r = next_u64(s)
        idx = <int>(r & 0xFF)
        r >>= 8
        sign = <int>(r & 0x1)
        rabs = (r >> 1) & 0x000FFFFFFFFFFFFFULL
        x = <double>rabs * wi[idx]
        if sign:
            x = -x
        if rabs < ki[idx]:
            return x
        if idx == 0:
            while True:
                xx = -ZIG_INV_R * log1p(-next_double(s))
                yy = -log1p(-next_double(s))
                if yy + yy > xx * xx:
                    if (rabs >> 8) & 0x1:
                        return -(ZIG_R + xx)
                    return ZIG_R + xx
        else:
            if (fi[idx - 1] - fi[idx]) * next_double(s) + fi[idx] < exp(-0.5 * x * x):
                return x


def normals(uint64_t seed, uint64_t path, Py_ssize_t n, const uint64_t[::1] ki,
            const double[::1] wi, const double[::1] fi):
    """Draw ``n`` normals from one path stream (used to validate the generator)."""
    cdef uint64_t s[4]
    seed_path(s, seed, path)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = zig_normal(s, &ki[0], &wi[0], &fi[0])
    return out


# ---------------------------------------------------------------- Monte Carlo

cdef inline int64_t run_path(const RateSpec* rs, double D, double a, int interval,
                             double L1, double L2, double dt, int64_t max_steps,
                             int bridge, uint64_t* s, const uint64_t* ki,
                             const double* wi, const double* fi) noexcept nogil:
    """Return the step index at which the path hits ``a`` or -1 if censored."""
    cdef double x = 0.0, xn, rx, arg
    cdef double sdt = sqrt(D * dt)
    cdef double ddt = D * dt
    cdef double hz = 0.0
    cdef double thr = -log1p(-next_double(s))
    cdef int64_t k = 0
    while k < max_steps:
        rx = rate_at(rs, x)
        if rx > 0.0:
            hz = hz + rx * dt
            if hz >= thr:
                x = 0.0
                hz = 0.0
                thr = -log1p(-next_double(s))
                k += 1
                continue
        xn = x + sdt * zig_normal(s, ki, wi, fi)
        k += 1
        if (x - a) * (xn - a) <= 0.0:
            return k
        if bridge:
            arg = 2.0 * (a - x) * (a - xn) / ddt
            if arg < 40.0:
                if next_double(s) < exp(-arg):
                    return k
        if interval:
            if xn <= -L1 or xn >= L2:
                x = 0.0
                continue
            if bridge:
                arg = 2.0 * (x + L1) * (xn + L1) / ddt
                if arg < 40.0:
                    if next_double(s) < exp(-arg):
                        x = 0.0
                        continue
                arg = 2.0 * (L2 - x) * (L2 - xn) / ddt
                if arg < 40.0:
                    if next_double(s) < exp(-arg):
                        x = 0.0
                        continue
        x = xn
    return -1


def hitting_steps(int kind, const double[::1] params, const double[::1] knots,
                  const double[::1] coef, double D, double a, bint interval,
                  double L1, double L2, double dt, int64_t max_steps, bint bridge,
                  uint64_t seed, int64_t first_path, Py_ssize_t n_paths,
                  const uint64_t[::1] ki, const double[::1] wi, const double[::1] fi,
                  int num_threads=1):
    """Hitting step index per path (-1 when the step budget runs out)."""
    cdef RateSpec rs = make_spec(kind, params, knots, coef)
    out = np.empty(n_paths, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t i
    cdef uint64_t st[4]
    cdef int ib = 1 if bridge else 0
    cdef int iv = 1 if interval else 0
    if num_threads < 1:
        num_threads = 1
    for i in prange(n_paths, nogil=True, num_threads=num_threads, schedule="dynamic"):
        o[i] = _one(&rs, D, a, iv, L1, L2, dt, max_steps, ib, seed,
                    <uint64_t>(first_path + i), &ki[0], &wi[0], &fi[0])
    return out


cdef inline int64_t _one(const RateSpec* rs, double D, double a, int interval,
                         double L1, double L2, double dt, int64_t max_steps, int bridge,
                         uint64_t seed, uint64_t path, const uint64_t* ki,
                         const double* wi, const double* fi) noexcept nogil:
    cdef uint64_t s[4]
    seed_path(s, seed, path)
    return run_path(rs, D, a, interval, L1, L2, dt, max_steps, bridge, s, ki, wi, fi)


# ---------------------------------------------------------------- Riccati sweep

cdef inline void rk4(const RateSpec* rs, double twoD, double x, double psi, double lphi,
                     double h, double* out_psi, double* out_lphi) noexcept nogil:
    cdef double k1, k2, k3, k4, p2, p3, p4
    k1 = twoD * rate_at(rs, x) - psi * psi
    p2 = psi + 0.5 * h * k1
    k2 = twoD * rate_at(rs, x + 0.5 * h) - p2 * p2
    p3 = psi + 0.5 * h * k2
    k3 = twoD * rate_at(rs, x + 0.5 * h) - p3 * p3
    p4 = psi + h * k3
    k4 = twoD * rate_at(rs, x + h) - p4 * p4
    out_psi[0] = psi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    out_lphi[0] = lphi + h * (psi + 2.0 * p2 + 2.0 * p3 + p4) / 6.0


def riccati_sweep(int kind, const double[::1] params, const double[::1] knots,
                  const double[::1] coef, double D, double x0, double x1, double psi0,
                  double tol, double h0, double hmax, double hmin, Py_ssize_t max_steps):
    """Integrate psi' = 2r/D - psi^2, (log phi)' = psi from x0 to x1.

    Adaptive RK4 with step doubling; the error per step is held below
    ``tol * h`` (scaled by ``1 + |psi|``). Returns node arrays
    ``(x, psi, logphi)`` with ``logphi(x0) = 0`` and a status code
    (0 ok, 1 step underflow, 2 step budget exhausted).
    """
    cdef RateSpec rs = make_spec(kind, params, knots, coef)
    cdef double twoD = 2.0 / D
    cdef double direction = 1.0 if x1 > x0 else -1.0
    cdef double x = x0, psi = psi0, lphi = 0.0
    cdef double h = h0, hs, fp, fl, hp, hl, hp2, hl2, err, errp, errl, fac, remaining
    cdef Py_ssize_t cap = 1024, n = 0
    cdef int status = 0
    cdef double* bx = <double*>malloc(cap * sizeof(double))
    cdef double* bp = <double*>malloc(cap * sizeof(double))
    cdef double* bl = <double*>malloc(cap * sizeof(double))
    bx[0] = x
    bp[0] = psi
    bl[0] = lphi
    n = 1
    with nogil:
        while True:
            remaining = (x1 - x) * direction
            if remaining <= 0.0:
                break
            if n >= max_steps:
                status = 2
                break
            if h > remaining:
                h = remaining
            hs = direction * h
            rk4(&rs, twoD, x, psi, lphi, hs, &fp, &fl)
            rk4(&rs, twoD, x, psi, lphi, 0.5 * hs, &hp, &hl)
            rk4(&rs, twoD, x + 0.5 * hs, hp, hl, 0.5 * hs, &hp2, &hl2)
            errp = fabs(hp2 - fp) / (15.0 * (1.0 + fabs(hp2)))
            errl = fabs(hl2 - fl) / 15.0
            err = errp if errp > errl else errl
            if err <= tol * h:
                if h == remaining:
                    x = x1
                else:
                    x = x + hs
                psi = hp2 + (hp2 - fp) / 15.0
                lphi = hl2 + (hl2 - fl) / 15.0
                if n == cap:
                    cap *= 2
                    bx = <double*>realloc(bx, cap * sizeof(double))
                    bp = <double*>realloc(bp, cap * sizeof(double))
                    bl = <double*>realloc(bl, cap * sizeof(double))
                bx[n] = x
                bp[n] = psi
                bl[n] = lphi
                n += 1
                if err > 0.0:
                    fac = 0.9 * pow(tol * h / err, 0.25)
                    if fac > 4.0:
                        fac = 4.0
                    if fac < 0.2:
                        fac = 0.2
                else:
                    fac = 4.0
                h = h * fac
                if h > hmax:
                    h = hmax
            else:
                fac = 0.9 * pow(tol * h / err, 0.25)
                if fac < 0.2:
                    fac = 0.2
                h = h * fac
                if h < hmin:
                    status = 1
                    break
    xs = np.empty(n, dtype=np.float64)
    ps = np.empty(n, dtype=np.float64)
    ls = np.empty(n, dtype=np.float64)
    cdef double[::1] vx = xs
    cdef double[::1] vp = ps
    cdef double[::1] vl = ls
    cdef Py_ssize_t i
    for i in range(n):
        vx[i] = bx[i]
        vp[i] = bp[i]
        vl[i] = bl[i]
    free(bx)
    free(bp)
    free(bl)
    return xs, ps, ls, status
