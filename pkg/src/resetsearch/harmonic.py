"""Positive harmonic functions of (D/2) phi'' = r phi and their integrals.

A solution is held as log phi together with psi = phi'/phi and psi'. Closed
forms cover the constant, quadratic-decay, stretched-exponential and
inverse-square families; anything else goes through a Riccati sweep
psi' = 2r/D - psi^2 with quintic Hermite interpolation between steps.

Integrals of phi, phi^-2 and phi^-2 * Phi on each half-line are accumulated
panel by panel in log-space (:class:`HalfLine`). Infinite tails are closed
with an asymptotic completion and checked for divergence by doubling the
truncation point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from ._kernels import get_backend
from ._numerics import LOG2, gauss_legendre, log_cosh
from .errors import DomainTooSmall, GridTooCoarse, NoClosedForm, ParameterError
from .model import (Constant, PowerLaw, QuadDecayPoly, RateFunction, StretchedExpHarmonic,
                    TailLaw)

PHI1, PHI2, PHI3 = "phi1", "phi2", "phi3"
RESIDUAL_TOL = 1e-6
RICCATI_TOL = 1e-8
CLOSED_T_MAX = 1e6
CAUCHY_TOL = 1e-3
TOTAL_RTOL = 1e-12


# ---------------------------------------------------------------- representations


class _Closed:
    """log phi, psi and psi' of an analytic solution."""

    name = ""

    def lf(self, x):
        raise NotImplementedError

    def psi(self, x):
        raise NotImplementedError

    def dpsi(self, x):
        raise NotImplementedError

    knots: tuple[float, ...] = ()


class _CoshPhi(_Closed):
    name = "cosh"

    def __init__(self, s: float):
        self.s = s

    def lf(self, x):
        return LOG2 + log_cosh(self.s * np.asarray(x, dtype=float))

    def psi(self, x):
        return self.s * np.tanh(self.s * np.asarray(x, dtype=float))

    def dpsi(self, x):
        t = np.tanh(self.s * np.asarray(x, dtype=float))
        return self.s * self.s * (1.0 - t) * (1.0 + t)


class _ExpPhi(_Closed):
    name = "exp"

    def __init__(self, s: float):
        self.s = s

    def lf(self, x):
        return self.s * np.asarray(x, dtype=float)

    def psi(self, x):
        return np.full(np.shape(x), self.s, dtype=float)

    def dpsi(self, x):
        return np.zeros(np.shape(x), dtype=float)


class _PolyPhi(_Closed):
    """gamma + (eps^2 + x^2)^(m/2); eps = 0 gives gamma + |x|^m."""

    name = "poly"
    knots = (0.0,)

    def __init__(self, m: float, gamma: float, eps: float = 0.0):
        self.m, self.gamma, self.eps = m, gamma, eps

    def _q(self, x):
        x = np.asarray(x, dtype=float)
        return self.eps * self.eps + x * x

    def lf(self, x):
        q = self._q(x)
        return np.log(self.gamma + np.power(q, 0.5 * self.m))

    def _derivs(self, x):
        x = np.asarray(x, dtype=float)
        m = self.m
        q = self._q(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.power(q, 0.5 * m)
            d1 = m * x * np.power(q, 0.5 * m - 1.0)
            d2 = m * np.power(q, 0.5 * m - 1.0) + m * (m - 2.0) * x * x * np.power(q, 0.5 * m - 2.0)
        phi = self.gamma + p
        at0 = q == 0
        d1 = np.where(at0, 0.0, d1)
        d2 = np.where(at0, m if m == 2 else 0.0, d2)
        return phi, d1, d2

    def psi(self, x):
        phi, d1, _ = self._derivs(x)
        return d1 / phi

    def dpsi(self, x):
        phi, d1, d2 = self._derivs(x)
        return d2 / phi - (d1 / phi) ** 2


class _StretchedPhi(_Closed):
    """exp(lam (gamma + x^2)^((l+1)/2))."""

    name = "stretched"

    def __init__(self, lam: float, gamma: float, l: float):
        self.lam, self.gamma, self.l = lam, gamma, l

    def lf(self, x):
        x = np.asarray(x, dtype=float)
        return self.lam * np.power(self.gamma + x * x, 0.5 * (self.l + 1.0))

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return self.lam * (self.l + 1.0) * x * np.power(self.gamma + x * x, 0.5 * (self.l - 1.0))

    def dpsi(self, x):
        x = np.asarray(x, dtype=float)
        s = self.gamma + x * x
        return self.lam * (self.l + 1.0) * np.power(s, 0.5 * (self.l - 3.0)) * (self.gamma + self.l * x * x)


class _GridPhi:
    """Quintic Hermite interpolant of log phi through (log phi, psi, psi')."""

    name = "grid"

    def __init__(self, xs, lphi, psi, dpsi):
        self.xs = np.asarray(xs, dtype=float)
        self.y = np.asarray(lphi, dtype=float)
        self.d = np.asarray(psi, dtype=float)
        self.s = np.asarray(dpsi, dtype=float)
        h = np.diff(self.xs)
        y0, y1 = self.y[:-1], self.y[1:]
        d0, d1 = h * self.d[:-1], h * self.d[1:]
        s0, s1 = h * h * self.s[:-1], h * h * self.s[1:]
        dy = y1 - y0
        self.h = h
        self.c = np.stack([
            y0, d0, 0.5 * s0,
            10.0 * dy - 6.0 * d0 - 4.0 * d1 - 0.5 * (3.0 * s0 - s1),
            -15.0 * dy + 8.0 * d0 + 7.0 * d1 + 0.5 * (3.0 * s0 - 2.0 * s1),
            6.0 * dy - 3.0 * (d0 + d1) + 0.5 * (s1 - s0),
        ])

    @property
    def knots(self):
        return tuple(self.xs)

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.xs[0] - 1e-12 * (1 + abs(self.xs[0]))) or np.any(
                x > self.xs[-1] + 1e-12 * (1 + abs(self.xs[-1]))):
            raise DomainTooSmall(
                f"position outside the numeric domain [{self.xs[0]}, {self.xs[-1]}]")
        i = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.xs.size - 2)
        t = (x - self.xs[i]) / self.h[i]
        return i, t

    def lf(self, x):
        i, t = self._locate(x)
        c = self.c[:, i]
        return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))))

    def psi(self, x):
        i, t = self._locate(x)
        c = self.c[:, i]
        return (c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])))) / self.h[i]

    def dpsi(self, x):
        i, t = self._locate(x)
        c = self.c[:, i]
        return (2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]))) / self.h[i] ** 2


# ---------------------------------------------------------------- solution type


@dataclass(frozen=True, eq=False)
class HarmonicSolution:
    """A positive solution phi, stored through log phi.

    ``log_scale`` shifts log phi by a constant; every hitting-time formula is
    invariant under it.
    """

    kind: str
    D: float
    rep: object
    rate: RateFunction | None = None
    label: str = ""
    log_scale: float = 0.0
    x_lo: float = -math.inf
    x_hi: float = math.inf
    scale: float = 1.0
    induced_rate: Callable | None = field(default=None, repr=False)

    @property
    def is_grid(self) -> bool:
        return isinstance(self.rep, _GridPhi)

    def logphi(self, x):
        return self.rep.lf(x) + self.log_scale

    def psi(self, x):
        return self.rep.psi(x)

    def dpsi(self, x):
        return self.rep.dpsi(x)

    def rate_values(self, x):
        """The rate this phi is harmonic for, (D/2)(psi' + psi^2)."""
        psi = self.psi(x)
        return 0.5 * self.D * (self.dpsi(x) + psi * psi)

    def residual(self, x) -> np.ndarray:
        """(D/2)(psi' + psi^2) - r(x) scaled by 1/(1 + r)."""
        if self.rate is None:
            raise ParameterError("solution has no associated rate")
        r = np.asarray(self.rate(np.asarray(x, dtype=float)))
        return (self.rate_values(x) - r) / (1.0 + r)

    def scaled(self, factor: float) -> "HarmonicSolution":
        return HarmonicSolution(self.kind, self.D, self.rep, self.rate, self.label,
                                self.log_scale + math.log(factor), self.x_lo, self.x_hi,
                                self.scale, self.induced_rate)

    @property
    def knots(self) -> np.ndarray:
        return np.asarray(self.rep.knots, dtype=float)

    def half(self, side: int) -> "HalfLine":
        cache = self.__dict__.setdefault("_halves", {})
        if side not in cache:
            cache[side] = HalfLine.from_solution(self, side)
        return cache[side]

    def dump(self, xs=None) -> np.ndarray:
        """Rows (x, log phi, psi) for plotting."""
        if xs is None:
            if self.is_grid:
                xs = self.rep.xs
            else:
                xs = np.linspace(-10 * self.scale, 10 * self.scale, 401)
        xs = np.asarray(xs, dtype=float)
        return np.column_stack([xs, self.logphi(xs), self.psi(xs)])


# ---------------------------------------------------------------- closed forms


def _same_D(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-14 * max(abs(a), abs(b))


def build_phi_closed_form(rate: RateFunction, D: float, kind: str = PHI3) -> HarmonicSolution:
    """Exact phi_3 (or phi_1 / phi_2 for constant rates)."""
    if not D > 0:
        raise ParameterError("D must be positive")
    if isinstance(rate, Constant):
        if rate.r <= 0:
            raise NoClosedForm("a zero rate has no positive integrable harmonic pair")
        s = math.sqrt(2.0 * rate.r / D)
        if kind == PHI3:
            return HarmonicSolution(PHI3, D, _CoshPhi(s), rate, "cosh", scale=1.0 / s)
        sign = 1.0 if kind == PHI1 else -1.0
        return HarmonicSolution(kind, D, _ExpPhi(sign * s), rate, "exp", scale=1.0 / s)
    if kind != PHI3:
        raise NoClosedForm(f"no closed-form {kind} for {rate.family}")
    if isinstance(rate, QuadDecayPoly):
        if not _same_D(rate.D, D):
            raise NoClosedForm("quadratic-decay closed form needs the family D to match")
        return HarmonicSolution(PHI3, D, _PolyPhi(rate.m, rate.gamma), rate, "poly",
                                scale=rate.scale)
    if isinstance(rate, StretchedExpHarmonic):
        if not _same_D(rate.D, D):
            raise NoClosedForm("stretched-exponential closed form needs the family D to match")
        return HarmonicSolution(PHI3, D, _StretchedPhi(rate.lam, rate.gamma, rate.l), rate,
                                "stretched", scale=rate.scale)
    if isinstance(rate, PowerLaw) and rate.l == -1.0 and _same_D(rate.c, D):
        return HarmonicSolution(PHI3, D, _PolyPhi(2.0, rate.gamma), rate, "poly",
                                scale=rate.scale)
    raise NoClosedForm(f"no closed form for {rate.family}")


# ---------------------------------------------------------------- Riccati construction


def _tail_law(rate: RateFunction, side: int) -> TailLaw:
    t = rate.tail(side)
    if t is None:
        # undeclared tabulated tail: the kernel holds the end value
        v = rate.values[-1] if side > 0 else rate.values[0]  # type: ignore[attr-defined]
        return TailLaw(float(v), 0.0)
    return t


def tail_slopes(rate: RateFunction, D: float, X: float, side: int) -> tuple[float, float | None]:
    """Outward log-derivative magnitudes at distance X: (decaying, growing).

    The growing value is None when no reliable asymptote is available.
    """
    law = _tail_law(rate, side)
    x = side * X
    r = float(rate(x))
    if law.c == 0 or r == 0:
        return 0.0, None
    if law.p < 2:
        k = math.sqrt(2.0 * r / D)
        h = 1e-4 * max(1.0, X)
        rs = side * (float(rate(x + h)) - float(rate(x - h))) / (2 * h)
        corr = rs / (4.0 * r)
        return k + corr, k - corr
    if law.p == 2:
        lam = X * X * r / D
        m = 0.5 * (1.0 + math.sqrt(1.0 + 8.0 * lam))
        return (m - 1.0) / X, m / X
    return 2.0 * law.c / D * X ** (1.0 - law.p) / (law.p - 1.0), None


@dataclass(frozen=True)
class RiccatiSolutions:
    phi1: HarmonicSolution
    phi2: HarmonicSolution
    phi3: HarmonicSolution
    X: float
    max_residual: float


def default_domain(rate: RateFunction) -> float:
    return max(50.0, 10.0 * rate.scale)


def _sweep(rate, D, x0, x1, psi0, tol, hmax):
    """Integrate from x0 to x1, restarting at every non-smooth point of r."""
    spec = rate.kernel_spec
    lo, hi = min(x0, x1), max(x0, x1)
    stops = sorted(b for b in rate.breakpoints if lo < b < hi)
    if x1 < x0:
        stops = stops[::-1]
    targets = stops + [x1]
    span = abs(x1 - x0)
    xs_all, ps_all, ls_all = [np.array([x0])], [np.array([psi0])], [np.array([0.0])]
    x, psi, lphi = x0, psi0, 0.0
    for target in targets:
        xs, ps, ls, status = get_backend().riccati_sweep(
            spec.kind, spec.params, spec.knots, spec.coef, D, x, target, psi, tol,
            min(1e-3, hmax), hmax, 1e-12 * max(1.0, span), 2_000_000)
        if status == 1:
            raise GridTooCoarse("Riccati step size underflow")
        if status == 2:
            raise GridTooCoarse("Riccati step budget exhausted")
        xs_all.append(xs[1:])
        ps_all.append(ps[1:])
        ls_all.append(ls[1:] + lphi)
        x, psi, lphi = float(xs[-1]), float(ps[-1]), float(ls[-1]) + lphi
    return np.concatenate(xs_all), np.concatenate(ps_all), np.concatenate(ls_all)


def build_phi_riccati(rate: RateFunction, D: float, X: float | None = None,
                      tol: float = RICCATI_TOL, hmax: float | None = None) -> RiccatiSolutions:
    """Numeric phi_1, phi_2, phi_3 on [-X, X], each normalized to 1 at the origin."""
    if not D > 0:
        raise ParameterError("D must be positive")
    X = float(X) if X is not None else default_domain(rate)
    if hmax is None:
        hmax = min(0.1, 0.05 * rate.scale) if rate.scale > 0 else 0.1
        hmax = max(hmax, 1e-3)
    two_d = 2.0 / D

    m_left, grow_left = tail_slopes(rate, D, X, -1)
    m_right, grow_right = tail_slopes(rate, D, X, 1)
    x1, p1, l1 = _sweep(rate, D, -X, X, m_left, tol, hmax)
    x2, p2, l2 = _sweep(rate, D, X, -X, -m_right, tol, hmax)
    x2, p2, l2 = x2[::-1], p2[::-1], l2[::-1]

    for val, grow, where in ((p1[-1], grow_right, "+X"), (-p2[0], grow_left, "-X")):
        if grow is not None and grow > 0:
            if abs(val - grow) > 0.05 * grow:
                raise DomainTooSmall(
                    f"psi at {where} is {val:.6g}, expected near {grow:.6g}; enlarge X")

    g1 = _GridPhi(x1, l1, p1, two_d * rate(x1) - p1 * p1)
    g2 = _GridPhi(x2, l2, p2, two_d * rate(x2) - p2 * p2)
    xs = np.unique(np.concatenate([x1, x2, [0.0]]))
    xs = xs[(xs >= -X) & (xs <= X)]
    # drop near-duplicates produced by merging the two adaptive grids
    keep = np.concatenate([[True], np.diff(xs) > 1e-9 * max(1.0, X)])
    keep[-1] = True
    xs = xs[keep]
    if xs[-2] >= xs[-1]:
        xs = xs[:-1]
    if 0.0 not in xs:
        xs = np.sort(np.append(xs, 0.0))
    rx = rate(xs)
    a1 = g1.lf(xs) - float(g1.lf(0.0))
    a2 = g2.lf(xs) - float(g2.lf(0.0))
    q1 = g1.psi(xs)
    q2 = g2.psi(xs)
    a3 = np.logaddexp(a1, a2)
    w1 = np.exp(a1 - a3)
    q3 = w1 * q1 + (1.0 - w1) * q2

    scale = rate.scale
    sols = []
    worst = 0.0
    for kind, la, qa in ((PHI1, a1, q1), (PHI2, a2, q2), (PHI3, a3, q3)):
        rep = _GridPhi(xs, la, qa, two_d * rx - qa * qa)
        sol = HarmonicSolution(kind, D, rep, rate, "riccati", x_lo=-X, x_hi=X, scale=scale)
        mids = 0.5 * (xs[:-1] + xs[1:])
        res = np.abs(sol.residual(mids))
        worst = max(worst, float(res.max()))
        sols.append(sol)
    if worst > RESIDUAL_TOL:
        raise GridTooCoarse(f"ODE residual {worst:.3g} exceeds {RESIDUAL_TOL}")
    return RiccatiSolutions(sols[0], sols[1], sols[2], X, worst)


_SOLUTION_CACHE: dict = {}


def solve_phi(rate: RateFunction, D: float, kind: str = PHI3, X: float | None = None,
              allow_closed: bool = True) -> HarmonicSolution:
    """Closed form when available, otherwise the Riccati construction (cached)."""
    key = (rate, float(D), kind, X, allow_closed)
    try:
        hit = _SOLUTION_CACHE.get(key)
    except TypeError:
        hit = None
        key = None
    if hit is not None:
        return hit
    sol = None
    if allow_closed:
        try:
            sol = build_phi_closed_form(rate, D, kind)
        except NoClosedForm:
            sol = None
    if sol is None:
        ric = build_phi_riccati(rate, D, X)
        sol = {PHI1: ric.phi1, PHI2: ric.phi2, PHI3: ric.phi3}[kind]
    if key is not None:
        if len(_SOLUTION_CACHE) > 256:
            _SOLUTION_CACHE.clear()
        _SOLUTION_CACHE[key] = sol
    return sol


# ---------------------------------------------------------------- half-line integrals


@dataclass(frozen=True)
class TailTotal:
    """An integral to infinity: log value (inf when divergent) and diagnostics."""

    log_value: float
    divergent: bool
    t_trunc: float
    rel_change: float

    @property
    def value(self) -> float:
        return math.inf if self.divergent else math.exp(self.log_value)


_NG = 20
_NAMES = ("Phi", "G", "W")


class HalfLine:
    """Cumulative integrals of phi along t >= 0 in one direction.

    With f(t) = phi(side * t):
        Phi(t) = int_0^t f,  G(t) = int_0^t f^-2,  W(t) = int_0^t f^-2 Phi.
    Panels are Gauss-Legendre with widths tied to the local scale of psi,
    and Phi at interior nodes uses a nested rule on the same panel.
    """

    def __init__(self, lf, dlf, ddlf, knots, t_end: float, t_max: float, scale: float):
        self.lf, self.dlf, self.ddlf = lf, dlf, ddlf
        self.knots = np.sort(np.asarray([k for k in knots if k > 0], dtype=float))
        self.t_end = t_end
        self.t_max = min(t_max, t_end)
        self.scale = scale
        self.t0 = 1e-3 * scale
        self.edges = [0.0]
        self.cum = np.full((3, 1), -np.inf)
        self._totals: dict[str, TailTotal] = {}

    @classmethod
    def from_solution(cls, sol: HarmonicSolution, side: int) -> "HalfLine":
        s = float(side)
        lf = lambda t: sol.logphi(s * np.asarray(t, dtype=float))
        dlf = lambda t: s * sol.psi(s * np.asarray(t, dtype=float))
        ddlf = lambda t: sol.dpsi(s * np.asarray(t, dtype=float))
        t_end = sol.x_hi if side > 0 else -sol.x_lo
        knots = s * sol.knots
        t_max = CLOSED_T_MAX * max(1.0, sol.scale) if math.isinf(t_end) else t_end
        return cls(lf, dlf, ddlf, knots, t_end, t_max, sol.scale)

    # -- panel construction

    def _width(self, t: float) -> float:
        h = 0.25 * max(t, self.t0)
        p = abs(float(self.dlf(t)))
        if p > 0:
            h = min(h, 0.5 / p)
        dp = abs(float(self.ddlf(t)))
        if dp > 0:
            h = min(h, 0.5 / math.sqrt(dp))
        return h

    def _extend(self, upto: float) -> None:
        upto = min(upto, self.t_end)
        new = []
        t = self.edges[-1]
        k = int(np.searchsorted(self.knots, t, side="right"))
        while t < upto:
            nxt = t + self._width(t)
            while k < self.knots.size and self.knots[k] <= t * (1 + 1e-14):
                k += 1
            if k < self.knots.size and self.knots[k] < nxt:
                nxt = float(self.knots[k])
            if nxt >= self.t_end or (self.t_end - nxt) < 1e-12 * self.t_end:
                nxt = self.t_end
            new.append(nxt)
            t = nxt
        if new:
            self._add_panels(np.array([self.edges[-1]] + new))
            self.edges.extend(new)

    def _panel_logs(self, a: np.ndarray, b: np.ndarray, logphi_a: np.ndarray):
        """Log increments of Phi, G, W over panels [a, b] given log Phi(a)."""
        u, w = gauss_legendre(_NG)
        lw = np.log(w)
        h = b - a
        x = a[:, None] + h[:, None] * u[None, :]
        lx = self.lf(x)
        lh = np.log(h)[:, None]
        d_phi = np.logaddexp.reduce(lx + lw + lh, axis=1)
        d_g = np.logaddexp.reduce(-2.0 * lx + lw + lh, axis=1)
        # nested rule for Phi at each node
        sub = a[:, None, None] + (x - a[:, None])[:, :, None] * u[None, None, :]
        lsub = self.lf(sub)
        lpart = np.logaddexp.reduce(lsub + lw, axis=2) + np.log(x - a[:, None])
        lphi_nodes = np.logaddexp(logphi_a[:, None], lpart)
        d_w_rel = -2.0 * lx + lphi_nodes + lw + lh
        return d_phi, d_g, d_w_rel

    def _add_panels(self, edges: np.ndarray) -> None:
        chunk = 1024
        for start in range(0, edges.size - 1, chunk):
            e = edges[start:start + chunk + 1]
            a, b = e[:-1], e[1:]
            d_phi, d_g, _ = self._panel_logs(a, b, np.full(a.size, -np.inf))
            base = self.cum[:, -1]
            c_phi = np.logaddexp.accumulate(np.concatenate([[base[0]], d_phi]))
            c_g = np.logaddexp.accumulate(np.concatenate([[base[1]], d_g]))
            _, _, d_w_rel = self._panel_logs(a, b, c_phi[:-1])
            d_w = np.logaddexp.reduce(d_w_rel, axis=1)
            c_w = np.logaddexp.accumulate(np.concatenate([[base[2]], d_w]))
            self.cum = np.concatenate([self.cum, np.stack([c_phi[1:], c_g[1:], c_w[1:]])], axis=1)

    # -- queries

    def cumulative(self, t) -> np.ndarray:
        """Array (3, n) of log Phi, log G, log W at the distances ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < 0):
            raise ValueError("distances must be >= 0")
        if np.any(t > self.t_end * (1 + 1e-12)):
            raise DomainTooSmall(f"distance {t.max()} beyond the numeric domain {self.t_end}")
        self._extend(float(t.max()))
        edges = np.asarray(self.edges)
        i = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, edges.size - 1)
        out = self.cum[:, i].copy()
        part = t > edges[i]
        if np.any(part):
            ip = i[part]
            a = edges[ip]
            b = t[part]
            d_phi, d_g, _ = self._panel_logs(a, b, np.full(a.size, -np.inf))
            base = self.cum[:, ip]
            _, _, d_w_rel = self._panel_logs(a, b, base[0])
            d_w = np.logaddexp.reduce(d_w_rel, axis=1)
            out[:, part] = np.stack([np.logaddexp(base[0], d_phi), np.logaddexp(base[1], d_g),
                                     np.logaddexp(base[2], d_w)])
        return out

    def _completed(self, name: str, T: float) -> tuple[float, float]:
        """(log of integral to T plus asymptotic remainder, log integral to T)."""
        lphi, lg, lw = self.cumulative(T)[:, 0]
        lf = float(self.lf(T))
        psi = float(self.dlf(T))
        if name == "Phi":
            logf, slope, cum = lf, psi, lphi
        elif name == "G":
            logf, slope, cum = -2.0 * lf, -2.0 * psi, lg
        else:
            logf, slope, cum = -2.0 * lf + lphi, -2.0 * psi + math.exp(lf - lphi), lw
        denom = -slope - 1.0 / T
        if denom <= 0:
            return math.inf, cum
        return float(np.logaddexp(cum, logf - math.log(denom))), cum

    def total(self, name: str) -> TailTotal:
        """Integral of Phi, G or W integrands over [0, inf), with a divergence flag."""
        if name not in _NAMES:
            raise ValueError(name)
        if name in self._totals:
            return self._totals[name]
        T = max(4.0 * self.scale, 1.0)
        if T >= self.t_max:
            T = 0.5 * self.t_max
        prev = None
        growth = 0
        prev_f = None
        result = None
        while True:
            comp, cum = self._completed(name, T)
            logf = self._log_integrand(name, T)
            if prev is not None and math.isfinite(comp) and math.isfinite(prev):
                if abs(comp - prev) <= TOTAL_RTOL:
                    result = TailTotal(comp, False, T, abs(math.expm1(comp - prev)))
                    break
            if not math.isfinite(comp) and prev_f is not None and logf > prev_f:
                growth += 1
            else:
                growth = 0
            if growth >= 3 or (not math.isfinite(comp) and logf > 700.0):
                result = TailTotal(math.inf, True, T, math.inf)
                break
            if T >= self.t_max:
                if not math.isfinite(comp) or prev is None or not math.isfinite(prev):
                    result = TailTotal(math.inf, True, T, math.inf)
                else:
                    rel = abs(math.expm1(comp - prev))
                    result = TailTotal(math.inf if rel > CAUCHY_TOL else comp, rel > CAUCHY_TOL,
                                       T, rel)
                break
            prev, prev_f = comp, logf
            T = min(2.0 * T, self.t_max)
        self._totals[name] = result
        return result

    def _log_integrand(self, name: str, T: float) -> float:
        lf = float(self.lf(T))
        if name == "Phi":
            return lf
        if name == "G":
            return -2.0 * lf
        return -2.0 * lf + float(self.cumulative(T)[0, 0])


# ---------------------------------------------------------------- cumulative integrals


@dataclass
class CumulativeIntegrals:
    """Integrals of phi and phi^-2 anchored at the origin, plus tail totals.

    ``phi_int(x)`` and ``inv_int(x)`` are signed (negative for x < 0).
    """

    phi: HarmonicSolution

    @cached_property
    def right(self) -> HalfLine:
        return self.phi.half(1)

    @cached_property
    def left(self) -> HalfLine:
        return self.phi.half(-1)

    def _signed(self, x, row: int) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for side, hl in ((1, self.right), (-1, self.left)):
            mask = side * x > 0
            if np.any(mask):
                out[mask] = side * np.exp(hl.cumulative(side * x[mask])[row])
        return out

    def phi_int(self, x) -> np.ndarray:
        return self._signed(x, 0)

    def inv_int(self, x) -> np.ndarray:
        return self._signed(x, 1)

    @property
    def inv_int_left(self) -> TailTotal:
        return self.left.total("G")

    @property
    def inv_int_right(self) -> TailTotal:
        return self.right.total("G")

    @property
    def phi_tail_left(self) -> TailTotal:
        return self.left.total("Phi")

    @property
    def phi_tail_right(self) -> TailTotal:
        return self.right.total("Phi")

    @property
    def weighted_left(self) -> TailTotal:
        """int_{-inf}^0 phi^-2(x) int_x^0 phi."""
        return self.left.total("W")

    @property
    def weighted_right(self) -> TailTotal:
        """int_0^inf phi^-2(x) int_0^x phi."""
        return self.right.total("W")


def cumulative_integrals(phi: HarmonicSolution) -> CumulativeIntegrals:
    return CumulativeIntegrals(phi)


__all__ = [
    "CumulativeIntegrals", "HalfLine", "HarmonicSolution", "PHI1", "PHI2", "PHI3",
    "RiccatiSolutions", "TailTotal", "build_phi_closed_form", "build_phi_riccati",
    "cumulative_integrals", "default_domain", "solve_phi", "tail_slopes",
]
