"""Target-averaged search time, rate optimization, and growth fits.

The objective is the expected time to find a random target a ~ mu,

    J(r) = int E_0 T_a mu(da),

evaluated side by side on the half-lines with Gauss-Legendre panels. A
moment gate compares the growth of a -> E_0 T_a with the tail of mu before
any quadrature runs, and the tail quadrature carries its own Cauchy test.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ._numerics import gauss_legendre, log_expm1
from .errors import (BoxExhausted, InadmissiblePhi, InfiniteSample,
                     MissingTail, NonFinite, ParameterError)
from .harmonic import (PHI1, PHI2, PHI3, HarmonicSolution, _Closed, _CoshPhi, _ExpPhi,
                       _PolyPhi, _StretchedPhi, default_domain, solve_phi)
from .hitting import (Finiteness, classify_finiteness, expected_hitting_many,
                      growth_descriptor, hitting_components, log_hitting_curve,
                      log_interval_curve)
from .model import (Constant, FullLine, HalfMeasure, Interval, QuadDecayPoly, RateFunction,
                    StretchedExpHarmonic, TargetDistribution, stretched_gamma_floor)

OBJ_RTOL = 1e-7
TAIL_RTOL = 1e-12
_NG = 20
_MAX_SPLIT = 128
_MAX_TAIL_PANELS = 200

LogCurve = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------- objective


@dataclass(frozen=True)
class ObjectiveValue:
    """int E_0 T_a mu(da), split into the two half-line contributions.

    Infinite objectives have ``finite=False`` and ``value=inf``; ``reason``
    says which channel decided.
    """

    value: float
    finite: bool
    plus: float
    minus: float
    error_estimate: float
    reason: str | None = None

    @classmethod
    def infinite(cls, reason: str, plus: float = math.inf, minus: float = math.inf):
        return cls(math.inf, False, plus, minus, math.inf, reason)

    def to_dict(self) -> dict:
        if not self.finite:
            return {"finite": False, "reason": self.reason}
        return {"finite": True, "value": self.value, "plus": self.plus, "minus": self.minus,
                "error_estimate": self.error_estimate}


@dataclass(frozen=True)
class _SidePart:
    value: float
    error: float
    reason: str | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _gl_panels(edges: np.ndarray):
    """Nodes and weights for 20-point Gauss-Legendre on consecutive panels."""
    u, w = gauss_legendre(_NG)
    a, b = edges[:-1], edges[1:]
    h = (b - a)[:, None]
    return a[:, None] + h * u[None, :], h * w[None, :]


def _weighted_sum(h: HalfMeasure, curve: LogCurve, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per-panel sums of density * E over nodes ``x`` (panels along axis 0)."""
    dens = np.asarray(h.density(x.ravel()), dtype=float).reshape(x.shape)
    out = np.zeros(x.shape)
    live = dens > 0
    if np.any(live):
        lc = curve(x[live])
        if np.any(np.isposinf(lc)) or np.any(np.isnan(lc)):
            return np.full(x.shape[0], math.inf)
        out[live] = dens[live] * np.exp(lc)
    return np.sum(out * w, axis=1)


def _body_edges(h: HalfMeasure, t_c: float, k: int) -> np.ndarray:
    cuts = sorted({0.0, t_c, *(b for b in h.breaks if 0.0 < b < t_c)})
    parts = [np.linspace(lo, hi, k + 1)[:-1] for lo, hi in zip(cuts[:-1], cuts[1:])]
    return np.concatenate(parts + [[t_c]])


def _tail(h: HalfMeasure, curve: LogCurve, t_c: float, t_cap: float, k: int,
          running: float) -> tuple[float, str | None]:
    """Sum over doubling panels [T, 2T] past t_c, with geometric completion."""
    total = 0.0
    T = t_c
    contribs: list[float] = []
    rising = 0
    for _ in range(_MAX_TAIL_PANELS):
        hi = min(2.0 * T, t_cap)
        x, w = _gl_panels(np.linspace(T, hi, k + 1))
        c = float(np.sum(_weighted_sum(h, curve, x, w)))
        if not math.isfinite(c):
            return math.inf, "hitting time infinite on the support of mu"
        total += c
        contribs.append(c)
        grand = running + total
        if grand > 0 and c <= TAIL_RTOL * grand and len(contribs) >= 2 \
                and contribs[-2] <= 1e3 * TAIL_RTOL * grand:
            return total, None
        if len(contribs) >= 2 and contribs[-2] > 0:
            rho = c / contribs[-2]
            rising = rising + 1 if rho >= 1.0 else 0
            if rising >= 3 and T > 64 * t_c:
                return math.inf, "a-integral failed its Cauchy test"
            if len(contribs) >= 3 and contribs[-3] > 0 and rho < 1.0:
                rho_prev = contribs[-2] / contribs[-3]
                rest = c * rho / (1.0 - rho)
                if abs(rho - rho_prev) <= 1e-4 * rho and rest <= 1e-3 * grand:
                    return total + rest, None
        if hi >= t_cap:
            break
        T = hi
    if len(contribs) >= 2 and contribs[-2] > 0:
        rho = contribs[-1] / contribs[-2]
        if rho < 0.99:
            return total + contribs[-1] * rho / (1.0 - rho), None
    return math.inf, "a-integral failed its Cauchy test"


def _integrate_half(h: HalfMeasure, curve: LogCurve, t_cap: float = math.inf) -> _SidePart:
    """int E_0 T_{side t} h(dt) for one unnormalized half measure."""
    total = 0.0
    if h.atoms:
        pos = np.array([p for p, _ in h.atoms], dtype=float)
        wts = np.array([w for _, w in h.atoms], dtype=float)
        lc = curve(pos)
        if np.any(~np.isfinite(lc) & (lc > 0)):
            return _SidePart(math.inf, math.inf, "hitting time infinite at an atom of mu")
        total += float(np.sum(wts * np.exp(lc)))
    if h.density is None or h.cont_weight <= 0:
        return _SidePart(total, 1e-14 * total)
    bounded = math.isfinite(h.t_hi)
    t_c = h.t_hi if bounded else max([h.scale, *h.breaks])
    t_c = min(t_c, t_cap)
    prev = None
    k = 2
    while True:
        x, w = _gl_panels(_body_edges(h, t_c, k))
        body = float(np.sum(_weighted_sum(h, curve, x, w)))
        if not math.isfinite(body):
            return _SidePart(math.inf, math.inf, "hitting time infinite on the support of mu")
        cont = body
        if not bounded:
            tail, why = _tail(h, curve, t_c, t_cap, k, total + body)
            if why is not None:
                return _SidePart(math.inf, math.inf, why)
            cont += tail
        if prev is not None and abs(cont - prev) <= OBJ_RTOL * abs(cont):
            err = abs(cont - prev)
            break
        if k >= _MAX_SPLIT:
            err = abs(cont - prev) if prev is not None else abs(cont)
            break
        prev = cont
        k *= 2
    value = total + cont
    return _SidePart(value, err / value if value > 0 else 0.0)



def moment_gate(descriptor: tuple, tail: tuple) -> bool | None:
    """Can int E_0 T_a mu(da) be finite on this side?

    ``descriptor`` is the growth of a -> E_0 T_a, ``tail`` the decay of mu.
    Returns None when the comparison is inconclusive.
    """
    kind = descriptor[0]
    if kind == "infinite":
        return False
    if tail[0] == "compact":
        return True
    if kind == "boundary":
        return None
    if tail[0] == "exp":
        if kind == "exp":
            return descriptor[1] < tail[1]
        return kind != "superexp"
    if kind == "power":
        return descriptor[1] < tail[1]
    return False


def _support_ok(mu: TargetDistribution, support) -> None:
    if isinstance(support, Interval):
        lo, hi = mu.support
        if lo < -support.L1 * (1 + 1e-12) or hi > support.L2 * (1 + 1e-12):
            raise ParameterError("target law extends beyond the interval support")


def _constant_curve(r: float, D: float) -> LogCurve:
    s = math.sqrt(2.0 * r / D)
    lr = math.log(r)
    return lambda t: np.asarray(log_expm1(s * np.asarray(t, dtype=float)), dtype=float) - lr


def _full_line_curve(rate: RateFunction, D: float, side: int, X: float | None):
    if isinstance(rate, Constant):
        return _constant_curve(rate.r, D), math.inf
    sol = solve_phi(rate, D, PHI3, X)
    half = sol.half(side)

    def curve(t):
        return log_hitting_curve(sol, side, t)[0]

    return curve, half.t_max


def expected_search_time(rate: RateFunction, D: float, mu: TargetDistribution,
                         support=None, X: float | None = None) -> ObjectiveValue:
    """int E_0 T_a mu(da) for a resetting rate on the line or an interval."""
    if not D > 0:
        raise ParameterError("D must be positive")
    support = support or FullLine()
    _support_ok(mu, support)
    interval = isinstance(support, Interval)
    halves = {s: mu.half(s) for s in (1, -1)}
    if not interval:
        if rate.identically_zero and any(h.mass > 0 for h in halves.values()):
            return ObjectiveValue.infinite("zero rate: hitting times are infinite")
        try:
            cls = classify_finiteness(rate, D)
        except MissingTail:
            cls = None
        if cls is Finiteness.INFINITE:
            return ObjectiveValue.infinite("classifier: E_0 T_a is infinite for a != 0")
    sym = (mu.is_symmetric and rate.is_even
           and (not interval or support.L1 == support.L2))
    sides = (1,) if sym else (1, -1)
    parts: dict[int, _SidePart] = {}
    for side in sides:
        h = halves[side]
        if h.mass <= 0:
            parts[side] = _SidePart(0.0, 0.0)
            continue
        if interval:
            curve = (lambda t, s=side: log_interval_curve(rate, D, support.L1, support.L2, s, t))
            parts[side] = _integrate_half(h, curve)
            continue
        try:
            gate = moment_gate(growth_descriptor(rate, D, side), h.tail)
        except MissingTail:
            gate = None
        if gate is False:
            parts[side] = _SidePart(math.inf, math.inf,
                                    "moment gate: mu tail too heavy for the growth of E_0 T_a")
            continue
        curve, t_cap = _full_line_curve(rate, D, side, X)
        parts[side] = _integrate_half(h, curve, t_cap)
    if sym:
        parts[-1] = parts[1]
    plus, minus = parts[1], parts[-1]
    if not (plus.finite and minus.finite):
        why = plus.reason if not plus.finite else minus.reason
        return ObjectiveValue.infinite(why or "infinite", plus.value, minus.value)
    value = plus.value + minus.value
    err = max(plus.error, minus.error)
    return ObjectiveValue(value, True, plus.value, minus.value, err)


# ---------------------------------------------------------------- optimization


@dataclass
class OptimizationReport:
    """Best parameters found with the full evaluation trace.

    ``value`` is the minimum over ``trace``, so it never exceeds a trace
    entry. ``boundary`` marks an optimum sitting on an edge of the domain
    (for instance r = 0 on an interval).
    """

    params: dict
    value: float
    iterations: int
    evaluations: int
    trace: list[tuple[dict, float]] = field(default_factory=list)
    converged: bool = True
    boundary: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace"] = [{"params": p, **_finite_json(v)} for p, v in self.trace]
        d.update(_finite_json(self.value))
        return d


def _finite_json(v: float) -> dict:
    return {"finite": True, "value": v} if math.isfinite(v) else {"finite": False}


class _Tracker:
    def __init__(self, fn: Callable[[dict], float]):
        self.fn = fn
        self.trace: list[tuple[dict, float]] = []

    def __call__(self, params: dict) -> float:
        v = self.fn(params)
        self.trace.append((params, v))
        return v

    def best(self) -> tuple[dict, float]:
        return min(self.trace, key=lambda pv: pv[1])


def _length_scale(mu: TargetDistribution) -> float:
    ell = mu.avg_dist()
    if not (ell > 0 and math.isfinite(ell)):
        ell = max(mu.half(1).scale, mu.half(-1).scale)
    return ell


def optimize_constant_rate(D: float, mu: TargetDistribution, support=None,
                           n_scan: int = 32) -> OptimizationReport:
    """Minimize the objective over constant rates r >= 0.

    Full line: log-grid prescan on [1e-8, 1e8] D / ell^2 followed by bounded
    Brent on log r. Interval: the same on x = sqrt(2r/D) A, with A the
    larger half-width, and an exact r = 0 boundary optimum.
    """
    support = support or FullLine()
    _support_ok(mu, support)
    if isinstance(support, Interval):
        return _optimize_constant_interval(D, mu, support, n_scan)
    ell = _length_scale(mu)
    unit = D / ell ** 2

    def obj(p):
        return expected_search_time(Constant(p["r"]), D, mu, support).value

    track = _Tracker(obj)
    grid = np.linspace(math.log(1e-8 * unit), math.log(1e8 * unit), n_scan)
    vals = np.array([track({"r": float(math.exp(g))}) for g in grid])
    if not np.any(np.isfinite(vals)):
        raise NonFinite("objective is infinite for every probed constant rate")
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_scan - 1)]
    res = minimize_scalar(lambda lr: track({"r": float(math.exp(lr))}), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-9})
    best, value = track.best()
    edge = i in (0, n_scan - 1)
    return OptimizationReport(dict(best), value, int(res.nit), len(track.trace), track.trace,
                              bool(res.success) and not edge, edge,
                              "optimum at the edge of the scan range" if edge else "")


def _optimize_constant_interval(D, mu, support: Interval, n_scan: int) -> OptimizationReport:
    A = max(support.L1, support.L2)

    def r_of(x):
        return float(0.5 * D * (x / A) ** 2)

    def obj(p):
        return expected_search_time(Constant(p["r"]), D, mu, support).value

    track = _Tracker(lambda p: obj(p))
    probe = lambda x: track({"r": r_of(x), "x": float(x)})
    xs = np.concatenate([[0.0], np.geomspace(1e-3, 60.0, n_scan - 1)])
    vals = np.array([probe(x) for x in xs])
    if not np.any(np.isfinite(vals)):
        raise NonFinite("objective is infinite for every probed constant rate")
    i = int(np.argmin(vals))
    if i == 0:
        f0 = vals[0]
        if probe(1e-6) >= f0:
            # increasing at 0+: the optimum is the boundary r = 0
            return OptimizationReport({"r": 0.0, "x": 0.0}, float(f0), 0, len(track.trace),
                                      track.trace, True, True, "boundary optimum r = 0")
        lo, hi = 0.0, xs[1]
    else:
        lo, hi = xs[i - 1], xs[min(i + 1, xs.size - 1)]
    res = minimize_scalar(probe, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    best, value = track.best()
    return OptimizationReport(dict(best), value, int(res.nit), len(track.trace), track.trace,
                              bool(res.success), best["r"] == 0.0, "")


@dataclass(frozen=True)
class FamilyBox:
    """Search box for the quadratic-decay family in (m, gamma / ell^m)."""

    m: tuple[float, float] = (2.05, 10.0)
    gamma_ratio: tuple[float, float] = (1e-3, 1e6)


def optimize_family(D: float, mu: TargetDistribution, family: str = "quad",
                    box: FamilyBox = FamilyBox(), support=None,
                    raise_on_boundary: bool = True, xatol: float = 1e-5,
                    fatol: float = 1e-10) -> OptimizationReport:
    """Nelder-Mead over the quadratic-decay family r = lam D |x|^(m-2)/(gamma + |x|^m).

    Works in (m, u) with gamma = ell^m e^u and ell the mean target distance,
    which makes the problem scale free. Starts from the best point of a 3x3
    grid. Raises :class:`BoxExhausted` (report attached) when the simplex
    ends on the box boundary.
    """
    if family not in ("quad", "quaddecay", "quad_decay_poly"):
        raise ParameterError(f"unsupported family {family!r}")
    support = support or FullLine()
    ell = _length_scale(mu)
    m_lo, m_hi = box.m
    u_lo, u_hi = (math.log(v) for v in box.gamma_ratio)
    if not (2.0 < m_lo < m_hi and u_lo < u_hi):
        raise ParameterError("family box must lie in m > 2, gamma > 0")

    def params(m, u):
        return {"m": float(m), "gamma": float(ell ** m * math.exp(u))}

    def obj(p):
        rate = QuadDecayPoly(p["m"], p["gamma"], D)
        return expected_search_time(rate, D, mu, support).value

    track = _Tracker(obj)

    def f(z):
        m = min(max(z[0], m_lo), m_hi)
        u = min(max(z[1], u_lo), u_hi)
        v = track(params(m, u))
        return v if math.isfinite(v) else 1e300

    ms = np.linspace(m_lo, m_hi, 5)[1:4]
    us = np.linspace(u_lo, u_hi, 5)[1:4]
    starts = [(m, u) for m in ms for u in us]
    svals = [f(np.array(s)) for s in starts]
    if not any(v < 1e300 for v in svals):
        raise NonFinite("objective is infinite across the starting grid")
    z0 = np.array(starts[int(np.argmin(svals))])
    step = np.array([0.15 * (m_hi - m_lo), 0.15 * (u_hi - u_lo)])
    simplex = np.array([z0, z0 + [step[0], 0.0], z0 + [0.0, step[1]]])
    simplex[:, 0] = np.clip(simplex[:, 0], m_lo, m_hi)
    simplex[:, 1] = np.clip(simplex[:, 1], u_lo, u_hi)
    res = minimize(f, z0, method="Nelder-Mead", bounds=[(m_lo, m_hi), (u_lo, u_hi)],
                   options={"initial_simplex": simplex, "xatol": xatol, "fatol": fatol,
                            "maxfev": 2000})
    best, value = track.best()
    zm = best["m"]
    zu = math.log(best["gamma"] / ell ** zm)
    on_edge = (min(zm - m_lo, m_hi - zm) <= 1e-3 * (m_hi - m_lo)
               or min(zu - u_lo, u_hi - zu) <= 1e-3 * (u_hi - u_lo))
    report = OptimizationReport(dict(best), value, int(res.nit), len(track.trace), track.trace,
                                bool(res.success) and not on_edge, on_edge,
                                "simplex collapsed on the box boundary" if on_edge else "")
    if on_edge and raise_on_boundary:
        raise BoxExhausted("optimizer stopped on the search-box boundary; the optimum may "
                           "lie outside", report)
    return report


# ---------------------------------------------------------------- variational objective


class PhiCandidate:
    """A positive C^2 function phi offered to the variational functional."""

    name = ""

    def rep(self) -> _Closed:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        return 1.0

    @property
    def is_even(self) -> bool:
        return False

    def induced_rate(self, D: float, x) -> np.ndarray:
        """r = (D/2) phi''/phi."""
        rep = self.rep()
        psi = rep.psi(x)
        return 0.5 * D * (rep.dpsi(x) + psi * psi)


@dataclass(frozen=True)
class HyperbolicCosine(PhiCandidate):
    """phi = e^{s x} + e^{-s x}."""

    s: float = 1.0
    name = "cosh"

    def rep(self):
        if not self.s > 0:
            raise InadmissiblePhi("cosh candidate needs s > 0")
        return _CoshPhi(self.s)

    @property
    def scale(self):
        return 1.0 / self.s

    @property
    def is_even(self):
        return True


@dataclass(frozen=True)
class Exponential(PhiCandidate):
    """phi = e^{s x}; one-sided integrability of phi^-2."""

    s: float = 1.0
    name = "exp"

    def rep(self):
        if self.s == 0:
            raise InadmissiblePhi("phi = 1 has phi'' = 0")
        return _ExpPhi(self.s)

    @property
    def scale(self):
        return 1.0 / abs(self.s)


@dataclass(frozen=True)
class MollifiedPolynomial(PhiCandidate):
    """phi = gamma + (eps^2 + x^2)^(m/2); eps defaults to 1e-6 gamma^(1/m)."""

    m: float = 3.0
    gamma: float = 1.0
    eps: float | None = None
    name = "poly"

    def rep(self):
        if not (self.m >= 2 and self.gamma > 0):
            raise InadmissiblePhi("polynomial candidate needs m >= 2 and gamma > 0")
        eps = 1e-6 * self.scale if self.eps is None else self.eps
        return _PolyPhi(self.m, self.gamma, eps)

    @property
    def scale(self):
        return self.gamma ** (1.0 / self.m)

    @property
    def is_even(self):
        return True


@dataclass(frozen=True)
class StretchedExponential(PhiCandidate):
    """phi = exp(lam (gamma + x^2)^((l+1)/2))."""

    lam: float = 1.0
    gamma: float = 1.0
    l: float = 1.0
    name = "stretched"

    def rep(self):
        if not (self.lam > 0 and self.gamma > 0 and self.l > -1):
            raise InadmissiblePhi("stretched candidate needs lam, gamma > 0 and l > -1")
        return _StretchedPhi(self.lam, self.gamma, self.l)

    @property
    def scale(self):
        return math.sqrt(self.gamma)

    @property
    def is_even(self):
        return True


class _AffineRep(_Closed):
    name = "affine"

    def __init__(self, c0: float, c1: float):
        self.c0, self.c1 = c0, c1

    def lf(self, x):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(self.c0 + self.c1 * np.asarray(x, dtype=float))

    def psi(self, x):
        return self.c1 / (self.c0 + self.c1 * np.asarray(x, dtype=float))

    def dpsi(self, x):
        return -self.psi(x) ** 2


@dataclass(frozen=True)
class Affine(PhiCandidate):
    """phi = c0 + c1 x; always inadmissible since phi'' = 0."""

    c0: float = 1.0
    c1: float = 0.0
    name = "affine"

    def rep(self):
        return _AffineRep(self.c0, self.c1)


def _check_admissible(cand: PhiCandidate, D: float) -> None:
    rep = cand.rep()
    x = np.concatenate([np.linspace(-50.0, 50.0, 2001) * cand.scale, [0.0]])
    with np.errstate(invalid="ignore", divide="ignore"):
        lf = rep.lf(x)
        if not np.all(np.isfinite(lf)):
            raise InadmissiblePhi("phi must be positive and finite on the probe grid")
        ratio = cand.induced_rate(D, x)
    if not np.all(np.isfinite(ratio)):
        raise InadmissiblePhi("phi''/phi is not finite on the probe grid")
    tol = 1e-12 * max(1.0, float(np.max(np.abs(ratio))))
    if np.any(ratio < -tol):
        raise InadmissiblePhi("phi'' < 0 somewhere on the probe grid")
    if np.all(np.abs(ratio) <= tol):
        raise InadmissiblePhi("phi'' vanishes identically, so the induced rate is zero")


def variational_objective(cand: PhiCandidate, D: float, mu: TargetDistribution,
                          form: str = "auto") -> ObjectiveValue:
    """The variational functional of ``cand`` against mu.

    Form (i) applies when phi^-2 is integrable at both ends; form (ii) when
    it diverges at -inf (or, mirrored, at +inf). ``form`` may force "i" or
    "ii"; a mismatch with the integrability of phi raises
    :class:`InadmissiblePhi`. The value equals :func:`expected_search_time`
    for the induced rate r = (D/2) phi''/phi.
    """
    if not D > 0:
        raise ParameterError("D must be positive")
    _check_admissible(cand, D)
    rep = cand.rep()
    label = cand.name
    sol3 = HarmonicSolution(PHI3, D, rep, None, label, scale=cand.scale)
    far_div = {s: sol3.half(s).total("G").divergent for s in (1, -1)}
    if far_div[1] and far_div[-1]:
        raise InadmissiblePhi("phi^-2 is integrable at neither end")
    actual = "i" if not (far_div[1] or far_div[-1]) else "ii"
    if form not in ("auto", actual):
        raise InadmissiblePhi(f"phi has the integrability of form ({actual}), not ({form})")
    sym = mu.is_symmetric and cand.is_even
    parts: dict[int, _SidePart] = {}
    for side in ((1,) if sym else (1, -1)):
        h = mu.half(side)
        if h.mass <= 0:
            parts[side] = _SidePart(0.0, 0.0)
            continue
        if not far_div[-side]:
            sol = sol3
        else:
            kind = PHI1 if side > 0 else PHI2
            sol = HarmonicSolution(kind, D, rep, None, label, scale=cand.scale)
        curve = (lambda t, s=side, sl=sol: log_hitting_curve(sl, s, t)[0])
        parts[side] = _integrate_half(h, curve, sol.half(side).t_max)
    if sym:
        parts[-1] = parts[1]
    plus, minus = parts[1], parts[-1]
    if not (plus.finite and minus.finite):
        why = plus.reason if not plus.finite else minus.reason
        return ObjectiveValue.infinite(why or "infinite", plus.value, minus.value)
    return ObjectiveValue(plus.value + minus.value, True, plus.value, minus.value,
                          max(plus.error, minus.error))


# ---------------------------------------------------------------- growth


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares growth law of a -> E_0 T_a.

    ``model="power"``: E ~ C |a|^p with ``exponent=p`` and ``prefactor=C``.
    ``model="logpoly"``: log E ~ log M + K |a|^q with ``exponent=q`` fixed at
    l + 1 and ``prefactor=K``.
    """

    model: str
    exponent: float
    prefactor: float
    intercept: float
    residual: float
    r_squared: float
    a_range: tuple[float, float]
    table: tuple[tuple[float, float], ...] = ()

    @property
    def K(self) -> float:
        return self.prefactor

    def to_dict(self) -> dict:
        return {"model": self.model, "exponent": self.exponent, "prefactor": self.prefactor,
                "intercept": self.intercept, "residual": self.residual,
                "r_squared": self.r_squared, "a_range": list(self.a_range)}


def log_hitting_values(rate: RateFunction, D: float, a_values: Sequence[float],
                       X: float | None = None) -> np.ndarray:
    """log E_0 T_a on a grid (+inf where infinite).

    Without ``X`` the numeric domain is widened to cover the grid.
    """
    a = np.asarray(a_values, dtype=float)
    if isinstance(rate, Constant) and rate.r > 0:
        return _constant_curve(rate.r, D)(np.abs(a))
    if X is None and a.size:
        X = max(default_domain(rate), 1.25 * float(np.max(np.abs(a))))
    res = expected_hitting_many(rate, D, a, X=X, check=False)
    return np.array([r.log_value if r.finite else math.inf for r in res])


def estimate_growth(rate: RateFunction, D: float, a_values: Sequence[float],
                    model: str = "power", l: float = 0.0,
                    X: float | None = None) -> GrowthFit:
    """Fit log E_0 T_a against log|a| ("power") or |a|^(l+1) ("logpoly")."""
    a = np.abs(np.asarray(a_values, dtype=float))
    if a.size < 4:
        raise ParameterError("growth fits need at least 4 grid points")
    if np.any(a == 0):
        raise ParameterError("growth grid must exclude a = 0")
    if model not in ("power", "logpoly"):
        raise ParameterError(f"unknown growth model {model!r}")
    y = log_hitting_values(rate, D, a, X)
    if not np.all(np.isfinite(y)):
        raise InfiniteSample("E_0 T_a is infinite at some grid point")
    q = l + 1.0
    x = np.log(a) if model == "power" else a ** q
    slope, icept = np.polyfit(x, y, 1)
    fit = slope * x + icept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    table = tuple((float(ai), float(yi)) for ai, yi in zip(a, y))
    if model == "power":
        return GrowthFit("power", float(slope), float(math.exp(icept)), float(icept),
                         math.sqrt(ss_res / a.size), r2, (float(a.min()), float(a.max())), table)
    return GrowthFit("logpoly", q, float(slope), float(icept), math.sqrt(ss_res / a.size), r2,
                     (float(a.min()), float(a.max())), table)


@dataclass(frozen=True)
class SandwichBounds:
    """Stretched-exponential comparison rates r_lo <= r <= r_hi on the tail.

    ``K1`` and ``K2`` bracket the growth constant K of
    log E_0 T_a ~ K |a|^(l+1).
    """

    lam_lo: float
    lam_hi: float
    gamma: float
    l: float

    @property
    def K1(self) -> float:
        return self.lam_lo

    @property
    def K2(self) -> float:
        return self.lam_hi


def sandwich_bounds(rate: RateFunction, D: float, l: float, x_range=(1.0, 100.0),
                    n: int = 400, margin: float = 0.1, max_iter: int = 200) -> SandwichBounds:
    """Bracket the tail of ``rate`` between stretched-exponential rates.

    Starting from lam0 (1 - margin) and lam0 (1 + margin), with lam0 the
    rate's own lambda when it has one, lam_lo shrinks until the comparison
    rate lies below r on ``x_range`` (both sides) and lam_hi grows until it
    lies above.
    """
    if not l > -1:
        raise ParameterError("l must exceed -1")
    x = np.geomspace(x_range[0], x_range[1], n)
    x = np.concatenate([x, -x])
    r = np.asarray(rate(x), dtype=float)
    lam0 = rate.lam if isinstance(rate, StretchedExpHarmonic) else 1.0

    def comp(lam):
        g = max(1.0, stretched_gamma_floor(lam, l))
        return StretchedExpHarmonic(lam, g, l, D)

    lo = lam0 * (1.0 - margin)
    for _ in range(max_iter):
        if np.all(np.asarray(comp(lo)(x)) <= r):
            break
        lo *= 0.9
    else:
        raise ParameterError("could not find a lower comparison rate")
    hi = lam0 * (1.0 + margin)
    for _ in range(max_iter):
        if np.all(np.asarray(comp(hi)(x)) >= r):
            break
        hi *= 1.1
    else:
        raise ParameterError("could not find an upper comparison rate")
    return SandwichBounds(lo, hi, comp(lo).gamma, l)


def comparison_bounds(rate: RateFunction, lower: RateFunction, upper: RateFunction, D: float,
                      a_values, probe=None) -> np.ndarray:
    """Bounds on log E_0 T_a from rates with lower <= rate <= upper everywhere.

    u(0) and v(0) are nonincreasing in r, so
    v_upper / u_lower <= E_0 T_a <= v_lower / u_upper. Returns an array of
    (low, high) log bounds per target. The ordering is verified on
    ``probe`` (default a symmetric grid on [-50, 50]).
    """
    probe = np.linspace(-50.0, 50.0, 2001) if probe is None else np.asarray(probe, dtype=float)
    r = np.asarray(rate(probe))
    if np.any(np.asarray(lower(probe)) > r * (1 + 1e-12)) or \
            np.any(np.asarray(upper(probe)) < r * (1 - 1e-12)):
        raise ParameterError("comparison rates do not bracket the rate on the probe grid")
    sol_lo = solve_phi(lower, D, PHI3)
    sol_hi = solve_phi(upper, D, PHI3)
    out = []
    for a in np.atleast_1d(np.asarray(a_values, dtype=float)):
        c_lo = hitting_components(sol_lo, float(a))
        c_hi = hitting_components(sol_hi, float(a))
        out.append((c_hi.log_v - c_lo.log_u, c_lo.log_v - c_hi.log_u))
    return np.array(out)


__all__ = [
    "Affine", "Exponential", "FamilyBox", "GrowthFit", "HyperbolicCosine",
    "MollifiedPolynomial", "ObjectiveValue", "OptimizationReport", "PhiCandidate",
    "SandwichBounds", "StretchedExponential", "comparison_bounds", "estimate_growth", "expected_search_time",
    "log_hitting_values", "moment_gate", "optimize_constant_rate", "optimize_family",
    "sandwich_bounds", "variational_objective",
]
