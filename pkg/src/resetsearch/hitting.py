"""Expected hitting times E_0 T_a for Brownian search with resetting.

On the full line, with phi a positive harmonic function and a > 0,

    E_0 T_a = (2/D) phi(a) [ W(a) + c G(a) ],

where G(a) = int_0^a phi^-2, W(a) = int_0^a phi^-2(t) int_0^t phi, and the
constant c collects the left half-line: c = J / I for the two-sided
integrable phi_3 (I = int_{-inf}^0 phi^-2, J = int_{-inf}^0 phi^-2(x) int_x^0
phi), or c = int_{-inf}^0 phi_1 for phi_1. Negative targets use the mirror
image. The expression is v(0)/u(0) with u, v the success-probability and
occupation-time components.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._numerics import log_expm1, log_sinhc
from .errors import (ClassifierDisagreement, KindMismatch, MissingTail, ParameterError,
                     SingularSystem)
from .harmonic import PHI1, PHI2, PHI3, HarmonicSolution, solve_phi
from .model import Constant, PowerLaw, RateFunction

CLOSED_FORM = "ClosedForm"
PHI3_QUAD = "Phi3Quadrature"
PHI1_QUAD = "Phi1Quadrature"
INTERVAL_CLOSED = "IntervalClosedForm"
INTERVAL_GENERAL = "IntervalGeneral"
SINGULAR_COND = 1e12
_LOG_MAX = math.log(np.finfo(float).max)


class Finiteness(str, enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class HittingTimeResult:
    """log E_0 T_a, or an infinite flag.

    ``log_value`` is None when infinite and -inf for a = 0. ``classifier``
    and ``quadrature`` record the two finiteness channels when both ran.
    """

    a: float
    log_value: float | None
    finite: bool
    method: str
    error_estimate: float
    classifier: str | None = None
    quadrature: str | None = None

    @property
    def value(self) -> float:
        if not self.finite or self.log_value > _LOG_MAX:  # type: ignore[operator]
            return math.inf  # infinite, or finite but beyond double range
        return math.exp(self.log_value)  # type: ignore[arg-type]

    @property
    def channels_agree(self) -> bool | None:
        if self.classifier is None or self.quadrature is None:
            return None
        if self.classifier == Finiteness.BOUNDARY.value:
            return None
        return self.classifier == self.quadrature


@dataclass(frozen=True)
class HittingComponents:
    """log u(0) and log v(0) for target a; ``log_v`` is inf when v is infinite."""

    a: float
    log_u: float
    log_v: float
    kind: str

    @property
    def v_finite(self) -> bool:
        return math.isfinite(self.log_v)

    @property
    def u(self) -> float:
        return math.exp(self.log_u)

    @property
    def v(self) -> float:
        return math.exp(self.log_v) if self.v_finite else math.inf

    @property
    def log_ratio(self) -> float:
        return self.log_v - self.log_u


# ---------------------------------------------------------------- closed form


def expected_hitting_constant(r: float, D: float, a: float) -> HittingTimeResult:
    """(exp(sqrt(2r/D)|a|) - 1)/r in log-space."""
    if not (r > 0 and D > 0):
        raise ParameterError("constant-rate formula needs r > 0 and D > 0")
    if a == 0:
        return HittingTimeResult(0.0, -math.inf, True, CLOSED_FORM, 0.0)
    s = math.sqrt(2.0 * r / D)
    lv = float(log_expm1(s * abs(a))) - math.log(r)
    return HittingTimeResult(a, lv, True, CLOSED_FORM, 4e-16 * (1.0 + s * abs(a)))


# ---------------------------------------------------------------- components


def _side_components(phi: HarmonicSolution, side: int, t: np.ndarray):
    """Vectorized (log u, log v, error) for targets side * t, t > 0."""
    if phi.kind == PHI3:
        pass
    elif phi.kind == PHI1 and side < 0 or phi.kind == PHI2 and side > 0:
        raise KindMismatch(f"{phi.kind} formulas need a target on the "
                           f"{'right' if phi.kind == PHI1 else 'left'}")
    near = phi.half(side)
    far = phi.half(-side)
    lphi_t, lg_t, lw_t = near.cumulative(t)
    lf0 = float(phi.logphi(0.0))
    lfa = phi.logphi(side * t)
    log2d = math.log(2.0 / phi.D)
    if phi.kind == PHI3:
        tot_i = far.total("G")
        if tot_i.divergent:
            raise KindMismatch("phi labelled phi3 but its far tail of phi^-2 diverges")
        tot_j = far.total("W")
        li = tot_i.log_value
        denom = np.logaddexp(li, lg_t)
        log_u = lf0 - lfa + li - denom
        err = max(tot_i.rel_change, 1e-13)
        if tot_j.divergent:
            log_v = np.full(t.shape, math.inf)
        else:
            log_v = log2d + lf0 + np.logaddexp(li + lw_t, tot_j.log_value + lg_t) - denom
            err = max(err, tot_j.rel_change)
    else:
        tot_p = far.total("Phi")
        log_u = lf0 - lfa
        err = 1e-13
        if tot_p.divergent:
            log_v = np.full(t.shape, math.inf)
        else:
            log_v = log2d + lf0 + np.logaddexp(lw_t, tot_p.log_value + lg_t)
            err = max(err, tot_p.rel_change)
    if phi.is_grid:
        err = max(err, 1e-7)
    return np.asarray(log_u, dtype=float), np.asarray(log_v, dtype=float), err


def hitting_components(phi: HarmonicSolution, a: float) -> HittingComponents:
    """u(0) and v(0) for the target a from phi_3 (either side) or phi_1/phi_2."""
    if a == 0:
        raise ParameterError("components are defined for a != 0")
    side = 1 if a > 0 else -1
    lu, lv, _ = _side_components(phi, side, np.array([abs(a)]))
    return HittingComponents(a, float(lu[0]), float(lv[0]), phi.kind)


def log_hitting_curve(phi: HarmonicSolution, side: int, t) -> tuple[np.ndarray, float]:
    """log E_0 T_{side*t} for an array of distances, plus a relative error estimate."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.full(t.shape, -math.inf)
    pos = t > 0
    if not np.any(pos):
        return out, 0.0
    lu, lv, err = _side_components(phi, side, t[pos])
    out[pos] = lv - lu
    return out, err


# ---------------------------------------------------------------- classification


def _tail_class(rate: RateFunction, D: float, side: int) -> Finiteness:
    law = rate.tail(side)
    if law is None:
        raise MissingTail(f"tabulated rate has no declared tail on the "
                          f"{'right' if side > 0 else 'left'}")
    if law.c == 0:
        return Finiteness.INFINITE
    if law.p < 2:
        return Finiteness.FINITE
    if law.p > 2:
        return Finiteness.INFINITE
    lam = law.c / D
    if lam > 1:
        return Finiteness.FINITE
    if lam < 1:
        return Finiteness.INFINITE
    # lam == 1: c(gamma + x^2)^-1 = D/(gamma + x^2) meets the divergent bound exactly
    if isinstance(rate, PowerLaw):
        return Finiteness.INFINITE
    return Finiteness.BOUNDARY


def classify_finiteness(rate: RateFunction, D: float) -> Finiteness:
    """Finite / Infinite / Boundary from the tails of r compared with D/x^2."""
    if not D > 0:
        raise ParameterError("D must be positive")
    if rate.identically_zero:
        return Finiteness.INFINITE
    sides = [_tail_class(rate, D, s) for s in (1, -1)]
    if Finiteness.INFINITE in sides:
        return Finiteness.INFINITE
    if all(s is Finiteness.FINITE for s in sides):
        return Finiteness.FINITE
    return Finiteness.BOUNDARY


def growth_descriptor(rate: RateFunction, D: float, side: int) -> tuple:
    """How E_0 T_a grows as a -> side * inf.

    ``("power", m)``, ``("exp", s)`` for exp(s|a|), ``("subexp",)``,
    ``("superexp",)``, or ``("infinite",)``.
    """
    law = rate.tail(side)
    if law is None:
        raise MissingTail("tabulated rate has no declared tail")
    cls = _tail_class(rate, D, side)
    if cls is not Finiteness.FINITE:
        return ("infinite",) if cls is Finiteness.INFINITE else ("boundary",)
    if law.p == 2:
        lam = law.c / D
        return ("power", 0.5 * (1.0 + math.sqrt(1.0 + 8.0 * lam)))
    if law.p == 0:
        return ("exp", math.sqrt(2.0 * law.c / D))
    if law.p > 0:
        return ("subexp",)
    return ("superexp",)


# ---------------------------------------------------------------- general evaluator


def _resolve_kind(phi: str, a: float) -> str:
    if phi == PHI3:
        return PHI3
    if phi in (PHI1, PHI2):
        return PHI1 if a > 0 else PHI2
    raise ParameterError(f"unknown phi choice {phi!r}")


def expected_hitting_general(rate: RateFunction, D: float, a: float, phi: str = PHI3,
                             X: float | None = None, solution: HarmonicSolution | None = None,
                             check: bool = True) -> HittingTimeResult:
    """E_0 T_a from the phi_3 or phi_1 representation.

    ``phi="phi1"`` uses phi_1 for a > 0 and its mirror phi_2 for a < 0.
    """
    return expected_hitting_many(rate, D, [a], phi, X, solution, check)[0]


def expected_hitting_many(rate: RateFunction, D: float, a_values, phi: str = PHI3,
                          X: float | None = None, solution: HarmonicSolution | None = None,
                          check: bool = True) -> list[HittingTimeResult]:
    """Vectorized :func:`expected_hitting_general` sharing one harmonic solution."""
    if not D > 0:
        raise ParameterError("D must be positive")
    a_arr = np.atleast_1d(np.asarray(a_values, dtype=float))
    if not np.all(np.isfinite(a_arr)):
        raise ParameterError("targets must be finite")
    cls = None
    if check:
        try:
            cls = classify_finiteness(rate, D).value
        except MissingTail:
            cls = None
    results: list[HittingTimeResult | None] = [None] * a_arr.size
    for side in (1, -1):
        idx = np.flatnonzero(side * a_arr > 0)
        if idx.size == 0:
            continue
        kind = _resolve_kind(phi, side * 1.0)
        sol = solution if solution is not None else solve_phi(rate, D, kind, X)
        method = PHI3_QUAD if sol.kind == PHI3 else PHI1_QUAD
        lu, lv, err = _side_components(sol, side, np.abs(a_arr[idx]))
        for j, i in enumerate(idx):
            finite = bool(np.isfinite(lv[j]))
            quad = Finiteness.FINITE.value if finite else Finiteness.INFINITE.value
            if cls in (Finiteness.FINITE.value, Finiteness.INFINITE.value) and cls != quad:
                warnings.warn(
                    f"finiteness channels disagree at a={a_arr[i]}: tails say {cls}, "
                    f"quadrature says {quad}", ClassifierDisagreement, stacklevel=2)
            results[i] = HittingTimeResult(float(a_arr[i]), float(lv[j] - lu[j]) if finite else None,
                                           finite, method, err, cls, quad)
    for i in np.flatnonzero(a_arr == 0):
        results[i] = HittingTimeResult(0.0, -math.inf, True, PHI3_QUAD, 0.0, cls, None)
    return results  # type: ignore[return-value]


def expected_hitting(rate: RateFunction, D: float, a: float, **kw) -> HittingTimeResult:
    """Closed form for constant rates, otherwise the phi_3 representation."""
    if isinstance(rate, Constant) and rate.r > 0 and not kw:
        return expected_hitting_constant(rate.r, D, a)
    return expected_hitting_general(rate, D, a, **kw)


# ---------------------------------------------------------------- interval support


def _interval_constant_log(r: float, D: float, t: np.ndarray, L: float) -> np.ndarray:
    """log E for constant r on an interval; t = |a|, L = extent behind the origin.

    Uses sinh(x+y) - sinh x - sinh y = 4 sinh(x/2) sinh(y/2) sinh((x+y)/2),
    which keeps the r -> 0 limit t(t+L)/D exact.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        base = np.log(t) + np.log(t + L) - math.log(D)
    if r == 0:
        return base
    k = math.sqrt(2.0 * r / D)
    return (base + log_sinhc(0.5 * k * t) + log_sinhc(0.5 * k * L)
            + log_sinhc(0.5 * k * (t + L)) - log_sinhc(k * L))


def _interval_general(rate: RateFunction, D: float, t: float, L: float, side: int) -> float:
    """Solve the nonlocal boundary problem on [-L, t] (mirrored when side < 0)."""

    def r_of(x):
        return float(rate(side * x))

    def rhs(x, y):
        rx = 2.0 / D * r_of(x)
        return [y[1], rx * y[0], y[3], rx * y[2], y[5], rx * y[4] - 2.0 / D]

    y0 = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
    opts = dict(method="DOP853", rtol=1e-12, atol=1e-14)
    fwd = solve_ivp(rhs, (0.0, t), y0, **opts)
    bwd = solve_ivp(rhs, (0.0, -L), y0, **opts)
    if not (fwd.success and bwd.success):
        raise SingularSystem(f"boundary-value integration failed: {fwd.message} {bwd.message}")
    ya = fwd.y[:, -1]
    yl = bwd.y[:, -1]
    M = np.array([[ya[0], ya[2]], [yl[0] - 1.0, yl[2]]])
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularSystem(f"interval system condition number {cond:.3g}")
    alpha = np.linalg.solve(M, [1.0, 0.0])
    beta = np.linalg.solve(M, [-ya[4], -yl[4]])
    if alpha[0] <= 0 or beta[0] <= 0:
        raise SingularSystem("interval solution lost positivity")
    return math.log(beta[0]) - math.log(alpha[0])


def expected_hitting_interval(rate: RateFunction, D: float, L1: float, L2: float, a: float,
                              method: str = "auto") -> HittingTimeResult:
    """E_0 T_a on [-L1, L2] with instantaneous reset at both ends.

    ``method`` is "auto", "closed" or "general".
    """
    if not (L1 > 0 and L2 > 0 and D > 0):
        raise ParameterError("L1, L2 and D must be positive")
    if not (-L1 <= a <= L2):
        raise ParameterError(f"target {a} outside [-{L1}, {L2}]")
    if a == 0:
        return HittingTimeResult(0.0, -math.inf, True, INTERVAL_CLOSED, 0.0)
    side = 1 if a > 0 else -1
    t = abs(a)
    L = L1 if side > 0 else L2
    closed = isinstance(rate, Constant)
    if method == "general" or (method == "auto" and not closed):
        lv = _interval_general(rate, D, t, L, side)
        return HittingTimeResult(a, lv, True, INTERVAL_GENERAL, 1e-10)
    if not closed:
        raise ParameterError("interval closed form needs a constant rate")
    lv = float(_interval_constant_log(rate.r, D, np.array([t]), L)[0])
    return HittingTimeResult(a, lv, True, INTERVAL_CLOSED, 1e-14)


def log_interval_curve(rate: RateFunction, D: float, L1: float, L2: float, side: int,
                       t) -> np.ndarray:
    """log E_0 T_{side*t} on [-L1, L2] for an array of distances."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    L = L1 if side > 0 else L2
    out = np.full(t.shape, -math.inf)
    pos = t > 0
    if isinstance(rate, Constant):
        out[pos] = _interval_constant_log(rate.r, D, t[pos], L)
    else:
        out[pos] = [_interval_general(rate, D, float(ti), L, side) for ti in t[pos]]
    return out


__all__ = [
    "CLOSED_FORM", "Finiteness", "HittingComponents", "HittingTimeResult", "INTERVAL_CLOSED",
    "INTERVAL_GENERAL", "PHI1_QUAD", "PHI3_QUAD", "classify_finiteness",
    "expected_hitting", "expected_hitting_constant", "expected_hitting_general",
    "expected_hitting_interval", "expected_hitting_many", "growth_descriptor",
    "hitting_components", "log_hitting_curve", "log_interval_curve",
]
