"""Domain types: diffusion parameters, resetting rates, target laws, supports.

Every type is an immutable dataclass. Rates are callables returning r(x) and
carry a small description of their tails, which is all the finiteness
classifier needs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, ClassVar, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import AtomAtOrigin, OneSided, ParameterError, ParseError

MASS_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    D: float

    def __post_init__(self):
        if not (self.D > 0 and math.isfinite(self.D)):
            raise ParameterError(f"D must be positive, got {self.D}")


@dataclass(frozen=True)
class TailLaw:
    """Asymptotic form r(x) ~ c |x|^(-p) along one tail.

    ``p`` may be negative (growing rates) and ``c`` may be zero.
    """

    c: float
    p: float


@dataclass(frozen=True)
class KernelSpec:
    kind: int
    params: np.ndarray
    knots: np.ndarray
    coef: np.ndarray


_EMPTY = np.zeros(0)


def _check_D(D: float) -> None:
    if not (D > 0 and math.isfinite(D)):
        raise ParameterError(f"D must be positive, got {D}")


# ---------------------------------------------------------------- rates


class RateFunction:
    """Base class for resetting-rate families."""

    family: ClassVar[str] = ""

    def __call__(self, x):
        from ._kernels import get_backend

        spec = self.kernel_spec
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = get_backend().rate_values(spec.kind, spec.params, spec.knots, spec.coef,
                                        np.ascontiguousarray(arr.ravel())).reshape(arr.shape)
        return float(out[0]) if np.ndim(x) == 0 else out

    @property
    def kernel_spec(self) -> KernelSpec:
        raise NotImplementedError

    def tail(self, side: int) -> TailLaw | None:
        """Tail law toward ``side`` (+1 or -1), or None when undeclared."""
        raise NotImplementedError

    @property
    def is_even(self) -> bool:
        return True

    @property
    def scale(self) -> float:
        """A characteristic length for default domains and step sizes."""
        return 1.0

    @property
    def identically_zero(self) -> bool:
        return False

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Positions where r is not smooth."""
        return ()

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(RateFunction):
    r: float
    family: ClassVar[str] = "constant"

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise ParameterError(f"constant rate must be >= 0, got {self.r}")

    @cached_property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(0, np.array([self.r], dtype=float), _EMPTY, _EMPTY)

    def tail(self, side: int) -> TailLaw:
        return TailLaw(self.r, 0.0)

    @property
    def identically_zero(self) -> bool:
        return self.r == 0.0

    def to_dict(self):
        return {"family": self.family, "r": self.r}


@dataclass(frozen=True)
class PowerLaw(RateFunction):
    """r(x) = c (gamma + x^2)^l."""

    c: float
    gamma: float
    l: float
    family: ClassVar[str] = "powerlaw"

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ParameterError(f"powerlaw c must be >= 0, got {self.c}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ParameterError(f"powerlaw gamma must be > 0, got {self.gamma}")
        if not math.isfinite(self.l):
            raise ParameterError("powerlaw exponent must be finite")

    @cached_property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(1, np.array([self.c, self.gamma, self.l], dtype=float), _EMPTY, _EMPTY)

    def tail(self, side: int) -> TailLaw:
        return TailLaw(self.c, -2.0 * self.l)

    @property
    def scale(self) -> float:
        return math.sqrt(self.gamma)

    @property
    def identically_zero(self) -> bool:
        return self.c == 0.0

    def to_dict(self):
        return {"family": self.family, "c": self.c, "gamma": self.gamma, "l": self.l}


@dataclass(frozen=True)
class QuadDecayPoly(RateFunction):
    """r(x) = m(m-1)/2 * D |x|^(m-2) / (gamma + |x|^m), harmonic with gamma + |x|^m."""

    m: float
    gamma: float
    D: float
    family: ClassVar[str] = "quad"

    def __post_init__(self):
        if not (self.m > 2 and math.isfinite(self.m)):
            raise ParameterError(f"quad exponent m must be > 2, got {self.m}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ParameterError(f"quad gamma must be > 0, got {self.gamma}")
        _check_D(self.D)

    @property
    def lam(self) -> float:
        return 0.5 * self.m * (self.m - 1.0)

    @cached_property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(2, np.array([self.m, self.gamma, self.D], dtype=float), _EMPTY, _EMPTY)

    def tail(self, side: int) -> TailLaw:
        return TailLaw(self.lam * self.D, 2.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return () if float(self.m).is_integer() and self.m % 2 == 0 else (0.0,)

    @property
    def scale(self) -> float:
        return self.gamma ** (1.0 / self.m)

    def to_dict(self):
        return {"family": self.family, "m": self.m, "gamma": self.gamma, "D": self.D}


def stretched_gamma_floor(lam: float, l: float) -> float:
    """Smallest gamma keeping the stretched-exponential rate nonnegative when l < 0."""
    if l >= 0:
        return 0.0
    return (-l / ((l + 1.0) * lam)) ** (2.0 / (l + 1.0))


@dataclass(frozen=True)
class StretchedExpHarmonic(RateFunction):
    """Rate whose harmonic function is exp(lam (gamma + x^2)^((l+1)/2))."""

    lam: float
    gamma: float
    l: float
    D: float
    family: ClassVar[str] = "stretched"

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ParameterError(f"stretched lambda must be > 0, got {self.lam}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ParameterError(f"stretched gamma must be > 0, got {self.gamma}")
        if not (self.l > -1 and math.isfinite(self.l)):
            raise ParameterError(f"stretched exponent l must be > -1, got {self.l}")
        _check_D(self.D)
        floor = stretched_gamma_floor(self.lam, self.l)
        if self.gamma < floor * (1.0 - 1e-12):
            raise ParameterError(
                f"gamma={self.gamma} below {floor} makes the rate negative for l={self.l}")

    @cached_property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(3, np.array([self.lam, self.gamma, self.l, self.D], dtype=float),
                          _EMPTY, _EMPTY)

    def tail(self, side: int) -> TailLaw:
        return TailLaw(0.5 * self.D * (self.lam * (self.l + 1.0)) ** 2, -2.0 * self.l)

    @property
    def scale(self) -> float:
        return math.sqrt(self.gamma)

    def to_dict(self):
        return {"family": self.family, "lambda": self.lam, "gamma": self.gamma, "l": self.l,
                "D": self.D}


@dataclass(frozen=True)
class Tabulated(RateFunction):
    """Monotone-cubic interpolation on a grid with power-law tails beyond it.

    ``tail_left`` and ``tail_right`` are ``(c, p)`` pairs for r ~ c|x|^-p.
    Without them the end values are held constant and classification is
    refused.
    """

    grid: tuple[float, ...]
    values: tuple[float, ...]
    tail_left: tuple[float, float] | None = None
    tail_right: tuple[float, float] | None = None
    family: ClassVar[str] = "tabulated"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", tuple(float(t) for t in g))
        object.__setattr__(self, "values", tuple(float(t) for t in v))
        for name in ("tail_left", "tail_right"):
            t = getattr(self, name)
            if t is not None:
                c, p = (float(t[0]), float(t[1]))
                if c < 0 or not (math.isfinite(c) and math.isfinite(p)):
                    raise ParameterError(f"{name} must be (c >= 0, finite p)")
                object.__setattr__(self, name, (c, p))
        if g.ndim != 1 or g.size < 2 or v.shape != g.shape:
            raise ParameterError("tabulated rate needs matching 1-D grid and values, length >= 2")
        if np.any(np.diff(g) <= 0):
            raise ParameterError("tabulated grid must be strictly increasing")
        if not (g[0] < 0 < g[-1]):
            raise ParameterError("tabulated grid must straddle the origin")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ParameterError("tabulated rates must be finite and >= 0")

    @cached_property
    def kernel_spec(self) -> KernelSpec:
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        coef = np.ascontiguousarray(PchipInterpolator(g, v).c, dtype=float)
        # without a declared tail the end value is held constant (p = 0)
        cl, pl = self.tail_left or (v[0], 0.0)
        cr, pr = self.tail_right or (v[-1], 0.0)
        params = np.array([cl, pl, cr, pr], dtype=float)
        return KernelSpec(4, params, np.ascontiguousarray(g), coef.ravel())

    def tail(self, side: int) -> TailLaw | None:
        t = self.tail_right if side > 0 else self.tail_left
        return None if t is None else TailLaw(*t)

    @property
    def is_even(self) -> bool:
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        return (np.allclose(g, -g[::-1], rtol=0, atol=0) and np.array_equal(v, v[::-1])
                and self.tail_left == self.tail_right)

    @property
    def scale(self) -> float:
        return max(abs(self.grid[0]), abs(self.grid[-1]))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.grid

    @property
    def identically_zero(self) -> bool:
        tails_zero = all(t is not None and t[0] == 0 for t in (self.tail_left, self.tail_right))
        return tails_zero and not any(self.values)

    def to_dict(self):
        d: dict[str, Any] = {"family": self.family, "grid": list(self.grid),
                             "values": list(self.values)}
        if self.tail_left is not None:
            d["tail_left"] = list(self.tail_left)
        if self.tail_right is not None:
            d["tail_right"] = list(self.tail_right)
        return d


def rate_eval(rate: RateFunction, x):
    """Pointwise r(x); vectorized over arrays."""
    if not np.all(np.isfinite(x)):
        raise ParameterError("rate_eval requires finite positions")
    return rate(x)


def inverse_square(lam: float, gamma: float, D: float) -> PowerLaw:
    """r(x) = lam * D / (gamma + x^2), the borderline family of the dichotomy."""
    return PowerLaw(c=lam * D, gamma=gamma, l=-1.0)


# ---------------------------------------------------------------- target laws


@dataclass(frozen=True)
class HalfMeasure:
    """A law on distances t = |a| > 0 along one side of the origin.

    The continuous part has total weight ``cont_weight``; ``density`` is
    vectorized. ``tail`` describes decay beyond ``t_hi``: ``("compact",)``,
    ``("exp", beta)``, or ``("power", p0)`` meaning moments of order < p0
    are finite.
    """

    side: int
    atoms: tuple[tuple[float, float], ...]
    cont_weight: float
    density: Callable[[np.ndarray], np.ndarray] | None
    breaks: tuple[float, ...]
    t_hi: float
    tail: tuple
    scale: float

    @property
    def mass(self) -> float:
        return self.cont_weight + sum(w for _, w in self.atoms)

    def cdf(self, t) -> np.ndarray:
        """P(|a| <= t) under this (normalized) half law."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        for pos, w in self.atoms:
            out += w * (t >= pos)
        if self.density is not None and self.cont_weight > 0:
            from scipy.integrate import quad

            for i, ti in enumerate(t):
                if ti <= 0:
                    continue
                pts = [b for b in self.breaks if 0 < b < ti]
                upper = min(ti, self.t_hi)
                val = 0.0
                edges = [0.0] + pts + [upper]
                for lo, hi in zip(edges[:-1], edges[1:]):
                    if hi > lo:
                        val += quad(lambda s: float(self.density(np.array([s]))[0]), lo, hi,
                                    epsabs=1e-14, epsrel=1e-13, limit=200)[0]
                if ti > self.t_hi and math.isfinite(self.t_hi):
                    val = self.cont_weight
                out[i] += val
        return out

    def normalized(self) -> "HalfMeasure":
        m = self.mass
        if m <= 0:
            raise OneSided("empty half-line")
        dens = self.density
        scaled = None if dens is None else (lambda t, f=dens, m=m: f(t) / m)
        return HalfMeasure(self.side, tuple((p, w / m) for p, w in self.atoms),
                           self.cont_weight / m, scaled, self.breaks, self.t_hi, self.tail,
                           self.scale)


class TargetDistribution:
    """Base class for target laws on the real line."""

    family: ClassVar[str] = ""

    def half(self, side: int) -> HalfMeasure:
        """Unnormalized restriction to one side, as a law on t = |a|."""
        raise NotImplementedError

    @property
    def atom_at_zero(self) -> float:
        return 0.0

    @property
    def is_symmetric(self) -> bool:
        return False

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def mass_side(self, side: int) -> float:
        return self.half(side).mass

    @property
    def total_mass(self) -> float:
        return self.mass_side(1) + self.mass_side(-1) + self.atom_at_zero

    def avg_dist(self) -> float:
        """Mean absolute distance of the target from the origin."""
        total = 0.0
        for side in (1, -1):
            h = self.half(side)
            total += sum(p * w for p, w in h.atoms)
            if h.density is not None and h.cont_weight > 0:
                total += _integrate_density(h, lambda t: t)
        return total

    def cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        pos = self.half(1)
        neg = self.half(-1)
        mneg = neg.mass
        for i, xi in enumerate(x):
            if xi < 0:
                # P(a <= x) = P(|a| >= -x) on the negative side
                out[i] = mneg - float(neg.cdf(np.nextafter(-xi, 0.0))[0])
            else:
                out[i] = mneg + self.atom_at_zero + float(pos.cdf(xi)[0])
        return out

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


def _integrate_density(h: HalfMeasure, g: Callable[[np.ndarray], np.ndarray]) -> float:
    from scipy.integrate import quad

    edges = [0.0] + [b for b in h.breaks if 0 < b < h.t_hi]
    if math.isfinite(h.t_hi):
        edges.append(h.t_hi)
        pieces = zip(edges[:-1], edges[1:])
        total = 0.0
    else:
        pieces = zip(edges[:-1], edges[1:])
        total = quad(lambda s: float(h.density(np.array([s]))[0] * g(s)), edges[-1], np.inf,
                     epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    for lo, hi in pieces:
        if hi > lo:
            total += quad(lambda s: float(h.density(np.array([s]))[0] * g(s)), lo, hi,
                          epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return total


@dataclass(frozen=True)
class TwoSidedExponential(TargetDistribution):
    beta: float
    family: ClassVar[str] = "exp2"

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must be > 0, got {self.beta}")

    def half(self, side: int) -> HalfMeasure:
        b = self.beta
        return HalfMeasure(side, (), 0.5, lambda t: 0.5 * b * np.exp(-b * np.asarray(t)), (),
                           math.inf, ("exp", b), 1.0 / b)

    @property
    def is_symmetric(self) -> bool:
        return True

    @property
    def support(self):
        return (-math.inf, math.inf)

    def avg_dist(self) -> float:
        return 1.0 / self.beta

    def to_dict(self):
        return {"family": self.family, "beta": self.beta}


@dataclass(frozen=True)
class UniformInterval(TargetDistribution):
    A: float
    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ParameterError(f"A must be > 0, got {self.A}")

    def half(self, side: int) -> HalfMeasure:
        A = self.A
        return HalfMeasure(side, (), 0.5,
                           lambda t: np.where(np.asarray(t) <= A, 0.5 / A, 0.0), (A,), A,
                           ("compact",), A)

    @property
    def is_symmetric(self) -> bool:
        return True

    @property
    def support(self):
        return (-self.A, self.A)

    def avg_dist(self) -> float:
        return 0.5 * self.A

    def to_dict(self):
        return {"family": self.family, "A": self.A}


@dataclass(frozen=True)
class TriangularInterval(TargetDistribution):
    A: float
    family: ClassVar[str] = "triangular"

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ParameterError(f"A must be > 0, got {self.A}")

    def half(self, side: int) -> HalfMeasure:
        A = self.A
        return HalfMeasure(side, (), 0.5,
                           lambda t: np.maximum(A - np.asarray(t), 0.0) / (A * A), (A,), A,
                           ("compact",), A)

    @property
    def is_symmetric(self) -> bool:
        return True

    @property
    def support(self):
        return (-self.A, self.A)

    def avg_dist(self) -> float:
        return self.A / 3.0

    def to_dict(self):
        return {"family": self.family, "A": self.A}


@dataclass(frozen=True)
class PointMass(TargetDistribution):
    a: float
    family: ClassVar[str] = "point"

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise ParameterError("point mass location must be finite")

    def half(self, side: int) -> HalfMeasure:
        atoms = ((abs(self.a), 1.0),) if self.a * side > 0 else ()
        t = abs(self.a)
        return HalfMeasure(side, atoms, 0.0, None, (), t, ("compact",), max(t, 1e-300))

    @property
    def atom_at_zero(self) -> float:
        return 1.0 if self.a == 0 else 0.0

    @property
    def is_symmetric(self) -> bool:
        return self.a == 0

    @property
    def support(self):
        return (self.a, self.a)

    def to_dict(self):
        return {"family": self.family, "a": self.a}


def _heavier_tail(t1: tuple, t2: tuple) -> tuple:
    order = {"compact": 0, "exp": 1, "power": 2}
    if order[t1[0]] != order[t2[0]]:
        return t1 if order[t1[0]] > order[t2[0]] else t2
    if t1[0] == "exp":
        return t1 if t1[1] <= t2[1] else t2
    if t1[0] == "power":
        return t1 if t1[1] <= t2[1] else t2
    return t1


@dataclass(frozen=True)
class Mixture(TargetDistribution):
    weights: tuple[float, ...]
    components: tuple[TargetDistribution, ...]
    family: ClassVar[str] = "mixture"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.weights) != len(self.components) or not self.weights:
            raise ParameterError("mixture needs one weight per component")
        if any(w < 0 for w in self.weights):
            raise ParameterError("mixture weights must be >= 0")
        if abs(sum(self.weights) - 1.0) > MASS_TOL:
            raise ParameterError(f"mixture weights sum to {sum(self.weights)}, not 1")

    def half(self, side: int) -> HalfMeasure:
        parts = [(w, c.half(side)) for w, c in zip(self.weights, self.components) if w > 0]
        atoms = tuple((p, w * aw) for w, h in parts for p, aw in h.atoms)
        conts = [(w, h) for w, h in parts if h.density is not None and h.cont_weight > 0]
        cont = sum(w * h.cont_weight for w, h in conts)
        density = None
        if conts:
            def density(t, conts=conts):
                return sum(w * h.density(t) for w, h in conts)
        breaks = tuple(sorted({b for _, h in parts for b in h.breaks}))
        t_hi = max((h.t_hi for _, h in parts if h.mass > 0), default=0.0)
        tail: tuple = ("compact",)
        for _, h in parts:
            if h.mass > 0:
                tail = _heavier_tail(tail, h.tail)
        scale = max((h.scale for _, h in parts if h.mass > 0), default=1.0)
        return HalfMeasure(side, atoms, cont, density, breaks, t_hi, tail, scale)

    @property
    def atom_at_zero(self) -> float:
        return sum(w * c.atom_at_zero for w, c in zip(self.weights, self.components))

    @property
    def support(self):
        lo = min(c.support[0] for w, c in zip(self.weights, self.components) if w > 0)
        hi = max(c.support[1] for w, c in zip(self.weights, self.components) if w > 0)
        return (lo, hi)

    def to_dict(self):
        return {"family": self.family, "weights": list(self.weights),
                "components": [c.to_dict() for c in self.components]}


@dataclass(frozen=True)
class TabulatedDensity(TargetDistribution):
    """Piecewise-linear density on a grid, optionally with power-law tails.

    With ``tail_index = p0`` the density continues beyond each grid end as
    rho(edge) * (|x|/|edge|)^-(p0+1), so moments of order < p0 are finite.
    The table is rescaled to unit mass; ``norm_factor`` records the
    rescaling.
    """

    grid: tuple[float, ...]
    density: tuple[float, ...]
    tail_index: float | None = None
    norm_factor: float = field(default=1.0, compare=False)
    family: ClassVar[str] = "tabulated"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if g.ndim != 1 or g.size < 2 or d.shape != g.shape:
            raise ParameterError("tabulated density needs matching 1-D grid and values")
        if np.any(np.diff(g) <= 0):
            raise ParameterError("tabulated density grid must be strictly increasing")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ParameterError("density values must be finite and >= 0")
        if self.tail_index is not None:
            if not self.tail_index > 0:
                raise ParameterError("tail_index must be > 0")
            if g[0] >= 0 or g[-1] <= 0:
                raise ParameterError("power tails need a grid straddling the origin")
        mass = float(trapezoid(d, g))
        if self.tail_index is not None:
            mass += (d[0] * abs(g[0]) + d[-1] * abs(g[-1])) / self.tail_index
        if not mass > 0:
            raise ParameterError("density has zero mass")
        object.__setattr__(self, "grid", tuple(float(t) for t in g))
        object.__setattr__(self, "density", tuple(float(t) / mass for t in d))
        object.__setattr__(self, "norm_factor", 1.0 / mass)

    def _rho(self, x):
        g = np.asarray(self.grid)
        d = np.asarray(self.density)
        x = np.asarray(x, dtype=float)
        out = np.interp(x, g, d, left=0.0, right=0.0)
        if self.tail_index is not None:
            q = -(self.tail_index + 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(x < g[0], d[0] * np.power(np.abs(x / g[0]), q), out)
                out = np.where(x > g[-1], d[-1] * np.power(np.abs(x / g[-1]), q), out)
        return out

    def half(self, side: int) -> HalfMeasure:
        g = np.asarray(self.grid)
        if side > 0:
            pts = g[g > 0]
            t_hi = float(g[-1]) if self.tail_index is None else math.inf
        else:
            pts = -g[g < 0][::-1]
            t_hi = float(-g[0]) if self.tail_index is None else math.inf
        if pts.size == 0 and self.tail_index is None:
            return HalfMeasure(side, (), 0.0, None, (), 0.0, ("compact",), 1.0)
        rho = self._rho
        dens = (lambda t: rho(side * np.asarray(t, dtype=float)))
        # mass by exact trapezoid on the grid plus analytic tails
        x = np.concatenate([[0.0], pts])
        vals = dens(x)
        mass = float(trapezoid(vals, x))
        if self.tail_index is not None and pts.size:
            mass += vals[-1] * x[-1] / self.tail_index
        tail = ("compact",) if self.tail_index is None else ("power", float(self.tail_index))
        scale = float(pts[-1]) if pts.size else 1.0
        return HalfMeasure(side, (), mass, dens, tuple(float(p) for p in pts), t_hi, tail, scale)

    @property
    def is_symmetric(self) -> bool:
        g = np.asarray(self.grid)
        return bool(np.array_equal(g, -g[::-1]) and np.array_equal(self.density, self.density[::-1]))

    @property
    def support(self):
        if self.tail_index is not None:
            return (-math.inf, math.inf)
        return (self.grid[0], self.grid[-1])

    def to_dict(self):
        d: dict[str, Any] = {"family": self.family, "grid": list(self.grid),
                             "density": list(self.density)}
        if self.tail_index is not None:
            d["tail_index"] = self.tail_index
        return d


def distribution_split(mu: TargetDistribution) -> tuple[float, HalfMeasure, HalfMeasure]:
    """Split mu into (p, mu_plus, mu_minus) with p the mass of (0, inf)."""
    if mu.atom_at_zero > 0:
        raise AtomAtOrigin("target law has an atom at the origin")
    plus = mu.half(1)
    minus = mu.half(-1)
    p = plus.mass
    q = minus.mass
    if p <= 0 or q <= 0:
        raise OneSided("target law charges only one half-line")
    total = p + q
    return p / total, plus.normalized(), minus.normalized()


# ---------------------------------------------------------------- supports


@dataclass(frozen=True)
class FullLine:
    kind: ClassVar[str] = "full"

    def contains(self, a: float) -> bool:
        return math.isfinite(a)

    def to_dict(self):
        return {"kind": "full"}


@dataclass(frozen=True)
class Interval:
    L1: float
    L2: float
    kind: ClassVar[str] = "interval"

    def __post_init__(self):
        for name in ("L1", "L2"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be > 0, got {v}")

    @property
    def symmetric(self) -> bool:
        return self.L1 == self.L2

    def contains(self, a: float) -> bool:
        return -self.L1 <= a <= self.L2

    def to_dict(self):
        return {"kind": "interval", "L1": self.L1, "L2": self.L2}


Support = FullLine | Interval


# ---------------------------------------------------------------- parsing


RATE_ALIASES = {
    "constant": "constant", "const": "constant",
    "powerlaw": "powerlaw", "power": "powerlaw", "powlaw": "powerlaw",
    "quad": "quad", "quaddecay": "quad", "quad_decay_poly": "quad", "quaddecaypoly": "quad",
    "stretched": "stretched", "stretchedexp": "stretched", "stretched_exp_harmonic": "stretched",
    "tabulated": "tabulated",
    "inverse_square": "inverse_square", "invsq": "inverse_square", "powlawbound": "inverse_square",
}
TARGET_ALIASES = {
    "exp2": "exp2", "two_sided_exponential": "exp2", "laplace": "exp2",
    "uniform": "uniform", "triangular": "triangular", "tri": "triangular",
    "point": "point", "pointmass": "point", "mixture": "mixture", "tabulated": "tabulated",
}
_KEY_ALIASES = {"lambda": "lam", "γ": "gamma", "λ": "lam", "beta": "beta"}


def _num(v: Any, key: str) -> float:
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{key}: expected a number, got {v!r}") from exc


def rate_from_dict(d: dict[str, Any], D: float | None = None) -> RateFunction:
    """Build a rate from its JSON form; family-level ``D`` defaults to the model's."""
    try:
        fam = RATE_ALIASES[str(d["family"]).lower()]
    except KeyError as exc:
        raise ParseError(f"unknown or missing rate family in {d!r}") from exc
    p = {_KEY_ALIASES.get(k, k): v for k, v in d.items() if k != "family"}

    def get(key, default=None):
        if key in p:
            return _num(p[key], key)
        if default is not None:
            return default
        raise ParseError(f"rate family {fam!r} needs {key!r}")

    dd = D if D is not None else None
    if fam == "constant":
        return Constant(get("r"))
    if fam == "powerlaw":
        return PowerLaw(get("c"), get("gamma"), get("l"))
    if fam == "inverse_square":
        if dd is None and "D" not in p:
            raise ParseError("inverse_square needs D")
        return inverse_square(get("lam", 1.0), get("gamma", 1.0), get("D", dd))
    if fam == "quad":
        if dd is None and "D" not in p:
            raise ParseError("quad needs D")
        return QuadDecayPoly(get("m"), get("gamma"), get("D", dd))
    if fam == "stretched":
        if dd is None and "D" not in p:
            raise ParseError("stretched needs D")
        return StretchedExpHarmonic(get("lam"), get("gamma"), get("l"), get("D", dd))
    grid = p.get("grid")
    values = p.get("values")
    if grid is None or values is None:
        raise ParseError("tabulated rate needs 'grid' and 'values'")
    return Tabulated(tuple(grid), tuple(values),
                     tuple(p["tail_left"]) if p.get("tail_left") is not None else None,
                     tuple(p["tail_right"]) if p.get("tail_right") is not None else None)


def target_from_dict(d: dict[str, Any]) -> TargetDistribution:
    try:
        fam = TARGET_ALIASES[str(d["family"]).lower()]
    except KeyError as exc:
        raise ParseError(f"unknown or missing target family in {d!r}") from exc
    p = {_KEY_ALIASES.get(k, k): v for k, v in d.items() if k != "family"}

    def get(key):
        if key not in p:
            raise ParseError(f"target family {fam!r} needs {key!r}")
        return _num(p[key], key)

    if fam == "exp2":
        return TwoSidedExponential(get("beta"))
    if fam == "uniform":
        return UniformInterval(get("A"))
    if fam == "triangular":
        return TriangularInterval(get("A"))
    if fam == "point":
        return PointMass(get("a"))
    if fam == "mixture":
        comps = p.get("components")
        weights = p.get("weights")
        if not isinstance(comps, list) or not isinstance(weights, list):
            raise ParseError("mixture needs 'weights' and 'components' lists")
        return Mixture(tuple(_num(w, "weights") for w in weights),
                       tuple(target_from_dict(c) for c in comps))
    if "grid" not in p or "density" not in p:
        raise ParseError("tabulated density needs 'grid' and 'density'")
    ti = p.get("tail_index")
    return TabulatedDensity(tuple(p["grid"]), tuple(p["density"]),
                            None if ti is None else _num(ti, "tail_index"))


def support_from_dict(d: dict[str, Any] | None) -> FullLine | Interval:
    if not d:
        return FullLine()
    kind = str(d.get("kind", "full")).lower()
    if kind == "full":
        return FullLine()
    if kind != "interval":
        raise ParseError(f"unknown support kind {kind!r}")
    if "A" in d:
        A = _num(d["A"], "A")
        return Interval(A, A)
    if "L1" not in d or "L2" not in d:
        raise ParseError("interval support needs L1 and L2 (or A)")
    return Interval(_num(d["L1"], "L1"), _num(d["L2"], "L2"))


def _mini(text: str) -> tuple[str, dict[str, str], list[str]]:
    """Split ``family:key=val,...`` into its pieces; bare values are positional."""
    text = text.strip()
    if not text:
        raise ParseError("empty specification")
    fam, _, rest = text.partition(":")
    kv: dict[str, str] = {}
    positional: list[str] = []
    for part in filter(None, (s.strip() for s in rest.split(","))):
        if "=" in part:
            k, v = part.split("=", 1)
            kv[k.strip()] = v.strip()
        else:
            positional.append(part)
    return fam.strip().lower(), kv, positional


_POSITIONAL = {
    "constant": ["r"], "powerlaw": ["c", "gamma", "l"], "quad": ["m", "gamma"],
    "stretched": ["lambda", "gamma", "l"], "inverse_square": ["lambda", "gamma"],
    "exp2": ["beta"], "uniform": ["A"], "triangular": ["A"], "point": ["a"],
}


def _fill_positional(fam: str, kv: dict[str, str], positional: list[str]) -> dict[str, Any]:
    names = _POSITIONAL.get(fam, [])
    if len(positional) > len(names):
        raise ParseError(f"too many positional values for {fam!r}")
    out: dict[str, Any] = {"family": fam}
    out.update(zip(names, positional))
    out.update(kv)
    return out


def parse_rate(text: str, D: float | None = None) -> RateFunction:
    """Parse e.g. ``constant:2`` or ``quad:m=3,gamma=1``."""
    fam, kv, pos = _mini(text)
    if fam not in RATE_ALIASES:
        raise ParseError(f"unknown rate family {fam!r}")
    fam = RATE_ALIASES[fam]
    if fam == "tabulated":
        raise ParseError("tabulated rates must come from a model file")
    return rate_from_dict(_fill_positional(fam, kv, pos), D)


def parse_target(text: str) -> TargetDistribution:
    """Parse e.g. ``exp2:beta=1`` or ``triangular:A=1``."""
    fam, kv, pos = _mini(text)
    if fam not in TARGET_ALIASES:
        raise ParseError(f"unknown target family {fam!r}")
    fam = TARGET_ALIASES[fam]
    if fam in ("mixture", "tabulated"):
        raise ParseError(f"{fam} targets must come from a model file")
    return target_from_dict(_fill_positional(fam, kv, pos))


def parse_support(text: str) -> FullLine | Interval:
    """Parse ``full``, ``interval:A=1`` or ``interval:L1=1,L2=2``."""
    fam, kv, pos = _mini(text)
    if fam == "full":
        return FullLine()
    if fam != "interval":
        raise ParseError(f"unknown support {fam!r}")
    d: dict[str, Any] = {"kind": "interval", **kv}
    if pos:
        if len(pos) == 1:
            d["A"] = pos[0]
        elif len(pos) == 2:
            d["L1"], d["L2"] = pos
        else:
            raise ParseError("interval takes A or L1,L2")
    return support_from_dict(d)


@dataclass(frozen=True)
class ModelSpec:
    """A complete model: D, a rate, an optional target, and a support."""

    D: float
    rate: RateFunction | None = None
    target: TargetDistribution | None = None
    support: FullLine | Interval = field(default_factory=FullLine)

    def __post_init__(self):
        _check_D(self.D)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"D": self.D}
        if self.rate is not None:
            d["rate"] = self.rate.to_dict()
        if self.target is not None:
            d["target"] = self.target.to_dict()
        d["support"] = self.support.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ModelSpec":
        if not isinstance(d, dict) or "D" not in d:
            raise ParseError("model needs a numeric 'D'")
        D = _num(d["D"], "D")
        if not D > 0:
            raise ParseError(f"D must be positive, got {D}")
        rate = rate_from_dict(d["rate"], D) if d.get("rate") is not None else None
        target = target_from_dict(d["target"]) if d.get("target") is not None else None
        return cls(D, rate, target, support_from_dict(d.get("support")))

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


__all__ = [
    "Constant", "FullLine", "HalfMeasure", "Interval", "KernelSpec", "Mixture", "ModelParams",
    "ModelSpec", "PointMass", "PowerLaw", "QuadDecayPoly", "RateFunction", "StretchedExpHarmonic",
    "Tabulated", "TabulatedDensity", "TailLaw", "TargetDistribution", "TriangularInterval",
    "TwoSidedExponential", "UniformInterval", "distribution_split", "inverse_square",
    "parse_rate", "parse_support", "parse_target", "rate_eval", "stretched_gamma_floor",
]
