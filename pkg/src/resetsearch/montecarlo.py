"""Monte Carlo oracle for the resetting diffusion.

Paths follow an Euler scheme with step sqrt(D dt) Z. The reset clock
accumulates r(X) dt and fires when the total passes an Exp(1) threshold,
which has the same law as an independent Bernoulli(1 - exp(-r dt)) trial
per step. Crossings of the target inside a step are caught with the
Brownian-bridge probability exp(-2 (a - x)(a - x') / (D dt)).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from ._kernels import ZIG_FI, ZIG_KI, ZIG_WI, get_backend, thread_count
from .errors import ExcessCensoring, ExcessCensoringWarning, ParameterError
from .model import FullLine, Interval, RateFunction

CENSOR_LIMIT = 0.05
_CHUNK = 50_000


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    n_paths: int = 200_000
    t_max: float = 1000.0
    seed: int = 0
    bridge_correction: bool = True
    strict: bool = False
    backend: str | None = None

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParameterError("dt must be > 0")
        if self.n_paths < 1:
            raise ParameterError("n_paths must be >= 1")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ParameterError("t_max must be > 0")
        if self.seed < 0 or self.seed >= 2**64:
            raise ParameterError("seed must fit in 64 unsigned bits")

    @property
    def max_steps(self) -> int:
        return max(1, int(round(self.t_max / self.dt)))


@dataclass(frozen=True)
class SimEstimate:
    """Sample mean of min(T_a, t_max) with its standard error.

    With censoring the mean is a lower bound; ``biased_low`` is set above
    the 5% threshold.
    """

    mean: float
    stderr: float
    censored_fraction: float
    n: int
    seed: int
    dt: float
    t_max: float

    @property
    def biased_low(self) -> bool:
        return self.censored_fraction > CENSOR_LIMIT

    def to_dict(self) -> dict:
        d = asdict(self)
        d["biased_low"] = self.biased_low
        return d


def hitting_samples(rate: RateFunction, D: float, a: float, support=None,
                    cfg: SimConfig = SimConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Per-path hitting times (censored paths report t_max) and censoring flags."""
    if not D > 0:
        raise ParameterError("D must be positive")
    if a == 0:
        raise ParameterError("target must differ from the start point")
    support = support or FullLine()
    interval = isinstance(support, Interval)
    if interval and not support.contains(a):
        raise ParameterError(f"target {a} outside the interval")
    if not interval and rate.identically_zero:
        warnings.warn("zero rate on the full line: every path will run to t_max",
                      ExcessCensoringWarning, stacklevel=2)
    L1 = support.L1 if interval else 0.0
    L2 = support.L2 if interval else 0.0
    spec = rate.kernel_spec
    kern = get_backend(cfg.backend)
    threads = thread_count()
    steps = np.empty(cfg.n_paths, dtype=np.int64)
    for start in range(0, cfg.n_paths, _CHUNK):
        n = min(_CHUNK, cfg.n_paths - start)
        steps[start:start + n] = kern.hitting_steps(
            spec.kind, spec.params, spec.knots, spec.coef, float(D), float(a), interval,
            float(L1), float(L2), float(cfg.dt), cfg.max_steps, cfg.bridge_correction,
            cfg.seed, start, n, ZIG_KI, ZIG_WI, ZIG_FI, threads)
    censored = steps < 0
    times = np.where(censored, cfg.t_max, steps * cfg.dt)
    return times, censored


def simulate_hitting(rate: RateFunction, D: float, a: float, support=None,
                     cfg: SimConfig = SimConfig()) -> SimEstimate:
    """Monte Carlo estimate of E_0 T_a."""
    times, censored = hitting_samples(rate, D, a, support, cfg)
    n = times.size
    mean = float(np.mean(times))
    stderr = float(np.std(times, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    est = SimEstimate(mean, stderr, float(np.mean(censored)), n, cfg.seed, cfg.dt, cfg.t_max)
    if est.biased_low:
        msg = (f"{est.censored_fraction:.1%} of paths reached t_max={cfg.t_max}; "
               "the mean is biased low")
        if cfg.strict:
            raise ExcessCensoring(msg, est)
        warnings.warn(msg, ExcessCensoringWarning, stacklevel=2)
    return est


def survival_curve(rate: RateFunction, D: float, a: float, support, cfg: SimConfig,
                   t_grid) -> np.ndarray:
    """Empirical P(T_a > t) on ``t_grid`` (all points must be <= t_max)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid > cfg.t_max) or np.any(t_grid < 0):
        raise ParameterError("survival grid must lie in [0, t_max]")
    times, censored = hitting_samples(rate, D, a, support, cfg)
    # censored paths survive every t <= t_max
    eff = np.where(censored, np.inf, times)
    srt = np.sort(eff)
    return 1.0 - np.searchsorted(srt, t_grid, side="right") / srt.size


__all__ = ["SimConfig", "SimEstimate", "hitting_samples", "simulate_hitting", "survival_curve"]
