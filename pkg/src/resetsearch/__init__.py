"""Expected search times for Brownian motion with position-dependent resetting."""
from __future__ import annotations

from ._kernels import BACKEND
from .analysis import (Affine, Exponential, GrowthFit, HyperbolicCosine, MollifiedPolynomial,
                       ObjectiveValue, OptimizationReport, StretchedExponential, estimate_growth,
                       expected_search_time, optimize_constant_rate, optimize_family,
                       sandwich_bounds, variational_objective)
from .errors import *  # noqa: F401,F403
from .harmonic import (PHI1, PHI2, PHI3, CumulativeIntegrals, HarmonicSolution,
                       build_phi_closed_form, build_phi_riccati, cumulative_integrals,
                       solve_phi)
from .hitting import (Finiteness, HittingComponents, HittingTimeResult, classify_finiteness,
                      expected_hitting, expected_hitting_constant, expected_hitting_general,
                      expected_hitting_interval, expected_hitting_many, hitting_components)
from .model import (Constant, FullLine, Interval, Mixture, ModelSpec, PointMass, PowerLaw,
                    QuadDecayPoly, StretchedExpHarmonic, Tabulated, TabulatedDensity,
                    TriangularInterval, TwoSidedExponential, UniformInterval, inverse_square,
                    parse_rate, parse_support, parse_target)
from .montecarlo import SimConfig, SimEstimate, simulate_hitting, survival_curve

__version__ = "0.1.0"
