"""Discrete-time marked Hawkes process: simulation, limit constants and large deviations."""
from .cgf import (
    CgfSolution,
    CriticalPoint,
    critical_point_l,
    critical_point_n,
    finite_time_cgf_l,
    finite_time_cgf_n,
    gamma_l,
    gamma_n,
    gamma_prime_l,
    gamma_prime_n,
)
from .errors import *  # noqa: F401,F403
from .kernel import ExcitationKernel, clt_tail_statistic, stability_margin
from .marks import Constant, DiscreteFinite, ExponentialRate, GammaShapeScale, MarkDistribution
from .mc import McSummary, empirical_cgf, estimate_limits, tail_probability
from .moments import clt_var_l, clt_var_n, finite_horizon_moments, lln_mean_l, lln_mean_n
from .process import PathRecord, ProcessParams, replay_intensity, simulate
from .rate import RatePoint, rate_curve, rate_l, rate_n

__version__ = "0.1.0"
