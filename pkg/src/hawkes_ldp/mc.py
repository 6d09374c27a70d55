"""Monte Carlo estimates of LLN/CLT statistics, empirical CGFs and tail probabilities.

Paths are simulated in fixed blocks of ``BLOCK`` consecutive indices; path
``i`` always uses the random stream ``(master_seed, i)`` and writes its
terminal values at position ``i``.  Sums are taken with a fixed pairwise tree
over the path index, so every estimate is a deterministic function of the
inputs whatever the number of worker threads.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from . import _engine
from .errors import EstimatorDegenerate, ResourceError
from .moments import lln_mean_l, lln_mean_n
from .process import ProcessParams, _as_u64

__all__ = [
    "McSummary",
    "CgfEstimate",
    "TailEstimate",
    "simulate_terminal",
    "estimate_limits",
    "empirical_cgf",
    "tail_probability",
    "pairwise_sum",
    "resolve_workers",
]

BLOCK = 4096
THREADS_ENV = "HAWKES_LDP_THREADS"
_Z95 = NormalDist().inv_cdf(0.975)


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def pairwise_sum(values) -> float:
    """Sum along a fixed binary tree determined only by ``len(values)``."""
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        return 0.0
    while a.size > 1:
        if a.size % 2:
            a = np.append(a, 0.0)
        a = a[0::2] + a[1::2]
    return float(a[0])


def _mean(a) -> float:
    return pairwise_sum(a) / len(a)


def _sample_var(a) -> float:
    m = _mean(a)
    return pairwise_sum((np.asarray(a) - m) ** 2) / (len(a) - 1)


def simulate_terminal(
    p: ProcessParams, horizon: int, n_paths: int, seed: int, workers: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Terminal values (N_t, L_t) of ``n_paths`` independent paths."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    kind, par, vals, cum = p.marks.packed()
    w = np.asarray(p.kernel.weights, dtype=np.float64)
    out_n = np.zeros(n_paths, dtype=np.int64)
    out_l = np.zeros(n_paths)
    seed64 = _as_u64(seed)
    blocks = [(s, min(s + BLOCK, n_paths)) for s in range(0, n_paths, BLOCK)]

    def run(block):
        start, stop = block
        return _engine.simulate_finals(
            p.nu, w, kind, par, vals, cum, horizon, seed64, start, stop, out_n, out_l
        )

    n_workers = min(resolve_workers(workers), max(len(blocks), 1))
    if n_workers == 1:
        statuses = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            statuses = list(pool.map(run, blocks))
    if any(s != _engine.STATUS_OK for s in statuses):
        raise ResourceError(
            f"intensity exceeded {_engine.LAMBDA_CAP:g} during simulation "
            f"(stability margin {p.stability_margin!r})"
        )
    return out_n, out_l


@dataclass(frozen=True)
class CgfEstimate:
    theta: float
    which: str
    estimate: float
    std_err: float


@dataclass(frozen=True)
class TailEstimate:
    level: float
    which: str
    hits: int
    p_hat: float
    ci_low: float
    ci_high: float
    implied_rate: float  # nan when zero_hits
    implied_rate_se: float
    zero_hits: bool


@dataclass
class McSummary:
    n_paths: int
    horizon: int
    master_seed: int
    mean_n_over_t: float
    mean_n_se: float
    var_n_clt_scaled: float
    var_n_se: float
    mean_l_over_t: float
    mean_l_se: float
    var_l_clt_scaled: float
    var_l_se: float
    empirical_cgf: list[CgfEstimate] = field(default_factory=list)
    tail_estimates: list[TailEstimate] = field(default_factory=list)


def _mean_stats(y: np.ndarray, t: int) -> tuple[float, float]:
    r = y / t
    return _mean(r), math.sqrt(_sample_var(r) / len(r))


def _var_stats(y: np.ndarray, mu: float, t: int) -> tuple[float, float]:
    d = (y - mu * t) / math.sqrt(t)
    s2 = _sample_var(d)
    c = d - _mean(d)
    m4 = _mean(c**4)
    return s2, math.sqrt(max(m4 - s2 * s2, 0.0) / len(d))


def _cgf_from_samples(y: np.ndarray, theta: float, t: int, which: str) -> CgfEstimate:
    if theta == 0.0:
        return CgfEstimate(theta, which, 0.0, 0.0)
    a = theta * np.asarray(y, dtype=np.float64)
    shift = float(a.max())
    wts = np.exp(a - shift)
    m = _mean(wts)
    if not (m > 0.0 and math.isfinite(m)):
        raise EstimatorDegenerate(f"theta={theta!r}: all exponential weights vanished")
    sd = math.sqrt(_sample_var(wts))
    est = (shift + math.log(m)) / t
    se = sd / (m * math.sqrt(len(wts))) / t
    return CgfEstimate(theta, which, est, se)


def wilson_interval(hits: int, n: int, z: float = _Z95) -> tuple[float, float]:
    p = hits / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _tail_from_samples(y: np.ndarray, level: float, t: int, which: str) -> TailEstimate:
    n = len(y)
    hits = int(np.count_nonzero(np.asarray(y) / t >= level))
    p_hat = hits / n
    lo, hi = wilson_interval(hits, n)
    if hits == 0:
        return TailEstimate(level, which, 0, 0.0, lo, hi, math.nan, math.nan, True)
    implied = -math.log(p_hat) / t
    implied_se = math.sqrt((1.0 - p_hat) / (n * p_hat)) / t
    return TailEstimate(level, which, hits, p_hat, lo, hi, implied, implied_se, False)


def _pick(which: str, n_arr, l_arr):
    if which == "n":
        return n_arr
    if which == "l":
        return l_arr
    raise ValueError(f"which must be 'n' or 'l', got {which!r}")


def estimate_limits(
    p: ProcessParams,
    horizon: int,
    n_paths: int,
    seed: int,
    thetas=(),
    levels=(),
    which=("n", "l"),
    workers: int | None = None,
) -> McSummary:
    """LLN/CLT statistics, plus empirical CGFs and upper tails on request."""
    if n_paths < 2:
        raise ValueError(f"n_paths must be >= 2, got {n_paths}")
    n_arr, l_arr = simulate_terminal(p, horizon, n_paths, seed, workers)
    n_f = n_arr.astype(np.float64)
    mn, mn_se = _mean_stats(n_f, horizon)
    ml, ml_se = _mean_stats(l_arr, horizon)
    vn, vn_se = _var_stats(n_f, lln_mean_n(p), horizon)
    vl, vl_se = _var_stats(l_arr, lln_mean_l(p), horizon)
    cgfs = [
        _cgf_from_samples(_pick(w, n_f, l_arr), float(th), horizon, w)
        for w in which
        for th in thetas
    ]
    tails = [
        _tail_from_samples(_pick(w, n_f, l_arr), float(a), horizon, w)
        for w in which
        for a in levels
    ]
    return McSummary(n_paths, horizon, int(seed), mn, mn_se, vn, vn_se, ml, ml_se, vl, vl_se, cgfs, tails)


def empirical_cgf(
    p: ProcessParams, theta: float, horizon: int, n_paths: int, seed: int, which: str = "n",
    workers: int | None = None,
) -> tuple[float, float]:
    """(1/t) log of the sample mean of exp(theta Y_t), with a delta-method SE."""
    if theta > 0:
        warnings.warn(
            f"theta={theta!r} > 0: exponential-moment estimates are heavy-tailed",
            RuntimeWarning,
            stacklevel=2,
        )
    n_arr, l_arr = simulate_terminal(p, horizon, n_paths, seed, workers)
    est = _cgf_from_samples(_pick(which, n_arr.astype(np.float64), l_arr), float(theta), horizon, which)
    return est.estimate, est.std_err


def tail_probability(
    p: ProcessParams, level_a: float, horizon: int, n_paths: int, seed: int, which: str = "n",
    workers: int | None = None,
) -> TailEstimate:
    """Fraction of paths with Y_t / t >= level_a; Wilson 95% interval."""
    n_arr, l_arr = simulate_terminal(p, horizon, n_paths, seed, workers)
    return _tail_from_samples(_pick(which, n_arr, l_arr), float(level_a), horizon, which)
