"""Cumulant generating functions of N_t and L_t.

Two layers:

* exact finite-horizon values ``(1/t) log E[exp(theta Y_t)]`` from the
  backward recursions obtained by conditioning on the past one step at a
  time (``f_s`` for counts, ``g_s`` for mark sums);
* the limits ``Gamma(theta) = nu (x* - 1)`` where ``x*`` is the minimal root
  of ``x = exp(theta) M(h (x - 1))`` (counts) or ``x = M(theta + h (x - 1))``
  (mark sums), ``h = ||alpha||_1``.  Both maps are convex in ``x``; the root
  ceases to exist past the tangency point ``(theta_c, x_c)``, where
  ``Gamma`` jumps to ``+inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ThetaAboveCritical, ThetaAtCritical, TiltTooLarge
from .process import ProcessParams

__all__ = [
    "CgfSolution",
    "CriticalPoint",
    "finite_time_cgf_n",
    "finite_time_cgf_l",
    "critical_point_n",
    "critical_point_l",
    "gamma_n",
    "gamma_l",
    "gamma_prime_n",
    "gamma_prime_l",
]

MAX_BISECT = 200
THETA_SLACK = 1e-12
ROOT_RTOL = 1e-12
CRIT_TOL = 1e-10
DENOM_FLOOR = 1e-14


@dataclass(frozen=True)
class CriticalPoint:
    """Tangency point of the fixed-point equation.

    ``theta_c = inf`` for the count CGF of a pure Poisson process (h = 0).
    ``residuals`` are relative errors of the two defining equations.
    """

    theta_c: float
    x_c: float
    which: str
    residuals: tuple[float, float] = (0.0, 0.0)
    degenerate: bool = False
    domain_exhausted: bool = False


@dataclass(frozen=True)
class CgfSolution:
    theta: float
    x_star: float
    gamma: float
    gamma_prime: float
    iterations: int
    residual: float


def bisect_sign(fn, lo: float, hi: float, max_steps: int = MAX_BISECT) -> tuple[float, float, int]:
    """Shrink ``[lo, hi]`` with fn(lo) < 0 <= fn(hi) down to adjacent floats."""
    steps = 0
    while steps < max_steps:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) < 0:
            lo = mid
        else:
            hi = mid
        steps += 1
    return lo, hi, steps


def _upper_bracket(fn, start: float, edge: float, origin: float) -> tuple[float, bool]:
    """Find hi with fn(hi) >= 0 to the right of ``origin``.

    Expands geometrically when ``edge`` is infinite, otherwise walks toward
    the domain edge by halving the remaining gap.  Returns (hi, found).
    """
    if math.isinf(edge):
        hi = start
        for _ in range(2000):
            if fn(hi) >= 0:
                return hi, True
            hi = origin + 2.0 * (hi - origin)
        return hi, False
    hi = origin
    for k in range(1, 200):
        cand = origin + (edge - origin) * (1.0 - 0.5**k)
        if cand <= hi or cand >= edge:
            break
        hi = cand
        if fn(hi) >= 0:
            return hi, True
    return hi, False


# ---------------------------------------------------------------------------
# finite horizon


def _weights(p: ProcessParams) -> np.ndarray:
    return np.asarray(p.kernel.weights, dtype=np.float64)


def _lagged(w: np.ndarray, hist: np.ndarray, s: int) -> float:
    """sum_{u=1}^{min(s,K)} w[u-1] * hist[s-u]."""
    m = min(s, w.shape[0])
    if m == 0:
        return 0.0
    return float(np.dot(w[:m], hist[s - m : s][::-1]))


def finite_time_cgf_n(p: ProcessParams, theta: float, t: int) -> float:
    """(1/t) log E[exp(theta N_t)], exact up to rounding.

    ``E[exp(theta N_t)] = exp(nu sum_{s<t} (exp f_s - 1))`` with ``f_0 = theta``
    and ``f_s = theta + log M(sum_u alpha(u) (exp f_{s-u} - 1))``.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    w = _weights(p)
    em = np.empty(t)  # exp(f_s) - 1
    for s in range(t):
        arg = _lagged(w, em, s)
        try:
            f = theta + (p.marks.log_mgf(arg) if s else 0.0)
            em[s] = math.expm1(f)
        except DomainError as exc:
            raise TiltTooLarge(f"theta={theta!r}: recursion step {s} left the MGF domain ({exc})") from None
        except OverflowError:
            raise TiltTooLarge(f"theta={theta!r}: recursion overflowed at step {s}") from None
    return p.nu * math.fsum(em) / t


def finite_time_cgf_l(p: ProcessParams, theta: float, t: int) -> float:
    """(1/t) log E[exp(theta L_t)] with ``g_s = M(theta + sum_u alpha(u)(g_{s-u} - 1))``."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    w = _weights(p)
    gm = np.empty(t)  # g_s - 1
    for s in range(t):
        arg = theta + _lagged(w, gm, s)
        try:
            gm[s] = math.expm1(p.marks.log_mgf(arg))
        except DomainError as exc:
            raise TiltTooLarge(f"theta={theta!r}: recursion step {s} left the MGF domain ({exc})") from None
        except OverflowError:
            raise TiltTooLarge(f"theta={theta!r}: recursion overflowed at step {s}") from None
    return p.nu * math.fsum(gm) / t


# ---------------------------------------------------------------------------
# critical points


@lru_cache(maxsize=256)
def critical_point_n(p: ProcessParams) -> CriticalPoint:
    """Solve x h M'(h(x-1)) = M(h(x-1)) on x > 1; theta_c = -log(h M'(h(x_c-1)))."""
    h = p.h
    marks = p.marks
    if h == 0.0:
        return CriticalPoint(math.inf, math.inf, "count", degenerate=True)

    # same sign as x h M'(u) - M(u), without overflow
    def psi(x):
        return h * x * marks.tilted_mean(h * (x - 1.0)) - 1.0

    edge = 1.0 + marks.mgf_domain_sup / h
    hi, found = _upper_bracket(psi, 2.0, edge, 1.0)
    x_c = bisect_sign(psi, 1.0, hi)[1] if found else hi
    u = h * (x_c - 1.0)
    theta_c = -math.log(h * marks.mgf_d1(u))
    r1 = abs(psi(x_c))
    r2 = abs(math.exp(theta_c + marks.log_mgf(u)) - x_c) / max(1.0, x_c)
    return CriticalPoint(theta_c, x_c, "count", (r1, r2), domain_exhausted=not found)


@lru_cache(maxsize=256)
def critical_point_l(p: ProcessParams) -> CriticalPoint:
    """Tangency of x = M(theta + h(x-1)).

    With ``u = theta + h(x-1)`` the two conditions are ``h M'(u) = 1`` and
    ``x = M(u)``; ``h M'`` is increasing, so ``u_c`` is a single monotone root
    and ``theta_c = u_c - h (M(u_c) - 1)``.
    """
    h = p.h
    marks = p.marks
    if h == 0.0:
        sup = marks.mgf_domain_sup
        return CriticalPoint(sup, math.inf, "mark_sum", degenerate=True)

    def psi(u):
        return h * marks.mgf_d1(u) - 1.0

    sup = marks.mgf_domain_sup
    hi, found = _upper_bracket(psi, 1.0, sup, 0.0)
    u_c = bisect_sign(psi, 0.0, hi)[1] if found else hi
    x_c = marks.mgf(u_c)
    theta_c = u_c - h * (x_c - 1.0)
    u = theta_c + h * (x_c - 1.0)
    r1 = abs(h * marks.mgf_d1(u) - 1.0)
    r2 = abs(marks.mgf(u) - x_c) / max(1.0, x_c)
    return CriticalPoint(theta_c, x_c, "mark_sum", (r1, r2), domain_exhausted=not found)


# ---------------------------------------------------------------------------
# limiting CGFs


def _check_theta(theta: float, cp: CriticalPoint, label: str) -> None:
    if theta > cp.theta_c + THETA_SLACK or (cp.degenerate and theta >= cp.theta_c):
        raise ThetaAboveCritical(
            f"{label}: theta={theta!r} exceeds theta_c={cp.theta_c!r}; the limiting CGF is +inf"
        )


def _minimal_root(gap, x_hi: float) -> tuple[float, int]:
    """Smallest root of a convex ``gap`` with gap(0) > 0 >= gap(x_hi)."""
    if gap(x_hi) >= 0:
        return x_hi, 0
    # bisect_sign wants negative on the left
    lo, hi, steps = bisect_sign(lambda x: -gap(x), 0.0, x_hi)
    return (lo if abs(gap(lo)) <= abs(gap(hi)) else hi), steps


def _solution(x, theta, nu, fmap, deriv_fn, steps) -> CgfSolution:
    try:
        gp = deriv_fn(x)
    except ThetaAtCritical:
        gp = math.inf
    return CgfSolution(theta, x, nu * (x - 1.0), gp, steps, abs(x - fmap(x)))


def _count_map(p: ProcessParams, theta: float):
    h = p.h
    marks = p.marks
    return lambda x: math.exp(theta + marks.log_mgf(h * (x - 1.0)))


def _count_slope(p, theta, x):
    """Gamma'(theta) = nu x / (1 - e^theta h M'(h(x-1)))."""
    if p.h == 0.0:
        return p.nu * x
    denom = 1.0 - math.exp(theta) * p.h * p.marks.mgf_d1(p.h * (x - 1.0))
    if denom <= DENOM_FLOOR:
        raise ThetaAtCritical(f"theta={theta!r}: slope of Gamma diverges (denominator {denom!r})")
    return p.nu * x / denom


def _mark_slope(p, theta, x):
    """Gamma_L'(theta) = nu M'(u) / (1 - h M'(u)), u = theta + h(x-1)."""
    u = theta + p.h * (x - 1.0)
    d1 = p.marks.mgf_d1(u)
    denom = 1.0 - p.h * d1
    if denom <= DENOM_FLOOR:
        raise ThetaAtCritical(f"theta={theta!r}: slope of Gamma_L diverges (denominator {denom!r})")
    return p.nu * d1 / denom


def gamma_n(p: ProcessParams, theta: float, method: str = "bisect") -> CgfSolution:
    """Limiting CGF of N_t at ``theta``.

    ``method="iterate"`` runs the fixed-point iteration from ``exp(theta)``
    instead of bracketing; it mirrors the finite-horizon recursion and is kept
    as a cross-check (it slows down badly near theta_c).
    """
    theta = float(theta)
    cp = critical_point_n(p)
    _check_theta(theta, cp, "gamma_n")
    fmap = _count_map(p, theta)
    slope = lambda x: _count_slope(p, theta, x)  # noqa: E731
    if cp.degenerate:
        x = math.exp(theta)
        return CgfSolution(theta, x, p.nu * math.expm1(theta), p.nu * x, 0, 0.0)
    if method == "iterate":
        x, steps = _iterate(fmap, math.exp(theta), cp.x_c)
    elif method == "bisect":
        if theta >= cp.theta_c:
            x, steps = cp.x_c, 0
        else:
            x, steps = _minimal_root(lambda v: fmap(v) - v, cp.x_c)
            x = _newton_polish(x, fmap, lambda v: math.exp(theta) * p.h * p.marks.mgf_d1(p.h * (v - 1.0)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return _solution(x, theta, p.nu, fmap, slope, steps)


def gamma_l(p: ProcessParams, theta: float, method: str = "bisect") -> CgfSolution:
    """Limiting CGF of L_t at ``theta``."""
    theta = float(theta)
    cp = critical_point_l(p)
    _check_theta(theta, cp, "gamma_l")
    h = p.h
    marks = p.marks
    fmap = lambda x: marks.mgf(theta + h * (x - 1.0))  # noqa: E731
    slope = lambda x: _mark_slope(p, theta, x)  # noqa: E731
    if cp.degenerate:
        x = marks.mgf(theta)
        return _solution(x, theta, p.nu, fmap, slope, 0)
    if method == "iterate":
        x, steps = _iterate(fmap, marks.mgf(theta), cp.x_c)
    elif method == "bisect":
        if theta >= cp.theta_c:
            x, steps = cp.x_c, 0
        else:
            x, steps = _minimal_root(lambda v: fmap(v) - v, cp.x_c)
            x = _newton_polish(x, fmap, lambda v: h * marks.mgf_d1(theta + h * (v - 1.0)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return _solution(x, theta, p.nu, fmap, slope, steps)


def _newton_polish(x, fmap, fmap_d1, steps: int = 3):
    best, best_res = x, abs(fmap(x) - x)
    for _ in range(steps):
        denom = fmap_d1(x) - 1.0
        if denom == 0.0:
            break
        x = x - (fmap(x) - x) / denom
        if not 0.0 <= x:
            break
        res = abs(fmap(x) - x)
        if res < best_res:
            best, best_res = x, res
        else:
            break
    return best


def _iterate(fmap, x0: float, x_cap: float, max_iter: int = 1_000_000) -> tuple[float, int]:
    x = x0
    for k in range(1, max_iter + 1):
        nxt = fmap(min(x, x_cap))
        if abs(nxt - x) <= 1e-15 * max(1.0, x):
            return nxt, k
        x = nxt
    return x, max_iter


def gamma_prime_n(p: ProcessParams, theta: float) -> float:
    sol = gamma_n(p, theta)
    return _count_slope(p, theta, sol.x_star)


def gamma_prime_l(p: ProcessParams, theta: float) -> float:
    sol = gamma_l(p, theta)
    return _mark_slope(p, theta, sol.x_star)
