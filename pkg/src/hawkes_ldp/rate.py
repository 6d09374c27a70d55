"""Rate functions I(x) = sup_{theta <= theta_c} {theta x - Gamma(theta)}.

The supremum is attained where Gamma'(theta) = x.  Rather than nesting a
root solve for Gamma inside a root solve for theta, the branch of minimal
roots is parametrized explicitly:

* counts: by the root ``r = x*`` in (0, x_c), with ``theta = log r - log M(h(r-1))``
  and ``Gamma' = nu r / (1 - r h M'(u)/M(u))``;
* mark sums: by the tilt ``u = theta + h(x*-1)`` in (-inf, u_c), with
  ``x* = M(u)``, ``theta = u - h(M(u)-1)`` and ``Gamma' = nu M'(u) / (1 - h M'(u))``.

Both parametrizations are increasing and map onto (0, inf) for Gamma', so
one monotone bisection per point suffices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .cgf import bisect_sign, critical_point_l, critical_point_n
from .process import ProcessParams

__all__ = ["RatePoint", "rate_n", "rate_l", "rate_curve"]


@dataclass(frozen=True)
class RatePoint:
    x: float
    rate: float  # math.inf encodes +inf
    argmax_theta: float | None
    which: str


class _CountBranch:
    which = "count"

    def __init__(self, p: ProcessParams):
        self.p = p
        self.cp = critical_point_n(p)
        self.lo, self.hi = 0.0, self.cp.x_c

    def theta(self, r):
        h = self.p.h
        return math.log(r) - (self.p.marks.log_mgf(h * (r - 1.0)) if h else 0.0)

    def gamma(self, r):
        return self.p.nu * (r - 1.0)

    def slope(self, r):
        if r <= 0.0:
            return 0.0
        h = self.p.h
        if h == 0.0:
            return self.p.nu * r
        if r >= self.cp.x_c:
            return math.inf
        denom = 1.0 - r * h * self.p.marks.tilted_mean(h * (r - 1.0))
        return self.p.nu * r / denom if denom > 0 else math.inf

    def bracket(self, x):
        lo, hi = self.lo, self.hi
        if math.isinf(hi):
            hi = max(1.0, 2.0 * lo)
            while self.slope(hi) < x:
                hi *= 2.0
        return lo, hi


class _MarkBranch:
    which = "mark_sum"

    def __init__(self, p: ProcessParams):
        self.p = p
        self.cp = critical_point_l(p)
        h = p.h
        if self.cp.degenerate:
            self.u_c = p.marks.mgf_domain_sup
        else:
            self.u_c = self.cp.theta_c + h * (self.cp.x_c - 1.0)
        self.lo, self.hi = -math.inf, self.u_c

    def theta(self, u):
        return u - self.p.h * math.expm1(self.p.marks.log_mgf(u))

    def gamma(self, u):
        return self.p.nu * math.expm1(self.p.marks.log_mgf(u))

    def slope(self, u):
        if u >= self.u_c:
            return math.inf
        d1 = self.p.marks.mgf_d1(u)
        denom = 1.0 - self.p.h * d1
        return self.p.nu * d1 / denom if denom > 0 else math.inf

    def bracket(self, x):
        lo, hi = self.lo, self.hi
        if math.isinf(lo):
            lo = -1.0 if math.isinf(hi) else min(-1.0, hi - 1.0)
            while self.slope(lo) >= x:
                lo *= 2.0
        if math.isinf(hi):
            hi = max(1.0, lo + 1.0)
            while self.slope(hi) < x:
                hi *= 2.0
        return lo, hi


def _point(branch, x: float) -> RatePoint:
    return _solve(branch, x)[0]


def _solve(branch, x: float):
    """(RatePoint, lower bracket for the next larger x or None)."""
    p = branch.p
    if x < 0:
        return RatePoint(x, math.inf, None, branch.which), None
    if x == 0:
        # theta -> -inf drives the minimal root to 0, so -Gamma -> nu
        return RatePoint(x, p.nu, None, branch.which), None
    lo, hi = branch.bracket(x)
    lo, hi, _ = bisect_sign(lambda v: branch.slope(v) - x, lo, hi, max_steps=2100)
    if math.isinf(branch.slope(hi)):
        r = lo
    else:
        r = lo if abs(branch.slope(lo) - x) <= abs(branch.slope(hi) - x) else hi
    theta = branch.theta(r)
    rate = theta * x - branch.gamma(r)
    return RatePoint(x, max(rate, 0.0), theta, branch.which), lo


def _branch(p: ProcessParams, which: str):
    if which in ("n", "count"):
        return _CountBranch(p)
    if which in ("l", "mark_sum"):
        return _MarkBranch(p)
    raise ValueError(f"which must be 'n' or 'l', got {which!r}")


def rate_n(p: ProcessParams, x: float) -> RatePoint:
    """Rate function of N_t / t at ``x``."""
    return _point(_CountBranch(p), float(x))


def rate_l(p: ProcessParams, x: float) -> RatePoint:
    """Rate function of L_t / t at ``x``."""
    return _point(_MarkBranch(p), float(x))


def rate_curve(p: ProcessParams, which: str, x_grid) -> list[RatePoint]:
    """Evaluate along a grid, reusing the previous solution as a bracket end.

    The optimizing parameter is monotone in ``x``, so on an increasing run the
    last solution is a valid lower bracket.
    """
    branch = _branch(p, which)
    lo0 = branch.lo
    out = []
    prev_x = None
    for x in x_grid:
        x = float(x)
        if prev_x is None or x < prev_x:
            branch.lo = lo0
        pt, lo = _solve(branch, x)
        out.append(pt)
        if lo is not None:
            branch.lo = lo
        prev_x = x
    branch.lo = lo0
    return out
