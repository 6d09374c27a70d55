"""Independent reference computations used by the tests.

Nothing here calls the recursions or root solvers of the package; the
oracles work from the process definition directly (exhaustive enumeration,
exact Markov-chain dynamic programming) or from a generic optimizer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, stats

from hawkes_ldp.marks import Constant, DiscreteFinite


# ---------------------------------------------------------------- enumeration


def _poisson_support(lam: float, tail: float):
    """(k, pmf) pairs for k = 0..k_max with P(Z > k_max) <= tail."""
    ks = np.arange(int(lam + 20.0 * math.sqrt(lam) + 60))
    k_max = int(np.argmax(stats.poisson.sf(ks, lam) <= tail))
    return list(zip(range(k_max + 1), stats.poisson.pmf(ks[: k_max + 1], lam).tolist()))


@lru_cache(maxsize=None)
def _mark_sum_law(marks, z: int):
    """Exact law of a sum of z marks as ((value, prob), ...)."""
    if isinstance(marks, Constant):
        return ((marks.c * z, 1.0),)
    if not isinstance(marks, DiscreteFinite):
        raise TypeError("enumeration needs Constant or DiscreteFinite marks")
    if z == 0:
        return ((0.0, 1.0),)
    acc: dict[float, float] = {}
    for s, ps in _mark_sum_law(marks, z - 1):
        for v, pv in zip(marks.values, marks.probs):
            key = round(s + v, 12)
            acc[key] = acc.get(key, 0.0) + ps * pv
    return tuple(acc.items())


@dataclass
class Enumerated:
    mass: float
    mgf_n: float  # E[exp(theta N_t)] restricted to the enumerated mass
    mgf_l: float
    mean_n: float
    var_n: float
    mean_l: float
    var_l: float


def enumerate_process(nu, weights, marks, t: int, theta: float, tail: float = 1e-15) -> Enumerated:
    """Forward enumeration over Poisson outcomes, merging equal histories.

    State: the last K mark-sums.  Per state we carry the probability and the
    partial sums of exp(theta Y), Y and Y**2 for Y = N and Y = L.
    """
    K = len(weights)
    # state -> [p, e_n, e_l, n1, n2, l1, l2]
    states = {tuple([0.0] * K): np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0])}
    for _ in range(t):
        new: dict[tuple, np.ndarray] = {}
        for hist, (p, en, el, n1, n2, l1, l2) in states.items():
            lam = nu + sum(w * x for w, x in zip(weights, hist))
            for z, pz in _poisson_support(lam, tail):
                for x, px in _mark_sum_law(marks, z):
                    q = pz * px
                    key = ((round(x, 12),) + hist[:-1]) if K else ()
                    upd = np.array([
                        p * q,
                        en * q * math.exp(theta * z),
                        el * q * math.exp(theta * x),
                        (n1 + z * p) * q,
                        (n2 + 2 * z * n1 + z * z * p) * q,
                        (l1 + x * p) * q,
                        (l2 + 2 * x * l1 + x * x * p) * q,
                    ])
                    if key in new:
                        new[key] += upd
                    else:
                        new[key] = upd
        states = new
    tot = sum(states.values())
    p, en, el, n1, n2, l1, l2 = tot
    return Enumerated(p, en, el, n1, n2 - n1 * n1, l1, l2 - l1 * l1)


def brute_force_cgf(nu, weights, marks, t: int, theta: float, which: str) -> float:
    e = enumerate_process(nu, weights, marks, t, theta)
    assert e.mass >= 1.0 - 1e-12, e.mass
    return math.log(e.mgf_n if which == "n" else e.mgf_l) / t


# ---------------------------------------------------------- exact tail (K=1)


def exact_count_tail(nu: float, a: float, c: float, t: int, level: int, z_max: int = 60) -> float:
    """P(N_t >= level) for kernel [a] and Constant(c) marks.

    (Z_{s-1}, N_{s-1}) is a Markov chain; its joint law is propagated
    exactly up to truncation of Z at ``z_max`` (mass loss is returned as
    an assertion, not silently dropped).
    """
    n_max = level  # everything at or above `level` is lumped together
    P = np.zeros((z_max + 1, n_max + 1))
    P[0, 0] = 1.0
    ks = np.arange(z_max + 1)
    # trans[zp, z] = P(Z_s = z | Z_{s-1} = zp)
    trans = stats.poisson.pmf(ks[None, :], nu + a * c * ks[:, None])
    for _ in range(t):
        R = trans.T @ P  # R[z, n] = P(Z_s = z, N_{s-1} = n)
        Q = np.zeros_like(P)
        for z in range(z_max + 1):
            if z < n_max:
                Q[z, z:n_max] = R[z, : n_max - z]
                Q[z, n_max] = R[z, n_max - z:].sum()
            else:
                Q[z, n_max] = R[z].sum()
        P = Q
    assert P.sum() > 1.0 - 1e-10, P.sum()
    return float(P[:, n_max].sum())


# ------------------------------------------------------ critical points / CGF


def critical_point_n_grid(nu, h, marks, n_grid: int = 200_001):
    """theta_c = sup_x {log x - log M(h(x-1))} by dense grid then golden polish."""
    if h == 0:
        return math.inf, math.inf
    sup = marks.mgf_domain_sup
    x_hi = 1.0 + (sup / h if math.isfinite(sup) else 50.0 / h) * (1 - 1e-12)
    xs = np.linspace(1e-6, x_hi, n_grid)[:-1]
    vals = np.array([math.log(x) - marks.log_mgf(h * (x - 1.0)) for x in xs])
    i = int(np.argmax(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    res = optimize.minimize_scalar(
        lambda x: -(math.log(x) - marks.log_mgf(h * (x - 1.0))),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-13},
    )
    return -res.fun, res.x


def critical_point_l_nested(h, marks, tol: float = 1e-12):
    """Nested bisection: outer on theta, inner checks that x = M(theta + h(x-1)) has a root."""
    sup = marks.mgf_domain_sup

    def has_root(theta):
        # min over x of M(theta + h(x-1)) - x; x restricted to the MGF domain
        x_hi = 1.0 + ((sup - theta) / h if math.isfinite(sup) else 60.0 / h)
        if x_hi <= 0:
            return False, math.nan
        f = lambda x: marks.mgf(theta + h * (x - 1.0)) - x  # noqa: E731
        res = optimize.minimize_scalar(f, bounds=(0.0, x_hi * (1 - 1e-13)), method="bounded",
                                       options={"xatol": 1e-14})
        return res.fun <= 0.0, res.x

    lo, hi = 0.0, 1.0
    while has_root(hi)[0]:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_root(mid)[0]:
            lo = mid
        else:
            hi = mid
    return lo, has_root(lo)[1]


def gamma_n_iterate(nu, h, marks, theta, n_iter: int = 200_000):
    """Monotone fixed-point iteration from 0 (converges to the minimal root)."""
    x = 0.0
    for _ in range(n_iter):
        nxt = math.exp(theta) * marks.mgf(h * (x - 1.0))
        if abs(nxt - x) < 1e-16:
            break
        x = nxt
    return nu * (x - 1.0)


def legendre(gamma, x: float, theta_lo: float, theta_hi: float) -> float:
    """sup_theta {theta x - gamma(theta)} with a bounded scalar optimizer."""
    res = optimize.minimize_scalar(
        lambda th: -(th * x - gamma(th)), bounds=(theta_lo, theta_hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return -res.fun
