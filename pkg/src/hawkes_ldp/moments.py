"""Law-of-large-numbers and central-limit constants for N_t and L_t."""
from __future__ import annotations

import math

from .errors import StabilityError
from .kernel import clt_tail_statistic
from .process import ProcessParams

__all__ = [
    "lln_mean_n",
    "lln_mean_l",
    "clt_var_n",
    "clt_var_l",
    "finite_horizon_moments",
    "limits_table",
]


def _margin(p: ProcessParams) -> float:
    m = p.stability_margin
    if m <= 0:
        raise StabilityError(f"stability margin {m!r} <= 0: no finite limits")
    return m


def lln_mean_n(p: ProcessParams) -> float:
    """nu / (1 - ||alpha|| E[l])."""
    return p.nu / _margin(p)


def lln_mean_l(p: ProcessParams) -> float:
    return p.nu * p.marks.moment(1) / _margin(p)


def clt_var_n(p: ProcessParams) -> float:
    """nu (1 + ||alpha||^2 Var(l)) / (1 - ||alpha|| E[l])^3."""
    m = _margin(p)
    h = p.h
    return p.nu * (1.0 + h * h * p.marks.variance) / m**3


def clt_var_l(p: ProcessParams) -> float:
    """nu E[l^2] / (1 - ||alpha|| E[l])^3."""
    return p.nu * p.marks.moment(2) / _margin(p) ** 3


def finite_horizon_moments(p: ProcessParams, t: int, which: str = "n") -> tuple[float, float]:
    """Exact (E[Y_t], Var(Y_t)) for Y = N or L at a finite horizon.

    Obtained by differentiating the log-MGF recursions twice at theta = 0, so
    the values include the start-up transient from the empty history that the
    limit constants ignore.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    w = p.kernel.weights
    K = len(w)
    m1 = p.marks.moment(1)
    m2 = p.marks.moment(2)
    d1 = [0.0] * t
    d2 = [0.0] * t
    if which == "n":
        # f_s = theta + log M(a_s), a_s = sum_u alpha(u) (exp f_{s-u} - 1); all f_s(0) = 0
        for s in range(t):
            a1 = math.fsum(w[u - 1] * d1[s - u] for u in range(1, min(s, K) + 1))
            a2 = math.fsum(
                w[u - 1] * (d1[s - u] ** 2 + d2[s - u]) for u in range(1, min(s, K) + 1)
            )
            d1[s] = 1.0 + m1 * a1
            d2[s] = (m2 - m1 * m1) * a1 * a1 + m1 * a2
        mean = p.nu * math.fsum(d1)
        var = p.nu * math.fsum(a * a + b for a, b in zip(d1, d2))
    elif which == "l":
        # g_s = M(theta + a_s), a_s = sum_u alpha(u) (g_{s-u} - 1); all g_s(0) = 1
        for s in range(t):
            a1 = math.fsum(w[u - 1] * d1[s - u] for u in range(1, min(s, K) + 1))
            a2 = math.fsum(w[u - 1] * d2[s - u] for u in range(1, min(s, K) + 1))
            d1[s] = m1 * (1.0 + a1)
            d2[s] = m2 * (1.0 + a1) ** 2 + m1 * a2
        mean = p.nu * math.fsum(d1)
        var = p.nu * math.fsum(d2)
    else:
        raise ValueError(f"which must be 'n' or 'l', got {which!r}")
    return mean, var


def limits_table(p: ProcessParams, horizon: int | None = None) -> list[tuple[str, float]]:
    """Rows of (quantity, value) printed by the ``limits`` command."""
    rows = [
        ("lln_mean_n", lln_mean_n(p)),
        ("lln_mean_l", lln_mean_l(p)),
        ("clt_var_n", clt_var_n(p)),
        ("clt_var_l", clt_var_l(p)),
        ("stability_margin", p.stability_margin),
    ]
    if horizon is not None:
        rows.append(("clt_tail_statistic", clt_tail_statistic(p.kernel, horizon)))
    return rows
