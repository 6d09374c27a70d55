"""Excitation kernels alpha(1..K) with finite support."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import ConfigError
from .marks import MarkDistribution, _float, _float_list, _get

__all__ = ["ExcitationKernel", "stability_margin", "clt_tail_statistic", "kernel_from_config"]


@dataclass(frozen=True)
class ExcitationKernel:
    """Weights ``alpha(1), ..., alpha(K)``; an empty tuple means alpha == 0.

    ``generator`` records how the weights were built, e.g.
    ``("geometric", a, r, K)``, and ``truncation_error`` bounds the mass of
    the infinite family discarded beyond lag K.
    """

    weights: tuple[float, ...] = ()
    generator: tuple = ("explicit",)
    truncation_error: float = 0.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        for i, v in enumerate(w, start=1):
            if not (math.isfinite(v) and v >= 0.0):
                raise ConfigError(f"kernel weight alpha({i}) must be finite and >= 0, got {v!r}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def explicit(cls, weights) -> "ExcitationKernel":
        return cls(tuple(weights))

    @classmethod
    def zero(cls) -> "ExcitationKernel":
        return cls(())

    @classmethod
    def geometric(cls, a: float, r: float, K: int) -> "ExcitationKernel":
        """alpha(t) = a r^(t-1), t = 1..K."""
        if not (a >= 0 and 0 <= r < 1 and K >= 0):
            raise ConfigError(f"geometric kernel needs a >= 0, 0 <= r < 1, K >= 0; got {a}, {r}, {K}")
        w = tuple(a * r ** (t - 1) for t in range(1, K + 1))
        return cls(w, ("geometric", float(a), float(r), int(K)), a * r**K / (1.0 - r))

    @classmethod
    def power(cls, a: float, p: float, K: int) -> "ExcitationKernel":
        """alpha(t) = a t^(-p), t = 1..K."""
        if not (a >= 0 and p > 0 and K >= 0):
            raise ConfigError(f"power kernel needs a >= 0, p > 0, K >= 0; got {a}, {p}, {K}")
        w = tuple(a * t ** (-p) for t in range(1, K + 1))
        if a == 0:
            err = 0.0
        elif p > 1:
            # integral bound on sum_{t>K} t^-p
            err = a * (K ** (1.0 - p) / (p - 1.0) if K > 0 else math.inf)
        else:
            err = math.inf
        return cls(w, ("power", float(a), float(p), int(K)), err)

    @property
    def support(self) -> int:
        return len(self.weights)

    def __len__(self):
        return len(self.weights)

    def l1_norm(self) -> float:
        # fsum is exactly rounded, hence independent of summation order
        return math.fsum(sorted(self.weights, reverse=True))

    def config_items(self) -> dict[str, str]:
        tag = self.generator[0]
        if tag == "geometric":
            _, a, r, K = self.generator
            return {"kernel.kind": "geometric", "kernel.a": repr(a), "kernel.r": repr(r), "kernel.K": str(K)}
        if tag == "power":
            _, a, p, K = self.generator
            return {"kernel.kind": "power", "kernel.a": repr(a), "kernel.p": repr(p), "kernel.K": str(K)}
        return {"kernel.kind": "explicit", "kernel.weights": ",".join(repr(w) for w in self.weights)}


def stability_margin(kernel: ExcitationKernel, marks: MarkDistribution) -> float:
    """1 - ||alpha||_1 E[l]; positive iff the process is subcritical."""
    return 1.0 - kernel.l1_norm() * marks.moment(1)


def clt_tail_statistic(kernel: ExcitationKernel, t: int) -> float:
    """(1/sqrt t) * sum_{u=1}^{t-1} sum_{s>u} alpha(s).

    Vanishing of this quantity as t grows is the side condition under which
    the Gaussian limits for N_t and L_t hold.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    w = kernel.weights
    K = len(w)
    # tails[u] = sum_{s=u+1}^{K} alpha(s)
    tails = [0.0] * (K + 1)
    for u in range(K - 1, -1, -1):
        tails[u] = tails[u + 1] + w[u]
    total = math.fsum(tails[u] for u in range(1, min(t - 1, K) + 1))
    return total / math.sqrt(t)


def kernel_from_config(cfg: Mapping[str, str]) -> ExcitationKernel:
    kind = _get(cfg, "kernel.kind").strip().lower()
    if kind == "explicit":
        return ExcitationKernel.explicit(_float_list(cfg, "kernel.weights"))
    if kind in ("geometric", "power"):
        raw_K = _get(cfg, "kernel.K")
        try:
            K = int(raw_K)
        except ValueError:
            raise ConfigError(f"kernel.K: expected an integer, got {raw_K!r}") from None
        if kind == "geometric":
            return ExcitationKernel.geometric(_float(cfg, "kernel.a"), _float(cfg, "kernel.r"), K)
        return ExcitationKernel.power(_float(cfg, "kernel.a"), _float(cfg, "kernel.p"), K)
    raise ConfigError(f"kernel.kind must be one of explicit, geometric, power; got {kind!r}")
