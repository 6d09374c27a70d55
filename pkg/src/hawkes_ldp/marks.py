"""Mark laws: positive i.i.d. event sizes with closed-form MGFs.

Every law exposes ``mgf(s) = E[exp(s l)]`` and its first two derivatives in
``s``, the raw moments of order 1..4, and a sampler.  Only light-tailed
families are representable; the MGF domain is ``s < mgf_domain_sup`` with a
strict inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigError, DomainError, InvalidOrder

__all__ = [
    "MarkDistribution",
    "Constant",
    "ExponentialRate",
    "GammaShapeScale",
    "DiscreteFinite",
    "mark_from_config",
]

# integer tags understood by the compiled sampler in ``_engine``
KIND_CONSTANT = 0
KIND_EXPONENTIAL = 1
KIND_GAMMA = 2
KIND_DISCRETE = 3

_PROB_TOL = 1e-12


def _exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _positive(name: str, v: float) -> float:
    v = float(v)
    if not (math.isfinite(v) and v > 0.0):
        raise ConfigError(f"{name} must be a positive finite number, got {v!r}")
    return v


class MarkDistribution:
    """Common interface; see the concrete families below."""

    mgf_domain_sup: float = math.inf

    def _check(self, s: float) -> None:
        if not s < self.mgf_domain_sup:
            raise DomainError(
                f"MGF argument s={s!r} outside domain s < {self.mgf_domain_sup!r} "
                f"for {self!r}"
            )

    def mgf(self, s: float) -> float:
        self._check(s)
        return self._mgf(s)

    def mgf_d1(self, s: float) -> float:
        """E[l exp(s l)]."""
        self._check(s)
        return self._mgf_d1(s)

    def mgf_d2(self, s: float) -> float:
        """E[l^2 exp(s l)]."""
        self._check(s)
        return self._mgf_d2(s)

    def log_mgf(self, s: float) -> float:
        self._check(s)
        return self._log_mgf(s)

    def tilted_mean(self, s: float) -> float:
        """M'(s) / M(s), the mean of the exponentially tilted law."""
        self._check(s)
        return self._tilted_mean(s)

    def moment(self, k: int) -> float:
        if k not in (1, 2, 3, 4) or isinstance(k, bool):
            raise InvalidOrder(f"moment order must be one of 1..4, got {k!r}")
        return self._moment(int(k))

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float:
        m1 = self.moment(1)
        return max(self.moment(2) - m1 * m1, 0.0)

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def packed(self) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
        """(kind, params, values, cumulative probs) for the compiled sampler."""
        raise NotImplementedError

    def config_items(self) -> dict[str, str]:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(MarkDistribution):
    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _positive("mark.c", self.c))

    def _mgf(self, s):
        return _exp(s * self.c)

    def _mgf_d1(self, s):
        return self.c * _exp(s * self.c)

    def _mgf_d2(self, s):
        return self.c * self.c * _exp(s * self.c)

    def _log_mgf(self, s):
        return s * self.c

    def _tilted_mean(self, s):
        return self.c

    def _moment(self, k):
        return self.c**k

    def sample(self, rng, size=None):
        if size is None:
            return self.c
        return np.full(size, self.c)

    def packed(self):
        return (KIND_CONSTANT, np.array([self.c, 0.0]), np.zeros(1), np.ones(1))

    def config_items(self):
        return {"mark.kind": "constant", "mark.c": repr(self.c)}


@dataclass(frozen=True)
class ExponentialRate(MarkDistribution):
    """Density beta * exp(-beta x) on x > 0."""

    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _positive("mark.beta", self.beta))

    @property
    def mgf_domain_sup(self):
        return self.beta

    def _mgf(self, s):
        return self.beta / (self.beta - s)

    def _mgf_d1(self, s):
        return self.beta / (self.beta - s) ** 2

    def _mgf_d2(self, s):
        return 2.0 * self.beta / (self.beta - s) ** 3

    def _log_mgf(self, s):
        return math.log(self.beta) - math.log(self.beta - s)

    def _tilted_mean(self, s):
        return 1.0 / (self.beta - s)

    def _moment(self, k):
        return math.factorial(k) / self.beta**k

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.beta, size=size)

    def packed(self):
        return (KIND_EXPONENTIAL, np.array([self.beta, 0.0]), np.zeros(1), np.ones(1))

    def config_items(self):
        return {"mark.kind": "exponential", "mark.beta": repr(self.beta)}


@dataclass(frozen=True)
class GammaShapeScale(MarkDistribution):
    k: float
    s: float

    def __post_init__(self):
        object.__setattr__(self, "k", _positive("mark.shape", self.k))
        object.__setattr__(self, "s", _positive("mark.scale", self.s))

    @property
    def mgf_domain_sup(self):
        return 1.0 / self.s

    def _base(self, s):
        return 1.0 - s * self.s

    def _mgf(self, s):
        return self._base(s) ** (-self.k)

    def _mgf_d1(self, s):
        return self.k * self.s * self._base(s) ** (-self.k - 1.0)

    def _mgf_d2(self, s):
        return self.k * (self.k + 1.0) * self.s**2 * self._base(s) ** (-self.k - 2.0)

    def _log_mgf(self, s):
        return -self.k * math.log1p(-s * self.s)

    def _tilted_mean(self, s):
        return self.k * self.s / self._base(s)

    def _moment(self, k):
        rising = 1.0
        for i in range(k):
            rising *= self.k + i
        return rising * self.s**k

    def sample(self, rng, size=None):
        return rng.gamma(self.k, self.s, size=size)

    def packed(self):
        return (KIND_GAMMA, np.array([self.k, self.s]), np.zeros(1), np.ones(1))

    def config_items(self):
        return {"mark.kind": "gamma", "mark.shape": repr(self.k), "mark.scale": repr(self.s)}


@dataclass(frozen=True)
class DiscreteFinite(MarkDistribution):
    values: tuple[float, ...]
    probs: tuple[float, ...]
    _cum: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(_positive("mark.values", v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if not values:
            raise ConfigError("mark.values must not be empty")
        if len(values) != len(probs):
            raise ConfigError(
                f"mark.values has {len(values)} entries but mark.probs has {len(probs)}"
            )
        if len(set(values)) != len(values):
            raise ConfigError(f"mark.values must be distinct, got {values}")
        if any(not (math.isfinite(p) and p >= 0.0) for p in probs):
            raise ConfigError(f"mark.probs must be non-negative, got {probs}")
        total = math.fsum(probs)
        if abs(total - 1.0) >= _PROB_TOL:
            raise ConfigError(f"mark.probs must sum to 1 (within 1e-12), got {total!r}")
        if total != 1.0:
            probs = tuple(p / total for p in probs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        object.__setattr__(self, "_cum", tuple(cum))

    def _mgf(self, s):
        return math.fsum(p * _exp(s * v) for v, p in zip(self.values, self.probs))

    def _mgf_d1(self, s):
        return math.fsum(p * v * _exp(s * v) for v, p in zip(self.values, self.probs))

    def _mgf_d2(self, s):
        return math.fsum(p * v * v * _exp(s * v) for v, p in zip(self.values, self.probs))

    def _log_weights(self, s):
        # weights p_i exp(s v_i) rescaled by their maximum to avoid overflow
        support = [(v, math.log(p) + s * v) for v, p in zip(self.values, self.probs) if p > 0]
        top = max(lw for _, lw in support)
        return top, [(v, math.exp(lw - top)) for v, lw in support]

    def _log_mgf(self, s):
        m = self._mgf(s)
        if 1e-300 < m < math.inf:
            return math.log(m)
        top, vw = self._log_weights(s)
        return top + math.log(math.fsum(w for _, w in vw))

    def _tilted_mean(self, s):
        _, vw = self._log_weights(s)
        return math.fsum(v * w for v, w in vw) / math.fsum(w for _, w in vw)

    def _moment(self, k):
        return math.fsum(p * v**k for v, p in zip(self.values, self.probs))

    def sample(self, rng, size=None):
        return rng.choice(np.asarray(self.values), size=size, p=np.asarray(self.probs))

    def packed(self):
        return (
            KIND_DISCRETE,
            np.zeros(2),
            np.asarray(self.values, dtype=np.float64),
            np.asarray(self._cum, dtype=np.float64),
        )

    def config_items(self):
        return {
            "mark.kind": "discrete",
            "mark.values": ",".join(repr(v) for v in self.values),
            "mark.probs": ",".join(repr(p) for p in self.probs),
        }


def _get(cfg: Mapping[str, str], key: str) -> str:
    try:
        return cfg[key]
    except KeyError:
        raise ConfigError(f"missing required key {key}") from None


def _float(cfg: Mapping[str, str], key: str) -> float:
    raw = _get(cfg, key)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _float_list(cfg: Mapping[str, str], key: str) -> tuple[float, ...]:
    raw = _get(cfg, key)
    try:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from None


def mark_from_config(cfg: Mapping[str, str]) -> MarkDistribution:
    """Build a mark law from flat ``mark.*`` keys."""
    kind = _get(cfg, "mark.kind").strip().lower()
    if kind == "constant":
        return Constant(_float(cfg, "mark.c"))
    if kind == "exponential":
        return ExponentialRate(_float(cfg, "mark.beta"))
    if kind == "gamma":
        return GammaShapeScale(_float(cfg, "mark.shape"), _float(cfg, "mark.scale"))
    if kind == "discrete":
        return DiscreteFinite(_float_list(cfg, "mark.values"), _float_list(cfg, "mark.probs"))
    raise ConfigError(
        f"mark.kind must be one of constant, exponential, gamma, discrete; got {kind!r}"
    )
