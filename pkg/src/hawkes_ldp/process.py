"""Discrete-time marked Hawkes process: parameters, simulation, path records.

Given the history, ``Z_t ~ Poisson(lambda_t)`` with
``lambda_t = nu + sum_{s=1}^{t-1} alpha(s) X_{t-s}`` and ``X_t`` the sum of
``Z_t`` i.i.d. marks.  ``N_t`` and ``L_t`` are the running sums of ``Z`` and
``X``.  The process starts empty (``X_0 = N_0 = 0``).
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _engine
from .errors import ConfigError, ConsistencyError, ResourceError, StabilityError
from .kernel import ExcitationKernel, stability_margin
from .marks import MarkDistribution

__all__ = [
    "ProcessParams",
    "PathRecord",
    "simulate",
    "replay_intensity",
    "write_path_csv",
    "read_path_csv",
]

PATH_CSV_HEADER = "t,lambda,z,x,n_cum,l_cum"
_U64 = 2**64


def _as_u64(seed: int) -> np.uint64:
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.uint64(seed)


@dataclass(frozen=True)
class ProcessParams:
    """Baseline ``nu``, kernel and mark law.

    Subcriticality is checked on construction unless ``require_stable`` is
    False (only simulation accepts unstable parameters).
    """

    nu: float
    kernel: ExcitationKernel
    marks: MarkDistribution
    require_stable: bool = field(default=True, compare=False)

    def __post_init__(self):
        nu = float(self.nu)
        if not (math.isfinite(nu) and nu > 0):
            raise ConfigError(f"nu must be positive, got {self.nu!r}")
        object.__setattr__(self, "nu", nu)
        if self.require_stable and self.stability_margin <= 0:
            raise StabilityError(
                f"||alpha||_1 * E[l] = {self.h * self.marks.mean!r} must be < 1"
            )

    @property
    def h(self) -> float:
        """||alpha||_1."""
        return self.kernel.l1_norm()

    @property
    def stability_margin(self) -> float:
        return stability_margin(self.kernel, self.marks)


@dataclass
class PathRecord:
    horizon: int
    lam: np.ndarray
    z: np.ndarray
    x: np.ndarray
    seed: int
    path_index: int = 0

    @property
    def n_final(self) -> int:
        return int(self.z.sum())

    @property
    def l_final(self) -> float:
        acc = 0.0
        for v in self.x:
            acc += float(v)
        return acc

    @property
    def n_cum(self) -> np.ndarray:
        return np.cumsum(self.z)

    @property
    def l_cum(self) -> np.ndarray:
        out = np.empty(self.horizon)
        acc = 0.0
        for i, v in enumerate(self.x):
            acc += float(v)
            out[i] = acc
        return out


def simulate(p: ProcessParams, horizon: int, seed: int, path_index: int = 0) -> PathRecord:
    """Simulate one path of length ``horizon`` on stream ``(seed, path_index)``.

    Path ``i`` of a Monte Carlo batch with master seed ``seed`` is exactly
    ``simulate(p, horizon, seed, path_index=i)``.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    kind, par, vals, cum = p.marks.packed()
    w = np.asarray(p.kernel.weights, dtype=np.float64)
    lam = np.empty(horizon)
    z = np.empty(horizon, dtype=np.int64)
    x = np.empty(horizon)
    status = _engine.simulate_path(
        p.nu, w, kind, par, vals, cum, horizon, _as_u64(seed), _as_u64(path_index), lam, z, x
    )
    if status != _engine.STATUS_OK:
        raise ResourceError(
            f"intensity exceeded {_engine.LAMBDA_CAP:g}; parameters are not subcritical "
            f"(stability margin {p.stability_margin!r})"
        )
    return PathRecord(horizon, lam, z, x, int(seed), int(path_index))


def replay_intensity(pr: PathRecord, p: ProcessParams) -> np.ndarray:
    """Recompute lambda_1..lambda_t from the stored X values.

    Raises ConsistencyError unless the result equals ``pr.lam`` bit for bit.
    """
    w = p.kernel.weights
    K = len(w)
    x = [float(v) for v in pr.x]
    out = np.empty(pr.horizon)
    for s in range(pr.horizon):
        acc = 0.0
        # same accumulation order as the compiled simulator
        for u in range(1, min(s, K) + 1):
            acc += w[u - 1] * x[s - u]
        out[s] = p.nu + acc
    bad = np.flatnonzero(out != pr.lam)
    if bad.size:
        s = int(bad[0])
        raise ConsistencyError(
            f"stored lambda_{s + 1}={pr.lam[s]!r} but history gives {out[s]!r}"
        )
    return out


def write_path_csv(pr: PathRecord, dest) -> None:
    """CSV with a ``# seed=<u64>`` line, header, then one row per step."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="") if own else dest
    try:
        fh.write(f"# seed={pr.seed}\n")
        fh.write(PATH_CSV_HEADER + "\n")
        n_cum = pr.n_cum
        l_cum = pr.l_cum
        for s in range(pr.horizon):
            fh.write(
                f"{s + 1},{pr.lam[s]:.17g},{int(pr.z[s])},{pr.x[s]:.17g},"
                f"{int(n_cum[s])},{l_cum[s]:.17g}\n"
            )
    finally:
        if own:
            fh.close()


def read_path_csv(src) -> PathRecord:
    text = Path(src).read_text() if isinstance(src, (str, Path)) else src.read()
    seed = None
    rows = []
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.strip() == "seed":
                seed = int(val)
            continue
        if line == PATH_CSV_HEADER:
            continue
        rows.append(line.split(","))
    if seed is None:
        raise ConsistencyError("path CSV lacks a '# seed=' line")
    lam = np.array([float(r[1]) for r in rows])
    z = np.array([int(r[2]) for r in rows], dtype=np.int64)
    x = np.array([float(r[3]) for r in rows])
    return PathRecord(len(rows), lam, z, x, seed)
