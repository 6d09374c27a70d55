"""Compiled inner loops: Philox4x64-10 streams, Poisson/mark samplers, path kernels.

Stream layout: path ``i`` of a run with master seed ``m`` draws from the
Philox4x64-10 block cipher keyed by ``(m, i)``, counter starting at zero and
incremented before each block.  This is the same stream NumPy produces for
``np.random.Philox(key=m + (i << 64))``, which the test-suite uses as an
oracle.  A path's draws therefore never depend on how paths are scheduled.
"""
import math

import numba as nb
import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_TWO_M53 = 1.0 / 9007199254740992.0

STATUS_OK = 0
STATUS_OVERFLOW = 1
# intensities above this are treated as a runaway (unstable) configuration
LAMBDA_CAP = 1e9

# state vector layout (uint64[11]): key0, key1, ctr0..ctr3, buf0..buf3, pos
STATE_SIZE = 11


@nb.njit(inline="always", cache=True)
def _mulhilo(a, b):
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    carry = ((p0 >> _S32) + (p1 & _MASK32) + (p2 & _MASK32)) >> _S32
    hi = p3 + (p1 >> _S32) + (p2 >> _S32) + carry
    return hi, a * b


@nb.njit(nogil=True, cache=True)
def philox4x64_10(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@nb.njit(nogil=True, cache=True)
def stream_init(state, seed, path_index):
    state[0] = seed
    state[1] = path_index
    for i in range(2, 10):
        state[i] = _ZERO
    state[10] = np.uint64(4)


@nb.njit(nogil=True, cache=True)
def next_u64(state):
    pos = state[10]
    if pos >= np.uint64(4):
        state[2] += _ONE
        if state[2] == _ZERO:
            state[3] += _ONE
            if state[3] == _ZERO:
                state[4] += _ONE
                if state[4] == _ZERO:
                    state[5] += _ONE
        o0, o1, o2, o3 = philox4x64_10(state[2], state[3], state[4], state[5], state[0], state[1])
        state[6] = o0
        state[7] = o1
        state[8] = o2
        state[9] = o3
        pos = _ZERO
    out = state[6 + np.int64(pos)]
    state[10] = pos + _ONE
    return out


@nb.njit(nogil=True, cache=True)
def next_uniform(state):
    """Uniform on the open interval (0, 1)."""
    return (float(next_u64(state) >> _S11) + 0.5) * _TWO_M53


@nb.njit(nogil=True, cache=True)
def poisson(lam, state):
    if lam <= 0.0:
        return 0
    if lam < 10.0:
        # inversion
        u = next_uniform(state)
        p = math.exp(-lam)
        cdf = p
        k = 0
        while u > cdf and k < 1000:
            k += 1
            p *= lam / k
            cdf += p
        return k
    # transformed rejection with squeeze (Hormann's PTRS)
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        U = next_uniform(state) - 0.5
        V = next_uniform(state)
        us = 0.5 - abs(U)
        k = math.floor((2.0 * a / us + b) * U + lam + 0.43)
        if us >= 0.07 and V <= vr:
            return np.int64(k)
        if k < 0 or (us < 0.013 and V > us):
            continue
        if (math.log(V) + math.log(invalpha) - math.log(a / (us * us) + b)) <= (
            -lam + k * loglam - math.lgamma(k + 1.0)
        ):
            return np.int64(k)


@nb.njit(nogil=True, cache=True)
def std_normal(state):
    u1 = next_uniform(state)
    u2 = next_uniform(state)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@nb.njit(nogil=True, cache=True)
def std_gamma(shape, state):
    # Marsaglia-Tsang; shape < 1 via the U^(1/shape) boost
    if shape < 1.0:
        g = std_gamma(shape + 1.0, state)
        return g * next_uniform(state) ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = std_normal(state)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = next_uniform(state)
        if u < 1.0 - 0.0331 * x * x * x * x:
            return d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


@nb.njit(nogil=True, cache=True)
def draw_mark(kind, par, vals, cum, state):
    if kind == 0:
        return par[0]
    if kind == 1:
        return -math.log(next_uniform(state)) / par[0]
    if kind == 2:
        return std_gamma(par[0], state) * par[1]
    u = next_uniform(state)
    n = cum.shape[0]
    for i in range(n - 1):
        if u <= cum[i]:
            return vals[i]
    return vals[n - 1]


@nb.njit(nogil=True, cache=True)
def mark_sum(z, kind, par, vals, cum, state):
    if kind == 0:
        return par[0] * z
    acc = 0.0
    for _ in range(z):
        acc += draw_mark(kind, par, vals, cum, state)
    return acc


@nb.njit(nogil=True, cache=True)
def draw_marks(kind, par, vals, cum, seed, path_index, out):
    state = np.empty(STATE_SIZE, dtype=np.uint64)
    stream_init(state, seed, path_index)
    for i in range(out.shape[0]):
        out[i] = draw_mark(kind, par, vals, cum, state)


@nb.njit(nogil=True, cache=True)
def draw_uniforms(seed, path_index, out):
    state = np.empty(STATE_SIZE, dtype=np.uint64)
    stream_init(state, seed, path_index)
    for i in range(out.shape[0]):
        out[i] = next_uniform(state)


@nb.njit(nogil=True, cache=True)
def draw_raw(seed, path_index, out):
    state = np.empty(STATE_SIZE, dtype=np.uint64)
    stream_init(state, seed, path_index)
    for i in range(out.shape[0]):
        out[i] = next_u64(state)


@nb.njit(nogil=True, cache=True)
def simulate_path(nu, w, kind, par, vals, cum, horizon, seed, path_index, lam, z, x):
    """Fill lam/z/x (length ``horizon``) for one path; returns a status code."""
    state = np.empty(STATE_SIZE, dtype=np.uint64)
    stream_init(state, seed, path_index)
    K = w.shape[0]
    for s in range(horizon):
        acc = 0.0
        for u in range(1, min(s, K) + 1):
            acc += w[u - 1] * x[s - u]
        lam_s = nu + acc
        if not (lam_s <= LAMBDA_CAP):
            return STATUS_OVERFLOW
        lam[s] = lam_s
        zs = poisson(lam_s, state)
        z[s] = zs
        x[s] = mark_sum(zs, kind, par, vals, cum, state)
    return STATUS_OK


@nb.njit(nogil=True, cache=True)
def simulate_finals(nu, w, kind, par, vals, cum, horizon, seed, start, stop, out_n, out_l):
    """Terminal (N_t, L_t) for paths ``start..stop-1`` written at their indices."""
    state = np.empty(STATE_SIZE, dtype=np.uint64)
    K = w.shape[0]
    ring = np.zeros(max(K, 1))
    for i in range(start, stop):
        stream_init(state, seed, np.uint64(i))
        ring[:] = 0.0
        n_tot = 0
        l_tot = 0.0
        for s in range(horizon):
            acc = 0.0
            for u in range(1, min(s, K) + 1):
                acc += w[u - 1] * ring[(s - u) % K]
            lam_s = nu + acc
            if not (lam_s <= LAMBDA_CAP):
                return STATUS_OVERFLOW
            zs = poisson(lam_s, state)
            xs = mark_sum(zs, kind, par, vals, cum, state)
            if K > 0:
                ring[s % K] = xs
            n_tot += zs
            l_tot += xs
        out_n[i] = n_tot
        out_l[i] = l_tot
    return STATUS_OK
