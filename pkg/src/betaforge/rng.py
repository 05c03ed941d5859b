"""Seeded random streams and the scalar variate generators built on them.

Each :class:`RngStream` owns a xoshiro256** state derived from a
``(seed, stream_id)`` pair through :class:`numpy.random.SeedSequence`, so
distinct pairs give independent streams and the same pair always replays the
same numbers, whatever thread drives it.  The generators are numba kernels
operating on the raw ``uint64[4]`` state; the compiled samplers elsewhere in the
package call them directly.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

_MASK64 = (1 << 64) - 1
_TWO_M53 = 1.0 / 9007199254740992.0


@nb.njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (np.uint64(64) - k))


@nb.njit(cache=True)
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s1 * np.uint64(5), np.uint64(7)) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, np.uint64(45))
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@nb.njit(cache=True)
def uniform(state):
    """Uniform double on the open interval (0, 1)."""
    return (float(next_u64(state) >> np.uint64(11)) + 0.5) * _TWO_M53


@nb.njit(cache=True)
def normal(state):
    # Marsaglia polar method; the second variate of each pair is dropped so
    # the stream state stays a plain uint64[4].
    while True:
        u = 2.0 * uniform(state) - 1.0
        v = 2.0 * uniform(state) - 1.0
        s = u * u + v * v
        if 0.0 < s < 1.0:
            return u * math.sqrt(-2.0 * math.log(s) / s)


@nb.njit(cache=True)
def _gamma_ge1(state, a):
    # Marsaglia-Tsang squeeze rejection, valid for a >= 1.
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = normal(state)
        v = 1.0 + c * x
        while v <= 0.0:
            x = normal(state)
            v = 1.0 + c * x
        v = v * v * v
        u = uniform(state)
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return d * v
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return d * v


@nb.njit(cache=True)
def standard_gamma(state, shape):
    if shape >= 1.0:
        return _gamma_ge1(state, shape)
    # Gamma(a) = Gamma(a + 1) * U^(1/a)
    g = _gamma_ge1(state, shape + 1.0)
    return g * math.exp(math.log(uniform(state)) / shape)


@nb.njit(cache=True)
def gamma(state, shape, scale):
    return standard_gamma(state, shape) * scale


@nb.njit(cache=True)
def beta(state, p, q):
    x = standard_gamma(state, p)
    y = standard_gamma(state, q)
    return x / (x + y)


@nb.njit(cache=True)
def dirichlet(state, alpha, n):
    out = np.empty(n)
    total = 0.0
    for i in range(n):
        out[i] = standard_gamma(state, alpha)
        total += out[i]
    for i in range(n):
        out[i] /= total
    return out


@nb.njit(cache=True)
def _fill(state, kind, p1, p2, out):
    for i in range(out.shape[0]):
        if kind == 0:
            out[i] = uniform(state)
        elif kind == 1:
            out[i] = normal(state)
        elif kind == 2:
            out[i] = gamma(state, p1, p2)
        else:
            out[i] = beta(state, p1, p2)
    return out


class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    The stream is consumed by every draw. Use :meth:`copy` to replay it.
    """

    __slots__ = ("seed", "stream_id", "state")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.state = seq.generate_state(4, np.uint64)
        if not self.state.any():
            self.state[0] = np.uint64(0x9E3779B97F4A7C15)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def copy(self) -> RngStream:
        other = RngStream.__new__(RngStream)
        other.seed = self.seed
        other.stream_id = self.stream_id
        other.state = self.state.copy()
        return other

    def uniform(self, size: int | None = None):
        if size is None:
            return uniform(self.state)
        return _fill(self.state, 0, 0.0, 0.0, np.empty(size))

    def normal(self, size: int | None = None):
        if size is None:
            return normal(self.state)
        return _fill(self.state, 1, 0.0, 0.0, np.empty(size))

    def gamma(self, shape: float, scale: float = 1.0, size: int | None = None):
        if size is None:
            return gamma(self.state, float(shape), float(scale))
        return _fill(self.state, 2, float(shape), float(scale), np.empty(size))

    def beta(self, p: float, q: float, size: int | None = None):
        if size is None:
            return beta(self.state, float(p), float(q))
        return _fill(self.state, 3, float(p), float(q), np.empty(size))

    def dirichlet(self, alpha: float, n: int) -> np.ndarray:
        return dirichlet(self.state, float(alpha), int(n))
