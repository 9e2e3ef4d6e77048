"""Counter-based SplitMix64 streams.

Every path owns the stream ``u_n = mix64(key + n * GAMMA)`` with
``key = mix64(seed ^ mix64(path))``, so the numbers drawn by a path do not
depend on how paths are scheduled across threads.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def path_key(seed, path):
    return mix64(np.uint64(seed) ^ mix64(np.uint64(path)))


@njit(cache=True, inline="always")
def uniform_open(key, n):
    """Uniform on (0, 1] from counter ``n`` of stream ``key``."""
    x = mix64(key + np.uint64(n) * GAMMA)
    return (float(x >> _S11) + 1.0) * _TWO_M53


@njit(cache=True, inline="always")
def normal_pair(key, m):
    """Two independent standard normals (Box-Muller on counters 2m, 2m+1)."""
    u1 = uniform_open(key, 2 * m)
    u2 = uniform_open(key, 2 * m + 1)
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(_TWO_PI * u2), r * math.sin(_TWO_PI * u2)


@njit(cache=True)
def normals(seed, path, count):
    """``count`` standard normals of one path's stream (for tests and dumps)."""
    key = path_key(seed, path)
    out = np.empty(count)
    for m in range((count + 1) // 2):
        a, b = normal_pair(key, m)
        out[2 * m] = a
        if 2 * m + 1 < count:
            out[2 * m + 1] = b
    return out


def uniforms(seed: int, path: int, count: int) -> np.ndarray:
    return _uniforms(np.uint64(seed), np.uint64(path), count)


@njit(cache=True)
def _uniforms(seed, path, count):
    key = path_key(seed, path)
    out = np.empty(count)
    for n in range(count):
        out[n] = uniform_open(key, n)
    return out
