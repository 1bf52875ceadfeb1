"""Counter-based Philox4x32-10 generator.

Each uniform is a pure function of ``(seed, stream, replication, index)``, so
any replication can be regenerated in isolation and the result does not
depend on how replications are split across workers.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_S21 = np.uint64(21)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on a 128-bit counter; all words are uint64 < 2**32."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        n0 = ((p1 >> _S32) ^ c1 ^ k0) & _MASK
        n1 = p1 & _MASK
        n2 = ((p0 >> _S32) ^ c3 ^ k1) & _MASK
        n3 = p0 & _MASK
        c0, c1, c2, c3 = n0, n1, n2, n3
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@njit(cache=True, inline="always")
def _to_unit(hi, lo):
    x = (hi << _S21) | (lo >> _S11)
    return (float(x) + 0.5) * _INV53


@njit(cache=True)
def split_seed(seed):
    s = np.uint64(seed)
    return s & _MASK, s >> _S32


@njit(cache=True, inline="always")
def uniform_pair(k0, k1, stream, rep, j):
    """Two open-interval uniforms for block ``j`` of replication ``rep``."""
    c0 = np.uint64(j) & _MASK
    c1 = np.uint64(stream) & _MASK
    r = np.uint64(rep)
    a, b, c, d = philox4x32(c0, c1, r & _MASK, r >> _S32, k0, k1)
    return _to_unit(a, b), _to_unit(c, d)


@njit(cache=True)
def fill_uniforms(seed, stream, rep, out):
    """Fill ``out`` with the uniforms ``(seed, stream, rep, 0..len-1)``."""
    k0, k1 = split_seed(seed)
    m = out.size
    for j in range((m + 1) // 2):
        u0, u1 = uniform_pair(k0, k1, stream, rep, j)
        out[2 * j] = u0
        if 2 * j + 1 < m:
            out[2 * j + 1] = u1


def uniforms(seed: int, stream: int, rep: int, size: int) -> np.ndarray:
    out = np.empty(size)
    fill_uniforms(np.uint64(seed), np.uint64(stream), np.uint64(rep), out)
    return out


@njit(cache=True)
def raw_block(c, k):
    a, b, cc, d = philox4x32(np.uint64(c[0]), np.uint64(c[1]), np.uint64(c[2]),
                             np.uint64(c[3]), np.uint64(k[0]), np.uint64(k[1]))
    return np.array([a, b, cc, d], dtype=np.uint64)
