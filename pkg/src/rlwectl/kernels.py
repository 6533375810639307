"""Low-level modular-arithmetic kernels (numba JIT).

All kernels operate on uint64 arrays holding residues in [0, q).  The
modulus must satisfy q < 2**62 so that sums of two residues never wrap
and Shoup multiplication stays exact.  Multiplications use Harvey/Shoup
precomputation: for a fixed multiplier w one stores
w_shoup = floor(w * 2**64 / q) and the 128-bit intermediate is obtained
from 32-bit limb products, so no native 128-bit type is required.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

_MASK32 = uint64(0xFFFFFFFF)


@njit(uint64(uint64, uint64), cache=True, inline="always")
def _umulhi(a, b):
    # High 64 bits of the 128-bit product a*b, via 32-bit limbs.
    a_lo = a & _MASK32
    a_hi = a >> uint64(32)
    b_lo = b & _MASK32
    b_hi = b >> uint64(32)
    t = a_lo * b_lo
    cross = (t >> uint64(32)) + ((a_hi * b_lo) & _MASK32) + a_lo * b_hi
    return a_hi * b_hi + ((a_hi * b_lo) >> uint64(32)) + (cross >> uint64(32))


@njit(uint64(uint64, uint64, uint64, uint64), cache=True, inline="always")
def _mulmod_shoup(x, w, w_shoup, q):
    # x*w mod q given w_shoup = floor(w * 2**64 / q); requires x, w < q.
    hi = _umulhi(x, w_shoup)
    r = w * x - hi * q
    if r >= q:
        r -= q
    return r


@njit(uint64(uint64, uint64, uint64, uint64, uint64), cache=True, inline="always")
def _mulmod(a, b, q, r64, r64_shoup):
    # Generic a*b mod q with r64 = 2**64 mod q (and its Shoup companion).
    hi = _umulhi(a, b)
    lo = a * b  # mod 2**64
    res = _mulmod_shoup(hi % q, r64, r64_shoup, q)
    res += lo % q
    if res >= q:
        res -= q
    return res


@njit(cache=True)
def ntt_forward(a, psi_rev, psi_rev_shoup, q):
    """In-place negacyclic NTT (Cooley-Tukey, bit-reversed twiddles)."""
    n = a.shape[0]
    t = n
    m = 1
    while m < n:
        t >>= 1
        for i in range(m):
            j1 = 2 * i * t
            s = psi_rev[m + i]
            s_sh = psi_rev_shoup[m + i]
            for j in range(j1, j1 + t):
                u = a[j]
                v = _mulmod_shoup(a[j + t], s, s_sh, q)
                w = u + v
                if w >= q:
                    w -= q
                a[j] = w
                if u >= v:
                    a[j + t] = u - v
                else:
                    a[j + t] = u - v + q
        m <<= 1


@njit(cache=True)
def ntt_inverse(a, ipsi_rev, ipsi_rev_shoup, n_inv, n_inv_shoup, q):
    """In-place inverse negacyclic NTT (Gentleman-Sande)."""
    n = a.shape[0]
    t = 1
    m = n
    while m > 1:
        j1 = 0
        h = m >> 1
        for i in range(h):
            s = ipsi_rev[h + i]
            s_sh = ipsi_rev_shoup[h + i]
            for j in range(j1, j1 + t):
                u = a[j]
                v = a[j + t]
                w = u + v
                if w >= q:
                    w -= q
                a[j] = w
                if u >= v:
                    a[j + t] = _mulmod_shoup(u - v, s, s_sh, q)
                else:
                    a[j + t] = _mulmod_shoup(u - v + q, s, s_sh, q)
            j1 += 2 * t
        t <<= 1
        m >>= 1
    for j in range(n):
        a[j] = _mulmod_shoup(a[j], n_inv, n_inv_shoup, q)


@njit(cache=True)
def ntt_forward_batch(rows, psi_rev, psi_rev_shoup, q):
    for r in range(rows.shape[0]):
        ntt_forward(rows[r], psi_rev, psi_rev_shoup, q)


@njit(cache=True)
def pointwise_mul(out, a, b, q, r64, r64_shoup):
    for i in range(out.shape[0]):
        out[i] = _mulmod(a[i], b[i], q, r64, r64_shoup)


@njit(cache=True)
def pointwise_mac_shoup(acc, w, w_shoup, x, q):
    """acc += w * x (mod q) with precomputed Shoup companions for w."""
    for i in range(acc.shape[0]):
        p = _mulmod_shoup(x[i], w[i], w_shoup[i], q)
        t = acc[i] + p
        if t >= q:
            t -= q
        acc[i] = t


@njit(cache=True)
def scalar_mulmod(out, a, k, k_shoup, q):
    for i in range(out.shape[0]):
        out[i] = _mulmod_shoup(a[i], k, k_shoup, q)


def shoup_precompute(w: np.ndarray | int, q: int) -> np.ndarray | np.uint64:
    """floor(w * 2**64 / q) for scalars or arrays (exact big-int arithmetic)."""
    if np.isscalar(w) or isinstance(w, (int, np.integer)):
        return np.uint64((int(w) << 64) // q)
    flat = [(int(v) << 64) // q for v in np.asarray(w, dtype=np.uint64).ravel()]
    return np.array(flat, dtype=np.uint64).reshape(np.shape(w))
