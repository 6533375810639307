"""Exact arithmetic in R_q = Z_q[X]/(X^N + 1) with centered coefficients.

Coefficients are stored as int64 values in the centered interval
[-q/2, q/2).  Negacyclic multiplication runs through a number-theoretic
transform whenever q = 1 (mod 2N); otherwise it falls back to an exact
coefficient-domain path (schoolbook for small N, big-integer Kronecker
substitution for large N) and records the fallback in a diagnostics
counter.  All paths agree bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class ParameterError(ValueError):
    """Raised on mismatched or invalid ring parameters."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _is_odd_prime(n: int) -> bool:
    if n < 3 or n % 2 == 0:
        return False
    # Deterministic Miller-Rabin, valid for n < 3.3e24.
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class RingParams:
    """Ring degree N (power of two) and odd prime modulus q (< 2**63)."""

    N: int
    q: int

    def __post_init__(self):
        if not _is_power_of_two(self.N):
            raise ParameterError(f"N={self.N} is not a power of two")
        if not _is_odd_prime(self.q):
            raise ParameterError(f"q={self.q} is not an odd prime")
        if self.q.bit_length() > 62:
            raise ParameterError("q must fit in 62 bits for the kernel arithmetic")

    @property
    def ntt_ready(self) -> bool:
        return self.q % (2 * self.N) == 1

    @property
    def half_inverse(self) -> int:
        """(q+1)/2, the multiplicative inverse of two in Z_q."""
        return (self.q + 1) // 2


@dataclass(eq=False)
class Poly:
    """Element of R_q; `coeffs` has length N, centered in [-q/2, q/2)."""

    params: RingParams
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.int64)
        if c.shape != (self.params.N,):
            raise ParameterError(f"expected {self.params.N} coefficients, got {c.shape}")
        self.coeffs = c

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.params == other.params
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    def copy(self) -> "Poly":
        return Poly(self.params, self.coeffs.copy())


def center(values: np.ndarray, q: int) -> np.ndarray:
    """Reduce integers to centered representatives in [-q/2, q/2)."""
    v = np.asarray(values)
    if v.dtype == object:
        r = np.array([int(x) % q for x in v.ravel()], dtype=object).reshape(v.shape)
        r = r - (r > q // 2) * q
        return r.astype(np.int64)
    r = np.mod(v, q)
    return (r - (r > q // 2) * q).astype(np.int64)


def poly_from_list(params: RingParams, coeffs) -> Poly:
    c = np.zeros(params.N, dtype=object)
    for i, v in enumerate(coeffs):
        c[i] = int(v)
    return Poly(params, center(c, params.q))


def zero(params: RingParams) -> Poly:
    return Poly(params, np.zeros(params.N, dtype=np.int64))


def constant(params: RingParams, value: int) -> Poly:
    c = np.zeros(params.N, dtype=np.int64)
    c[0] = center(np.array([value], dtype=object), params.q)[0]
    return Poly(params, c)


def monomial(params: RingParams, e: int) -> Poly:
    """X^e as a ring element (e may be negative; X^(-k) = -X^(N-k))."""
    return monomial_shift(constant(params, 1), e)


def _check_same(a: Poly, b: Poly):
    if a.params != b.params:
        raise ParameterError("operands live in different rings")


def poly_add(a: Poly, b: Poly) -> Poly:
    _check_same(a, b)
    return Poly(a.params, center(a.coeffs.astype(np.int64) + b.coeffs, a.params.q))


def poly_sub(a: Poly, b: Poly) -> Poly:
    _check_same(a, b)
    return Poly(a.params, center(a.coeffs.astype(np.int64) - b.coeffs, a.params.q))


def poly_neg(a: Poly) -> Poly:
    return Poly(a.params, center(-a.coeffs, a.params.q))


def scalar_mul(k: int, a: Poly) -> Poly:
    """k * a for an integer scalar k."""
    ctx = get_context(a.params)
    return Poly(a.params, ctx.scalar_mul(a.coeffs, int(k)))


def inf_norm(a: Poly) -> int:
    """Max absolute centered coefficient."""
    if a.coeffs.size == 0:
        return 0
    return int(np.max(np.abs(a.coeffs)))


def monomial_shift(a: Poly, e: int) -> Poly:
    """a * X^e;  e is reduced mod 2N and X^N acts as -1."""
    N = a.params.N
    e = e % (2 * N)
    sign = 1
    if e >= N:
        e -= N
        sign = -1
    rolled = np.roll(a.coeffs, e)
    if e:
        rolled[:e] = -rolled[:e]
    return Poly(a.params, center(sign * rolled, a.params.q))


def automorphism_pt(a: Poly, theta: int) -> Poly:
    """Psi_theta: X -> X^theta on plaintext polynomials (theta odd)."""
    if theta % 2 == 0:
        raise ParameterError("automorphism exponent must be odd")
    N = a.params.N
    theta = theta % (2 * N)
    idx = (np.arange(N) * theta) % (2 * N)
    out = np.zeros(N, dtype=np.int64)
    sign = np.where(idx >= N, -1, 1)
    pos = np.where(idx >= N, idx - N, idx)
    out[pos] = sign * a.coeffs
    return Poly(a.params, center(out, a.params.q))


def negacyclic_mul_schoolbook(a: Poly, b: Poly) -> Poly:
    """O(N^2) reference product: exact convolution, X^N folded as -1.

    This is the oracle every fast path must match bit-for-bit.
    """
    _check_same(a, b)
    N = a.params.N
    conv = np.convolve(a.coeffs.astype(object), b.coeffs.astype(object))
    folded = np.zeros(N, dtype=object)
    folded += conv[:N]
    folded[: N - 1] -= conv[N:]
    return Poly(a.params, center(folded, a.params.q))


def negacyclic_mul(a: Poly, b: Poly) -> Poly:
    """Product in R_q; NTT when q = 1 (mod 2N), exact fallback otherwise."""
    _check_same(a, b)
    ctx = get_context(a.params)
    return Poly(a.params, ctx.mul(a.coeffs, b.coeffs))


# ---------------------------------------------------------------------------
# Per-(N, q) arithmetic context with cached NTT tables.


def _bit_reverse_int(x: int, bits: int) -> int:
    r = 0
    for _ in range(bits):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


def _find_psi(q: int, two_n: int) -> int:
    """Primitive 2N-th root of unity mod q (q = 1 mod 2N, 2N a power of 2).

    psi = x^((q-1)/2N) has order exactly 2N iff psi^N = -1, which holds
    iff x is a quadratic non-residue; no factorization of q-1 needed.
    """
    for x in range(2, 10000):
        if pow(x, (q - 1) // 2, q) == q - 1:
            return pow(x, (q - 1) // two_n, q)
    raise ParameterError("no quadratic non-residue found (q prime?)")


@dataclass
class RingContext:
    """Cached tables and fallback diagnostics for one (N, q) pair."""

    params: RingParams
    fallback_count: int = 0

    def __post_init__(self):
        q, N = self.params.q, self.params.N
        self._r64 = np.uint64((1 << 64) % q)
        self._r64_sh = kernels.shoup_precompute((1 << 64) % q, q)
        self._qu = np.uint64(q)
        if self.params.ntt_ready:
            psi = _find_psi(q, 2 * N)
            bits = N.bit_length() - 1
            psis = [pow(psi, i, q) for i in range(N)]
            ipsi = pow(psi, q - 2, q)
            ipsis = [pow(ipsi, i, q) for i in range(N)]
            self.psi_rev = np.array(
                [psis[_bit_reverse_int(i, bits)] for i in range(N)], dtype=np.uint64
            )
            self.ipsi_rev = np.array(
                [ipsis[_bit_reverse_int(i, bits)] for i in range(N)], dtype=np.uint64
            )
            self.psi_rev_sh = kernels.shoup_precompute(self.psi_rev, q)
            self.ipsi_rev_sh = kernels.shoup_precompute(self.ipsi_rev, q)
            n_inv = pow(N, q - 2, q)
            self.n_inv = np.uint64(n_inv)
            self.n_inv_sh = kernels.shoup_precompute(n_inv, q)
        # Kronecker packing width: product coefficients are bounded by
        # N * (q/2)^2 and digits carry a sign, so 2*bits(q) + log2(N) + 2
        # bits suffice; round up to whole bytes.
        self._kron_bytes = (2 * q.bit_length() + N.bit_length() + 2 + 7) // 8

    # -- representation helpers ------------------------------------------

    def to_unsigned(self, centered: np.ndarray) -> np.ndarray:
        out = centered.astype(np.int64).copy()
        out[out < 0] += self.params.q
        return out.astype(np.uint64)

    def to_centered(self, unsigned: np.ndarray) -> np.ndarray:
        q = self.params.q
        out = unsigned.astype(np.int64)
        np.subtract(out, q, out=out, where=out > q // 2)
        return out

    # -- forward/backward transforms on unsigned arrays -------------------

    def ntt(self, unsigned: np.ndarray) -> np.ndarray:
        a = unsigned.copy()
        kernels.ntt_forward(a, self.psi_rev, self.psi_rev_sh, self._qu)
        return a

    def ntt_batch_inplace(self, rows: np.ndarray):
        kernels.ntt_forward_batch(rows, self.psi_rev, self.psi_rev_sh, self._qu)

    def intt(self, unsigned: np.ndarray) -> np.ndarray:
        a = unsigned.copy()
        kernels.ntt_inverse(a, self.ipsi_rev, self.ipsi_rev_sh, self.n_inv, self.n_inv_sh, self._qu)
        return a

    # -- products ----------------------------------------------------------

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.params.ntt_ready:
            fa = self.ntt(self.to_unsigned(a))
            fb = self.ntt(self.to_unsigned(b))
            out = np.empty_like(fa)
            kernels.pointwise_mul(out, fa, fb, self._qu, self._r64, self._r64_sh)
            return self.to_centered(self.intt(out))
        self.fallback_count += 1
        if self.params.N <= 64:
            return negacyclic_mul_schoolbook(
                Poly(self.params, a), Poly(self.params, b)
            ).coeffs
        return self._mul_kronecker(a, b)

    def _mul_kronecker(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact negacyclic product via big-integer (Kronecker) packing.

        Bit-identical to the schoolbook path: the packed product is the
        exact integer convolution, folded and reduced the same way.
        """
        N, q, W = self.params.N, self.params.q, self._kron_bytes
        au = self.to_unsigned(a)
        bu = self.to_unsigned(b)
        abig = int.from_bytes(
            b"".join(int(v).to_bytes(W, "little") for v in au), "little"
        )
        bbig = int.from_bytes(
            b"".join(int(v).to_bytes(W, "little") for v in bu), "little"
        )
        prod = (abig * bbig).to_bytes(2 * N * W, "little")
        conv = [
            int.from_bytes(prod[i * W : (i + 1) * W], "little") for i in range(2 * N)
        ]
        folded = np.array(
            [conv[i] - (conv[N + i] if i < N - 1 else 0) for i in range(N)],
            dtype=object,
        )
        return center(folded, q)

    def scalar_mul(self, a: np.ndarray, k: int) -> np.ndarray:
        q = self.params.q
        k = int(k) % q
        au = self.to_unsigned(a)
        out = np.empty_like(au)
        kernels.scalar_mulmod(out, au, np.uint64(k), kernels.shoup_precompute(k, q), self._qu)
        return self.to_centered(out)


_CONTEXTS: dict[RingParams, RingContext] = {}


def get_context(params: RingParams) -> RingContext:
    ctx = _CONTEXTS.get(params)
    if ctx is None:
        ctx = RingContext(params)
        _CONTEXTS[params] = ctx
    return ctx
