"""Ring-GSW encryption, gadget decomposition and the external product.

A GSW ciphertext is a 2 x 2d matrix over R_q: the plaintext times the
gadget matrix G = [1 nu ... nu^(d-1)] (x) I_2 plus 2d fresh encryptions
of zero.  Multiplying a Ring-LWE ciphertext by a GSW ciphertext (the
external product) decomposes the pair into balanced base-nu digits and
takes the matrix-vector product, which injects a fresh error bounded by
d*N*sigma*nu no matter how much error the input ciphertext already
carries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .counters import OpCounter
from .ring import ParameterError, Poly, RingParams, center, get_context
from .rlwe import RlweCt, SecretKey, ct_add, enc


@dataclass(frozen=True)
class Gadget:
    """Decomposition base nu (power of two) and digit count d."""

    nu: int
    d: int

    def __post_init__(self):
        if self.nu < 2 or self.nu & (self.nu - 1):
            raise ParameterError("nu must be a power of two >= 2")
        if self.d < 1:
            raise ParameterError("d must be positive")

    @classmethod
    def for_modulus(cls, q: int, nu: int) -> "Gadget":
        """Smallest d with nu**d >= q (then nu**(d-1) < q <= nu**d holds)."""
        d = 1
        while nu**d < q:
            d += 1
        return cls(nu, d)

    def validate(self, q: int):
        if not (self.nu ** (self.d - 1) < q <= self.nu**self.d):
            raise ParameterError(
                f"gadget (nu={self.nu}, d={self.d}) does not cover modulus {q}"
            )


@dataclass(eq=False)
class RgswCt:
    """2 x 2d matrix of ring elements; mat has shape (2, 2d, N), centered."""

    params: RingParams
    gadget: Gadget
    mat: np.ndarray

    def __post_init__(self):
        expect = (2, 2 * self.gadget.d, self.params.N)
        if self.mat.shape != expect:
            raise ParameterError(f"GSW matrix shape {self.mat.shape} != {expect}")
        self._ntt = None
        self._ntt_sh = None

    def ntt_cache(self):
        """Rows in NTT domain with Shoup companions (computed once)."""
        if self._ntt is None:
            ctx = get_context(self.params)
            rows = ctx.to_unsigned(self.mat.reshape(-1, self.params.N))
            ctx.ntt_batch_inplace(rows)
            self._ntt = rows.reshape(self.mat.shape)
            self._ntt_sh = kernels.shoup_precompute(self._ntt, self.params.q)
        return self._ntt, self._ntt_sh


def decompose_arrays(b: np.ndarray, a: np.ndarray, g: Gadget) -> np.ndarray:
    """Balanced base-nu digits of a ciphertext pair, shape (2d, N).

    Row 2i holds the i-th digit of b, row 2i+1 the i-th digit of a
    (matching the gadget column order).  Digits lie in [-nu/2, nu/2) and
    sum(digit_i * nu^i) reproduces the centered input exactly.
    """
    nu, d = g.nu, g.d
    half = nu // 2
    log_nu = nu.bit_length() - 1
    out = np.empty((2 * d, b.shape[0]), dtype=np.int64)
    for row, x in ((0, b), (1, a)):
        x = x.astype(np.int64).copy()
        for i in range(d):
            r = ((x + half) & (nu - 1)) - half
            out[2 * i + row] = r
            x = (x - r) >> log_nu
        if np.any(x):
            raise ParameterError("decomposition did not terminate; gadget too small")
    return out


def decompose(c: RlweCt, g: Gadget) -> list[RlweCt]:
    """D(c) as d ciphertext-shaped digit pairs (for tests and inspection)."""
    rows = decompose_arrays(c.b.coeffs, c.a.coeffs, g)
    params = c.params
    return [
        RlweCt(Poly(params, rows[2 * i]), Poly(params, rows[2 * i + 1]))
        for i in range(g.d)
    ]


def gadget_recompose(digits: list[RlweCt], g: Gadget, params: RingParams) -> RlweCt:
    """G * D(c): exact integer recomposition, then centered reduction."""
    b = np.zeros(params.N, dtype=object)
    a = np.zeros(params.N, dtype=object)
    for i, ct in enumerate(digits):
        b += ct.b.coeffs.astype(object) * g.nu**i
        a += ct.a.coeffs.astype(object) * g.nu**i
    return RlweCt(Poly(params, center(b, params.q)), Poly(params, center(a, params.q)))


def enc_gsw(
    m: Poly, sk: SecretKey, g: Gadget, rng: np.random.Generator, err_granularity: int = 1
) -> RgswCt:
    """M * G + [Enc(0) ... Enc(0)] mod q with 2d fresh zero-encryptions."""
    params = m.params
    g.validate(params.q)
    q = params.q
    mat = np.empty((2, 2 * g.d, params.N), dtype=np.int64)
    for i in range(g.d):
        scaled = center(m.coeffs.astype(object) * g.nu**i, q)
        for comp in (0, 1):
            col = enc(
                Poly(params, np.zeros(params.N, dtype=np.int64)), sk, rng, err_granularity
            )
            b, a = col.b.coeffs.copy(), col.a.coeffs.copy()
            if comp == 0:
                b = center(b + scaled, q)
            else:
                a = center(a + scaled, q)
            mat[0, 2 * i + comp] = b
            mat[1, 2 * i + comp] = a
    return RgswCt(params, g, mat)


def external_product(C: RgswCt, c: RlweCt, counter: OpCounter | None = None) -> RlweCt:
    """C (x) c = C * D(c) mod q; returns a Ring-LWE ciphertext."""
    if C.params != c.params:
        raise ParameterError("external product operands disagree on parameters")
    if counter is not None:
        counter.count_ext_prod()
    params = C.params
    ctx = get_context(params)
    digits = decompose_arrays(c.b.coeffs, c.a.coeffs, C.gadget)
    # Digit rows of an identically-zero component contribute nothing;
    # skipping them is bit-identical (automorphisms feed [psi(a); 0]).
    b_live = bool(c.b.coeffs.any())
    a_live = bool(c.a.coeffs.any())
    live = [j for j in range(2 * C.gadget.d) if (b_live if j % 2 == 0 else a_live)]
    if params.ntt_ready:
        du = ctx.to_unsigned(digits[live])
        ctx.ntt_batch_inplace(du)
        w, w_sh = C.ntt_cache()
        qa = np.uint64(params.q)
        out = np.zeros((2, params.N), dtype=np.uint64)
        for k, j in enumerate(live):
            kernels.pointwise_mac_shoup(out[0], w[0, j], w_sh[0, j], du[k], qa)
            kernels.pointwise_mac_shoup(out[1], w[1, j], w_sh[1, j], du[k], qa)
        b = ctx.to_centered(ctx.intt(out[0]))
        a = ctx.to_centered(ctx.intt(out[1]))
    else:
        acc = np.zeros((2, params.N), dtype=np.int64)
        for j in live:
            acc[0] = center(acc[0] + ctx.mul(C.mat[0, j], digits[j]), params.q)
            acc[1] = center(acc[1] + ctx.mul(C.mat[1, j], digits[j]), params.q)
        b, a = acc[0], acc[1]
    return RlweCt(Poly(params, b), Poly(params, a))


def gsw_matvec(
    K: list[list[RgswCt]], cts: list[RlweCt], counter: OpCounter | None = None
) -> list[RlweCt]:
    """Homomorphic K * c for an h x l matrix of GSW ciphertexts.

    Row sums are evaluated with homomorphic additions in ascending
    column order, one external product per matrix cell.
    """
    h = len(K)
    out: list[RlweCt] = []
    for i in range(h):
        if len(K[i]) != len(cts):
            raise ParameterError(
                f"matrix row {i} has {len(K[i])} entries, expected {len(cts)}"
            )
        acc = external_product(K[i][0], cts[0], counter)
        for j in range(1, len(cts)):
            acc = ct_add(acc, external_product(K[i][j], cts[j], counter))
            if counter is not None:
                counter.count_add()
        out.append(acc)
    return out
