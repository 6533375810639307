"""Ring-LWE keys, encryption, decryption and additive homomorphism.

Error polynomials are truncated discrete Gaussians: rounded continuous
Gaussian samples rejected outside the hard bound sigma.  All randomness
is drawn from numpy Generators handed in by the caller, so a run is
reproducible from a single root seed.  The uniform mask is a 64-bit draw
reduced mod q; for the moduli used here the bias is below 2**-7, which
is acceptable for simulation work but not cryptographic-grade.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ring import ParameterError, Poly, RingParams, center, get_context, poly_add


@dataclass(frozen=True)
class ErrorDist:
    """Truncated discrete Gaussian: std `sd`, hard bound `sigma` (|e| <= sigma)."""

    sd: float
    sigma: float

    def __post_init__(self):
        if self.sd <= 0 or self.sigma <= 0:
            raise ParameterError("error distribution needs sd > 0 and sigma > 0")


@dataclass
class SecretKey:
    sk: Poly
    dist: ErrorDist


@dataclass(eq=False)
class RlweCt:
    """Ciphertext pair [b; a] with b = sk*a + m + e."""

    b: Poly
    a: Poly

    def __post_init__(self):
        if self.b.params != self.a.params:
            raise ParameterError("ciphertext components disagree on ring parameters")

    @property
    def params(self) -> RingParams:
        return self.b.params


def sample_error(
    dist: ErrorDist, params: RingParams, rng: np.random.Generator, granularity: int = 1
) -> Poly:
    """N coefficients of the truncated Gaussian; resamples past the bound.

    With granularity g > 1 the samples are multiples of g, drawn as
    g * round(N(0, sd/g)) truncated at g * floor(sigma/g), so the bound
    |e| <= sigma and the effective standard deviation are preserved.
    The slot-extraction cascade relies on this: errors injected by an
    automorphism key used at halving level zeta must be divisible by
    zeta/2 for the in-cascade multiplications by (q+1)/2 to act as exact
    integer halvings on the error slots.
    """
    g = int(granularity)
    bound = int(np.floor(dist.sigma / g))
    sd = dist.sd / g
    out = np.empty(params.N, dtype=np.int64)
    need = np.ones(params.N, dtype=bool)
    while need.any():
        draw = np.rint(rng.normal(0.0, sd, size=int(need.sum()))).astype(np.int64)
        ok = np.abs(draw) <= bound
        idx = np.flatnonzero(need)[ok]
        out[idx] = draw[ok]
        need[idx] = False
    return Poly(params, out * g)


def sample_uniform(params: RingParams, rng: np.random.Generator) -> Poly:
    raw = rng.integers(0, params.q, size=params.N, dtype=np.uint64)
    return Poly(params, center(raw.astype(np.int64), params.q))


def keygen(params: RingParams, dist: ErrorDist, rng: np.random.Generator) -> SecretKey:
    return SecretKey(sample_error(dist, params, rng), dist)


def enc_traced(
    m: Poly, sk: SecretKey, rng: np.random.Generator, err_granularity: int = 1
) -> tuple[RlweCt, Poly, Poly]:
    """Encrypt and also return (mask a, error e) for white-box tests."""
    params = m.params
    a = sample_uniform(params, rng)
    e = sample_error(sk.dist, params, rng, err_granularity)
    ctx = get_context(params)
    b = center(ctx.mul(sk.sk.coeffs, a.coeffs) + m.coeffs + e.coeffs, params.q)
    return RlweCt(Poly(params, b), a), a, e


def enc(
    m: Poly, sk: SecretKey, rng: np.random.Generator, err_granularity: int = 1
) -> RlweCt:
    return enc_traced(m, sk, rng, err_granularity)[0]


def dec(c: RlweCt, sk: SecretKey) -> Poly:
    ctx = get_context(c.params)
    return Poly(c.params, center(c.b.coeffs - ctx.mul(sk.sk.coeffs, c.a.coeffs), c.params.q))


def ct_add(c1: RlweCt, c2: RlweCt) -> RlweCt:
    return RlweCt(poly_add(c1.b, c2.b), poly_add(c1.a, c2.a))


def ct_neg(c: RlweCt) -> RlweCt:
    q = c.params.q
    return RlweCt(
        Poly(c.params, center(-c.b.coeffs, q)), Poly(c.params, center(-c.a.coeffs, q))
    )


def plain_mul(k: Poly | int, c: RlweCt) -> RlweCt:
    """k * c for a plaintext polynomial or integer scalar k."""
    ctx = get_context(c.params)
    if isinstance(k, (int, np.integer)):
        return RlweCt(
            Poly(c.params, ctx.scalar_mul(c.b.coeffs, int(k))),
            Poly(c.params, ctx.scalar_mul(c.a.coeffs, int(k))),
        )
    if k.params != c.params:
        raise ParameterError("plaintext factor lives in a different ring")
    return RlweCt(
        Poly(c.params, ctx.mul(k.coeffs, c.b.coeffs)),
        Poly(c.params, ctx.mul(k.coeffs, c.a.coeffs)),
    )


def ct_monomial_shift(c: RlweCt, e: int) -> RlweCt:
    from .ring import monomial_shift

    return RlweCt(monomial_shift(c.b, e), monomial_shift(c.a, e))


def zero_ct(params: RingParams) -> RlweCt:
    """The trivial encryption of 0 (zero mask, zero error): additive identity."""
    from .ring import zero

    return RlweCt(zero(params), zero(params))


# -- scaled encode/decode (exact recovery when 1/L > 2 sigma) ---------------


def enc_scaled(m: Poly, l_inv: int, sk: SecretKey, rng: np.random.Generator) -> RlweCt:
    """Encrypt m / L = m * (1/L) mod q, with 1/L a positive integer."""
    if l_inv < 1:
        raise ParameterError("1/L must be a positive integer")
    params = m.params
    scaled = center(m.coeffs.astype(object) * int(l_inv), params.q)
    return enc(Poly(params, scaled), sk, rng)


def round_div(values: np.ndarray, k: int) -> np.ndarray:
    """Round-half-away-from-zero division of integers by positive k."""
    v = np.asarray(values, dtype=np.int64)
    out = np.where(v >= 0, (v + k // 2) // k, -((-v + k // 2) // k))
    return out.astype(np.int64)


def dec_scaled(c: RlweCt, l_inv: int, sk: SecretKey) -> Poly:
    """round(L * Dec(c)) mod q; exact inverse of enc_scaled in range."""
    raw = dec(c, sk)
    return Poly(c.params, center(round_div(raw.coeffs, int(l_inv)), c.params.q))
