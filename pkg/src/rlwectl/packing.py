"""Slot packing and the divide-and-conquer unpacking cascades.

A length-k vector is packed into the coefficients of X^0, X^(N/tau),
..., X^((k-1)N/tau) ("packing slots").  Unpacking splits the slots into
even/odd halves level by level: halve, apply X -> X^(zeta+1) to flip the
odd slots, add/subtract, shift by X^(-N/zeta), and finally reorder by
bit reversal.  The plaintext cascade is exact for arbitrary input
polynomials because slot positions map onto slot positions under every
odd-exponent automorphism; the ciphertext cascade replaces the
automorphism by its keyed counterpart, costing tau - 1 external products
and at most log2(tau) * d*N*sigma*nu of fresh slot error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automorphism import AutomorphismKey, ct_automorphism
from .counters import OpCounter
from .ring import ParameterError, Poly, RingParams, automorphism_pt, center, monomial_shift
from .rlwe import RlweCt, ct_add, ct_monomial_shift, ct_neg, plain_mul


@dataclass(frozen=True)
class PackLayout:
    """tau packing slots at stride N/tau."""

    params: RingParams
    tau: int

    def __post_init__(self):
        if self.tau < 1 or self.tau & (self.tau - 1):
            raise ParameterError("tau must be a power of two")
        if self.tau > self.params.N:
            raise ParameterError("tau cannot exceed the ring degree")

    @property
    def stride(self) -> int:
        return self.params.N // self.tau

    @classmethod
    def for_dims(cls, params: RingParams, *dims: int) -> "PackLayout":
        """Smallest power-of-two tau with tau >= max(dims)."""
        need = max(dims)
        tau = 1
        while tau < need:
            tau *= 2
        return cls(params, tau)

    def required_thetas(self) -> list[int]:
        """Automorphism exponents used by the ciphertext cascade."""
        return [2**xi + 1 for xi in range(1, self.tau.bit_length()) if 2**xi <= self.tau]


def pack(a, layout: PackLayout, counter: OpCounter | None = None) -> Poly:
    """sum_i a_i X^(i*N/tau); all non-slot coefficients zero."""
    vec = np.asarray(a, dtype=object).ravel()
    if vec.size > layout.tau:
        raise ParameterError(f"cannot pack {vec.size} values into {layout.tau} slots")
    if counter is not None:
        counter.pack_calls += 1
    c = np.zeros(layout.params.N, dtype=object)
    c[:: layout.stride][: vec.size] = vec
    return Poly(layout.params, center(c, layout.params.q))


def bit_reverse(idx: int, bits: int) -> int:
    """Reverse the `bits`-digit binary expansion of idx."""
    r = 0
    for _ in range(bits):
        r = (r << 1) | (idx & 1)
        idx >>= 1
    return r


def unpack_pt(m: Poly, k: int, layout: PackLayout, counter: OpCounter | None = None) -> np.ndarray:
    """First k slot coefficients of m, extracted by the halving cascade.

    Equal to reading m at indices 0, N/tau, ..., (k-1)N/tau directly,
    for arbitrary m.
    """
    if k > layout.tau:
        raise ParameterError("cannot unpack more values than slots")
    if counter is not None:
        counter.unpack_pt_calls += 1
    tau = layout.tau
    N = layout.params.N
    half = layout.params.half_inverse
    work: dict[int, Poly] = {0: m}
    zeta = tau
    while zeta > 1:
        for omega in range(0, tau, zeta):
            mw = _pt_scalar_mul(work[omega], half)
            tmp = automorphism_pt(mw, zeta + 1)
            work[omega + zeta // 2] = monomial_shift(
                Poly(mw.params, center(mw.coeffs - tmp.coeffs, mw.params.q)), -(N // zeta)
            )
            work[omega] = Poly(mw.params, center(mw.coeffs + tmp.coeffs, mw.params.q))
        zeta //= 2
    bits = tau.bit_length() - 1
    for idx in range(tau):
        br = bit_reverse(idx, bits)
        if idx < br:
            work[idx], work[br] = work[br], work[idx]
    return np.array([int(work[i].coeffs[0]) for i in range(k)], dtype=np.int64)


def _pt_scalar_mul(p: Poly, k: int) -> Poly:
    from .ring import get_context

    return Poly(p.params, get_context(p.params).scalar_mul(p.coeffs, k))


def unpack_ct(
    c: RlweCt,
    k: int,
    keys: dict[int, AutomorphismKey],
    layout: PackLayout,
    counter: OpCounter | None = None,
) -> list[RlweCt]:
    """Homomorphic slot extraction (the ciphertext cascade).

    The constant term of Dec(result[i]) carries slot i of Dec(c) plus
    error bounded by log2(tau) * sigma_Mult.
    """
    if k > layout.tau:
        raise ParameterError("cannot unpack more values than slots")
    for theta in layout.required_thetas():
        if theta not in keys:
            raise ParameterError(f"missing automorphism key for theta={theta}")
    if counter is None:
        return _unpack_ct_inner(c, k, keys, layout, None)
    with counter.unpack_scope():
        return _unpack_ct_inner(c, k, keys, layout, counter)


def _unpack_ct_inner(c, k, keys, layout, counter) -> list[RlweCt]:
    tau = layout.tau
    N = layout.params.N
    half = layout.params.half_inverse
    work: dict[int, RlweCt] = {0: c}
    zeta = tau
    while zeta > 1:
        for omega in range(0, tau, zeta):
            cw = plain_mul(half, work[omega])
            tmp = ct_automorphism(cw, keys[zeta + 1], counter)
            diff = ct_add(cw, ct_neg(tmp))
            if counter is not None:
                counter.count_add()
            work[omega + zeta // 2] = ct_monomial_shift(diff, -(N // zeta))
            work[omega] = ct_add(cw, tmp)
            if counter is not None:
                counter.count_add()
        zeta //= 2
    bits = tau.bit_length() - 1
    for idx in range(tau):
        br = bit_reverse(idx, bits)
        if idx < br:
            work[idx], work[br] = work[br], work[idx]
    return [work[i] for i in range(k)]


def slot_project(m: Poly, layout: PackLayout) -> Poly:
    """Zero all non-slot coefficients."""
    out = np.zeros(layout.params.N, dtype=np.int64)
    out[:: layout.stride] = m.coeffs[:: layout.stride]
    return Poly(layout.params, out)
