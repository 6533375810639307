"""Keyed ciphertext automorphisms.

The automorphism key for X -> X^theta is a GSW encryption of the mapped
secret key; applying it to a ciphertext costs one external product and
injects error bounded by d*N*sigma*nu, independent of the error already
present in the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counters import OpCounter
from .gsw import Gadget, RgswCt, enc_gsw, external_product
from .ring import ParameterError, Poly, automorphism_pt, zero
from .rlwe import RlweCt, SecretKey


@dataclass(eq=False)
class AutomorphismKey:
    theta: int
    ak: RgswCt

    def __post_init__(self):
        if self.theta % 2 == 0:
            raise ParameterError("automorphism exponent must be odd")


def gen_autokey(
    theta: int,
    sk: SecretKey,
    g: Gadget,
    rng: np.random.Generator,
    err_granularity: int = 1,
) -> AutomorphismKey:
    """GSW encryption of the mapped secret key.

    A key of the form theta = zeta + 1 that feeds the slot-extraction
    cascade must use err_granularity = zeta/2: the cascade halves its
    injected error zeta-dependent many times and the halvings are exact
    only when the error is divisible by that power of two.  The bound
    |e| <= sigma is preserved, so every stated error bound is unchanged.
    """
    if theta % 2 == 0:
        raise ParameterError("automorphism exponent must be odd")
    theta = theta % (2 * sk.sk.params.N)
    ak = enc_gsw(automorphism_pt(sk.sk, theta), sk, g, rng, err_granularity)
    return AutomorphismKey(theta, ak)


def ct_automorphism(
    c: RlweCt, key: AutomorphismKey, counter: OpCounter | None = None
) -> RlweCt:
    """[Psi(b); 0] - ak (x) [Psi(a); 0]: decrypts to Psi(Dec(c)) + error."""
    params = c.params
    if key.ak.params != params:
        raise ParameterError("automorphism key parameters do not match ciphertext")
    psi_b = automorphism_pt(c.b, key.theta)
    psi_a = automorphism_pt(c.a, key.theta)
    prod = external_product(key.ak, RlweCt(psi_a, zero(params)), counter)
    q = params.q
    from .ring import center

    return RlweCt(
        Poly(params, center(psi_b.coeffs - prod.b.coeffs, q)),
        Poly(params, center(-prod.a.coeffs, q)),
    )
