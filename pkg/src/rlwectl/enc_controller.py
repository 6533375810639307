"""Encrypted linear dynamic controllers (element-wise and slot-packed).

Offline, the controller parameters are scaled to integers and GSW
encrypted; the state is Ring-LWE encrypted.  Online, each step is a
fixed dance of external products and homomorphic additions; the
controller never sees the secret key and the state ciphertext is only
ever advanced homomorphically (no re-encryption, no refresh).  The
output is computed from the pre-update state, matching u(t) = H x(t).

Sensor and actuator are the only key-holding roles: the sensor
quantizes and encrypts measurements, the actuator decrypts outputs and
scales them back to engineering units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automorphism import AutomorphismKey, gen_autokey
from .control import NominalController, quantize_output, round_half_away
from .counters import OpCounter
from .gsw import Gadget, RgswCt, enc_gsw, external_product, gsw_matvec
from .packing import PackLayout, pack, unpack_ct, unpack_pt
from .ring import ParameterError, Poly, RingParams, center, constant
from .rlwe import RlweCt, SecretKey, ct_add, dec, enc


class IntegralityError(ValueError):
    """Controller parameters are not exactly representable at their scale."""


@dataclass(frozen=True)
class Scales:
    """Sensor step r, parameter scale s = 1/s_inv, headroom L = 1/l_inv."""

    r: float
    s_inv: int
    l_inv: int

    def __post_init__(self):
        if self.r <= 0 or self.s_inv < 1 or self.l_inv < 1:
            raise ParameterError("scales need r > 0 and integer 1/s, 1/L")

    @property
    def s(self) -> float:
        return 1.0 / self.s_inv

    @property
    def L(self) -> float:
        return 1.0 / self.l_inv

    @property
    def rsL(self) -> float:
        return self.r * self.s * self.L

    @property
    def rs2L(self) -> float:
        return self.r * self.s * self.s * self.L


def _to_int_matrix(M, scale_inv: int, what: str) -> np.ndarray:
    scaled = np.asarray(M, dtype=float) * scale_inv
    ints = round_half_away(scaled)
    if np.max(np.abs(scaled - ints)) > 1e-6:
        raise IntegralityError(f"{what} is not integer at scale 1/{scale_inv}")
    return ints.astype(np.int64)


def encode_initial_state(x_ini, scales: Scales) -> np.ndarray:
    # Two-stage: x/(r s) must be integer (the representability contract),
    # then the exact integer is multiplied by 1/L.
    base = np.asarray(x_ini, dtype=float) / (scales.r * scales.s)
    ints = round_half_away(base)
    if np.max(np.abs(base - ints)) > 1e-6:
        raise IntegralityError("x_ini is not integer at scale r*s")
    return (ints.astype(np.int64)) * np.int64(scales.l_inv)


# ---------------------------------------------------------------------------
# Sensor / actuator roles (hold the secret key).


def sensor_encrypt(
    y,
    scales: Scales,
    sk: SecretKey,
    rng: np.random.Generator,
    counter: OpCounter | None = None,
) -> list[RlweCt]:
    """Enc(round(y/r) / L mod q), one ciphertext per component."""
    params = sk.sk.params
    ints = quantize_output(y, scales.r).astype(object) * scales.l_inv
    cts = []
    for v in ints:
        cts.append(enc(constant(params, int(v)), sk, rng))
        if counter is not None:
            counter.count_enc()
    return cts


def actuate_naive(
    u_cts: list[RlweCt],
    scales: Scales,
    sk: SecretKey,
    counter: OpCounter | None = None,
) -> np.ndarray:
    """r s^2 L times the constant term of each decryption."""
    vals = []
    for c in u_cts:
        vals.append(int(dec(c, sk).coeffs[0]))
        if counter is not None:
            counter.count_dec()
    return np.array(vals, dtype=float) * scales.rs2L


def sensor_encrypt_packed(
    y,
    scales: Scales,
    sk: SecretKey,
    layout: PackLayout,
    rng: np.random.Generator,
    counter: OpCounter | None = None,
) -> RlweCt:
    """Enc(Pack_p(round(y/r) / L mod q)): one ciphertext for the whole vector."""
    ints = quantize_output(y, scales.r).astype(object) * scales.l_inv
    m = pack(ints, layout, counter)
    ct = enc(m, sk, rng)
    if counter is not None:
        counter.count_enc()
    return ct


def actuate_packed(
    u_ct: RlweCt,
    m: int,
    scales: Scales,
    sk: SecretKey,
    layout: PackLayout,
    counter: OpCounter | None = None,
) -> np.ndarray:
    """r s^2 L times the first m slots of the decryption."""
    pt = dec(u_ct, sk)
    if counter is not None:
        counter.count_dec()
    slots = unpack_pt(pt, m, layout, counter)
    return slots.astype(float) * scales.rs2L


# ---------------------------------------------------------------------------
# Element-wise encrypted controller.


class EncControllerNaive:
    """GSW-encrypted F, G, H applied entry-wise to a vector of state ciphertexts."""

    def __init__(self, params, gadget, F_ct, G_ct, H_ct, x_ct, scales, dims):
        self.params = params
        self.gadget = gadget
        self.F_ct = F_ct
        self.G_ct = G_ct
        self.H_ct = H_ct
        self.x_ct = x_ct
        self.scales = scales
        self.n, self.p_in, self.m = dims
        self.counter = OpCounter()

    @classmethod
    def setup(
        cls,
        ctrl: NominalController,
        scales: Scales,
        sk: SecretKey,
        gadget: Gadget,
        rng: np.random.Generator,
    ) -> "EncControllerNaive":
        params = sk.sk.params
        F = ctrl.F.astype(np.int64)
        G_int = _to_int_matrix(ctrl.G, scales.s_inv, "G")
        H_int = _to_int_matrix(ctrl.H, scales.s_inv, "H")
        x_int = encode_initial_state(ctrl.x_ini, scales)

        def enc_matrix(M):
            return [
                [enc_gsw(constant(params, int(v)), sk, gadget, rng) for v in row]
                for row in M
            ]

        F_ct = enc_matrix(F)
        G_ct = enc_matrix(G_int)
        H_ct = enc_matrix(H_int)
        x_ct = [enc(constant(params, int(v)), sk, rng) for v in x_int]
        inst = cls(
            params, gadget, F_ct, G_ct, H_ct, x_ct, scales, (ctrl.n, ctrl.p_in, ctrl.m)
        )
        inst.warm()
        return inst

    def warm(self):
        """Precompute NTT caches offline so steps carry no one-time cost."""
        if self.params.ntt_ready:
            for mat in (self.F_ct, self.G_ct, self.H_ct):
                for row in mat:
                    for ct in row:
                        ct.ntt_cache()

    def output(self) -> list[RlweCt]:
        """u(t) = H (x) x(t), from the current (pre-update) state."""
        return gsw_matvec(self.H_ct, self.x_ct, self.counter)

    def update(self, y_cts: list[RlweCt]):
        """x(t+1) = (F (x) x(t)) (+) (G (x) y(t))."""
        if len(y_cts) != self.p_in:
            raise ParameterError(f"expected {self.p_in} input ciphertexts")
        fx = gsw_matvec(self.F_ct, self.x_ct, self.counter)
        gy = gsw_matvec(self.G_ct, y_cts, self.counter)
        new_x = []
        for i in range(self.n):
            new_x.append(ct_add(fx[i], gy[i]))
            self.counter.count_add()
        self.x_ct = new_x

    def step(self, y_cts: list[RlweCt]) -> list[RlweCt]:
        u = self.output()
        self.update(y_cts)
        return u

    def gsw_ciphertext_count(self) -> int:
        return self.n * self.n + self.n * self.p_in + self.m * self.n


# ---------------------------------------------------------------------------
# Slot-packed encrypted controller.


class EncControllerPacked:
    """Column-packed GSW parameters with a single slot-packed state ciphertext."""

    def __init__(self, params, gadget, layout, F_cols, G_cols, H_cols, x_ct, autokeys, scales, dims):
        self.params = params
        self.gadget = gadget
        self.layout = layout
        self.F_cols = F_cols
        self.G_cols = G_cols
        self.H_cols = H_cols
        self.x_ct = x_ct
        self.autokeys = autokeys
        self.scales = scales
        self.n, self.p_in, self.m = dims
        self.counter = OpCounter()
        self._x_unpacked: list[RlweCt] | None = None

    @classmethod
    def setup(
        cls,
        ctrl: NominalController,
        scales: Scales,
        sk: SecretKey,
        gadget: Gadget,
        rng: np.random.Generator,
        autokeys: dict[int, AutomorphismKey] | None = None,
    ) -> "EncControllerPacked":
        params = sk.sk.params
        layout = PackLayout.for_dims(params, ctrl.n, ctrl.m, ctrl.p_in)
        if autokeys is None:
            autokeys = generate_autokeys(layout, sk, gadget, rng)
        for theta in layout.required_thetas():
            if theta not in autokeys:
                raise ParameterError(f"missing automorphism key theta={theta}")
        F = ctrl.F.astype(np.int64)
        G_int = _to_int_matrix(ctrl.G, scales.s_inv, "G")
        H_int = _to_int_matrix(ctrl.H, scales.s_inv, "H")
        x_int = encode_initial_state(ctrl.x_ini, scales)

        F_cols = [enc_gsw(pack(F[:, i], layout), sk, gadget, rng) for i in range(ctrl.n)]
        G_cols = [
            enc_gsw(pack(G_int[:, i], layout), sk, gadget, rng) for i in range(ctrl.p_in)
        ]
        H_cols = [
            enc_gsw(pack(H_int[:, i], layout), sk, gadget, rng) for i in range(ctrl.n)
        ]
        x_ct = enc(pack(x_int, layout), sk, rng)
        inst = cls(
            params,
            gadget,
            layout,
            F_cols,
            G_cols,
            H_cols,
            x_ct,
            autokeys,
            scales,
            (ctrl.n, ctrl.p_in, ctrl.m),
        )
        inst.warm()
        return inst

    def warm(self):
        """Precompute NTT caches offline so steps carry no one-time cost."""
        if self.params.ntt_ready:
            for ct in (*self.F_cols, *self.G_cols, *self.H_cols):
                ct.ntt_cache()
            for key in self.autokeys.values():
                key.ak.ntt_cache()

    def _unpacked_state(self) -> list[RlweCt]:
        if self._x_unpacked is None:
            self._x_unpacked = unpack_ct(
                self.x_ct, self.n, self.autokeys, self.layout, self.counter
            )
        return self._x_unpacked

    def output(self) -> RlweCt:
        """u(t) = sum_i H_i (x) x_i(t) on the pre-update state."""
        xs = self._unpacked_state()
        acc = None
        for i in range(self.n):
            term = external_product(self.H_cols[i], xs[i], self.counter)
            if acc is None:
                acc = term
            else:
                acc = ct_add(acc, term)
                self.counter.count_add()
        return acc

    def update(self, y_ct: RlweCt):
        """x(t+1) = sum_i F_i (x) x_i (+) sum_i G_i (x) y_i."""
        xs = self._unpacked_state()
        ys = unpack_ct(y_ct, self.p_in, self.autokeys, self.layout, self.counter)
        acc_f = None
        for i in range(self.n):
            term = external_product(self.F_cols[i], xs[i], self.counter)
            if acc_f is None:
                acc_f = term
            else:
                acc_f = ct_add(acc_f, term)
                self.counter.count_add()
        acc_g = None
        for i in range(self.p_in):
            term = external_product(self.G_cols[i], ys[i], self.counter)
            if acc_g is None:
                acc_g = term
            else:
                acc_g = ct_add(acc_g, term)
                self.counter.count_add()
        self.x_ct = ct_add(acc_f, acc_g)
        self.counter.count_add()
        self._x_unpacked = None

    def step(self, y_ct: RlweCt) -> RlweCt:
        u = self.output()
        self.update(y_ct)
        return u

    def gsw_ciphertext_count(self) -> int:
        return len(self.F_cols) + len(self.G_cols) + len(self.H_cols)


def generate_autokeys(
    layout: PackLayout, sk: SecretKey, gadget: Gadget, rng: np.random.Generator
) -> dict[int, AutomorphismKey]:
    """Eagerly generate every automorphism key the unpacking cascade needs.

    The key for theta = zeta + 1 carries error granularity zeta / 2 so
    the cascade's inverse-of-two multiplications act as exact halvings
    on its error slots (see gen_autokey).
    """
    return {
        theta: gen_autokey(theta, sk, gadget, rng, err_granularity=max(1, (theta - 1) // 2))
        for theta in layout.required_thetas()
    }


# ---------------------------------------------------------------------------
# White-box probes (secret-key side, for analysis and tests only).


def coeff_trace(x_cts: list[RlweCt], scales: Scales, sk: SecretKey) -> tuple[np.ndarray, np.ndarray]:
    """Full coefficient decomposition of the decrypted state.

    Returns (raw, scaled): raw[i] is the centered integer coefficient
    vector of X^i across the state components (shape (N, n)); scaled is
    raw times r*s*L.
    """
    cols = [dec(c, sk).coeffs for c in x_cts]
    raw = np.stack(cols, axis=1)
    return raw, raw.astype(float) * scales.rsL


def slot_trace(
    x_ct: RlweCt, n: int, layout: PackLayout, scales: Scales, sk: SecretKey
) -> tuple[np.ndarray, np.ndarray]:
    """(raw slot integers, r*s*L-scaled reals) of a packed state ciphertext."""
    pt = dec(x_ct, sk)
    slots = unpack_pt(pt, n, layout)
    return slots, slots.astype(float) * scales.rsL
