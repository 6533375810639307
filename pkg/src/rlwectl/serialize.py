"""Binary serialization for keys, ciphertexts and evaluation bundles.

Little-endian throughout, length-prefixed arrays, a params header with a
format version.  The evaluation bundle (controller side) never contains
the secret key: it holds the GSW parameter ciphertexts, the encrypted
initial state, the automorphism keys (packed mode) and the scales.
"""

from __future__ import annotations

import struct

import numpy as np

from .automorphism import AutomorphismKey
from .enc_controller import EncControllerNaive, EncControllerPacked, Scales
from .gsw import Gadget, RgswCt
from .packing import PackLayout
from .ring import ParameterError, Poly, RingParams
from .rlwe import ErrorDist, RlweCt, SecretKey

MAGIC_KEY = b"RLWESK01"
MAGIC_BUNDLE = b"RLWEEV01"
VERSION = 1


def _pack_array(arr: np.ndarray) -> bytes:
    a = np.ascontiguousarray(arr, dtype="<i8")
    return struct.pack("<I", a.size) + a.tobytes()


def _unpack_array(buf: memoryview, off: int) -> tuple[np.ndarray, int]:
    (n,) = struct.unpack_from("<I", buf, off)
    off += 4
    arr = np.frombuffer(buf, dtype="<i8", count=n, offset=off).copy()
    return arr, off + 8 * n


def _pack_params(params: RingParams, dist: ErrorDist | None) -> bytes:
    sd = dist.sd if dist else 0.0
    sigma = dist.sigma if dist else 0.0
    return struct.pack("<HIQdd", VERSION, params.N, params.q, sd, sigma)


def _unpack_params(buf: memoryview, off: int) -> tuple[RingParams, ErrorDist | None, int]:
    version, N, q, sd, sigma = struct.unpack_from("<HIQdd", buf, off)
    if version != VERSION:
        raise ParameterError(f"unsupported format version {version}")
    dist = ErrorDist(sd, sigma) if sd > 0 else None
    return RingParams(N, int(q)), dist, off + struct.calcsize("<HIQdd")


def write_secret_key(path: str, sk: SecretKey):
    with open(path, "wb") as fh:
        fh.write(MAGIC_KEY)
        fh.write(_pack_params(sk.sk.params, sk.dist))
        fh.write(_pack_array(sk.sk.coeffs))


def read_secret_key(path: str) -> SecretKey:
    with open(path, "rb") as fh:
        buf = memoryview(fh.read())
    if bytes(buf[:8]) != MAGIC_KEY:
        raise ParameterError("not a secret key file")
    params, dist, off = _unpack_params(buf, 8)
    coeffs, _ = _unpack_array(buf, off)
    return SecretKey(Poly(params, coeffs), dist)


def _pack_rlwe(ct: RlweCt) -> bytes:
    return _pack_array(ct.b.coeffs) + _pack_array(ct.a.coeffs)


def _unpack_rlwe(buf, off, params) -> tuple[RlweCt, int]:
    b, off = _unpack_array(buf, off)
    a, off = _unpack_array(buf, off)
    return RlweCt(Poly(params, b), Poly(params, a)), off


def _pack_rgsw(ct: RgswCt) -> bytes:
    return struct.pack("<QI", ct.gadget.nu, ct.gadget.d) + _pack_array(ct.mat.reshape(-1))


def _unpack_rgsw(buf, off, params) -> tuple[RgswCt, int]:
    nu, d = struct.unpack_from("<QI", buf, off)
    off += struct.calcsize("<QI")
    flat, off = _unpack_array(buf, off)
    g = Gadget(int(nu), int(d))
    return RgswCt(params, g, flat.reshape(2, 2 * g.d, params.N)), off


def write_eval_bundle(path: str, ctrl: EncControllerNaive | EncControllerPacked):
    """Controller-side evaluation package (no secret material)."""
    packed = isinstance(ctrl, EncControllerPacked)
    head = struct.pack(
        "<B3I", 1 if packed else 0, ctrl.n, ctrl.p_in, ctrl.m
    ) + struct.pack("<dQQ", ctrl.scales.r, ctrl.scales.s_inv, ctrl.scales.l_inv)
    out = [MAGIC_BUNDLE, _pack_params(ctrl.params, None), head]
    if packed:
        out.append(struct.pack("<I", ctrl.layout.tau))
        for group in (ctrl.F_cols, ctrl.G_cols, ctrl.H_cols):
            out.append(struct.pack("<I", len(group)))
            out.extend(_pack_rgsw(c) for c in group)
        out.append(_pack_rlwe(ctrl.x_ct))
        thetas = sorted(ctrl.autokeys)
        out.append(struct.pack("<I", len(thetas)))
        for theta in thetas:
            out.append(struct.pack("<I", theta))
            out.append(_pack_rgsw(ctrl.autokeys[theta].ak))
    else:
        for mat in (ctrl.F_ct, ctrl.G_ct, ctrl.H_ct):
            out.append(struct.pack("<II", len(mat), len(mat[0])))
            for row in mat:
                out.extend(_pack_rgsw(c) for c in row)
        out.append(struct.pack("<I", len(ctrl.x_ct)))
        out.extend(_pack_rlwe(c) for c in ctrl.x_ct)
    with open(path, "wb") as fh:
        fh.write(b"".join(out))


def read_eval_bundle(path: str) -> EncControllerNaive | EncControllerPacked:
    with open(path, "rb") as fh:
        buf = memoryview(fh.read())
    if bytes(buf[:8]) != MAGIC_BUNDLE:
        raise ParameterError("not an evaluation bundle")
    params, _, off = _unpack_params(buf, 8)
    packed, n, p_in, m = struct.unpack_from("<B3I", buf, off)
    off += struct.calcsize("<B3I")
    r, s_inv, l_inv = struct.unpack_from("<dQQ", buf, off)
    off += struct.calcsize("<dQQ")
    scales = Scales(r, int(s_inv), int(l_inv))
    if packed:
        (tau,) = struct.unpack_from("<I", buf, off)
        off += 4
        groups = []
        for _ in range(3):
            (k,) = struct.unpack_from("<I", buf, off)
            off += 4
            cts = []
            for _ in range(k):
                ct, off = _unpack_rgsw(buf, off, params)
                cts.append(ct)
            groups.append(cts)
        x_ct, off = _unpack_rlwe(buf, off, params)
        (nkeys,) = struct.unpack_from("<I", buf, off)
        off += 4
        autokeys = {}
        for _ in range(nkeys):
            (theta,) = struct.unpack_from("<I", buf, off)
            off += 4
            ak, off = _unpack_rgsw(buf, off, params)
            autokeys[theta] = AutomorphismKey(theta, ak)
        gadget = groups[0][0].gadget
        layout = PackLayout(params, int(tau))
        return EncControllerPacked(
            params, gadget, layout, groups[0], groups[1], groups[2],
            x_ct, autokeys, scales, (n, p_in, m),
        )
    mats = []
    for _ in range(3):
        rows, cols = struct.unpack_from("<II", buf, off)
        off += 8
        mat = []
        for _ in range(rows):
            row = []
            for _ in range(cols):
                ct, off = _unpack_rgsw(buf, off, params)
                row.append(ct)
            mat.append(row)
        mats.append(mat)
    (k,) = struct.unpack_from("<I", buf, off)
    off += 4
    x_ct = []
    for _ in range(k):
        ct, off = _unpack_rlwe(buf, off, params)
        x_ct.append(ct)
    gadget = mats[0][0][0].gadget
    return EncControllerNaive(
        params, gadget, mats[0], mats[1], mats[2], x_ct, scales, (n, p_in, m)
    )
