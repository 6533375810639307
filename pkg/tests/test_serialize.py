import numpy as np
import pytest

from rlwectl.control import NominalController
from rlwectl.enc_controller import EncControllerNaive, EncControllerPacked, Scales
from rlwectl.serialize import (
    read_eval_bundle,
    read_secret_key,
    write_eval_bundle,
    write_secret_key,
)
from rlwectl.rlwe import dec, enc
from rlwectl.ring import constant


@pytest.fixture(scope="module")
def small_ctrl():
    rng = np.random.default_rng(3)
    return NominalController(
        np.diag([0, 1, -1, 2]),
        rng.integers(-9, 9, (4, 2)) * 1e-4,
        rng.integers(-9, 9, (2, 4)) * 1e-4,
        rng.integers(-9, 9, 4) * 1e-4,
    )


def test_secret_key_roundtrip(tmp_path, sk64):
    path = tmp_path / "sk.bin"
    write_secret_key(str(path), sk64)
    back = read_secret_key(str(path))
    assert back.sk == sk64.sk
    assert back.dist == sk64.dist


def test_naive_bundle_roundtrip(tmp_path, params64, gadget64, sk64, small_ctrl):
    scales = Scales(1e-4, 10**4, 10**4)
    ctrl = EncControllerNaive.setup(
        small_ctrl, scales, sk64, gadget64, np.random.default_rng(8)
    )
    path = tmp_path / "bundle.bin"
    write_eval_bundle(str(path), ctrl)
    back = read_eval_bundle(str(path))
    assert isinstance(back, EncControllerNaive)
    assert (back.n, back.p_in, back.m) == (4, 2, 2)
    assert back.scales == scales
    for mat_a, mat_b in ((ctrl.F_ct, back.F_ct), (ctrl.G_ct, back.G_ct), (ctrl.H_ct, back.H_ct)):
        for row_a, row_b in zip(mat_a, mat_b):
            for ct_a, ct_b in zip(row_a, row_b):
                assert np.array_equal(ct_a.mat, ct_b.mat)
    for ct_a, ct_b in zip(ctrl.x_ct, back.x_ct):
        assert ct_a.b == ct_b.b and ct_a.a == ct_b.a


def test_packed_bundle_roundtrip(tmp_path, params64, gadget64, sk64, small_ctrl):
    scales = Scales(1e-4, 10**4, 10**4)
    ctrl = EncControllerPacked.setup(
        small_ctrl, scales, sk64, gadget64, np.random.default_rng(9)
    )
    path = tmp_path / "bundle.bin"
    write_eval_bundle(str(path), ctrl)
    back = read_eval_bundle(str(path))
    assert isinstance(back, EncControllerPacked)
    assert back.layout.tau == 4
    assert sorted(back.autokeys) == [3, 5]
    for ct_a, ct_b in zip(ctrl.F_cols, back.F_cols):
        assert np.array_equal(ct_a.mat, ct_b.mat)
    for theta in (3, 5):
        assert np.array_equal(ctrl.autokeys[theta].ak.mat, back.autokeys[theta].ak.mat)
    assert ctrl.x_ct.b == back.x_ct.b

    # The restored controller still works against the original key.
    from rlwectl.enc_controller import actuate_packed, sensor_encrypt_packed

    rng = np.random.default_rng(10)
    u = actuate_packed(back.output(), 2, scales, sk64, back.layout)
    assert np.all(np.isfinite(u))


def test_bundle_contains_no_secret_key(tmp_path, params64, gadget64, sk64, small_ctrl):
    scales = Scales(1e-4, 10**4, 10**4)
    ctrl = EncControllerNaive.setup(
        small_ctrl, scales, sk64, gadget64, np.random.default_rng(11)
    )
    bundle = tmp_path / "bundle.bin"
    write_eval_bundle(str(bundle), ctrl)
    payload = bundle.read_bytes()
    sk_bytes = np.ascontiguousarray(sk64.sk.coeffs, dtype="<i8").tobytes()
    assert sk_bytes not in payload
    back = read_eval_bundle(str(bundle))
    assert not hasattr(back, "sk")


def test_magic_rejected(tmp_path):
    bad = tmp_path / "x.bin"
    bad.write_bytes(b"NOTAKEY!" + b"\0" * 64)
    with pytest.raises(Exception):
        read_secret_key(str(bad))
    with pytest.raises(Exception):
        read_eval_bundle(str(bad))
