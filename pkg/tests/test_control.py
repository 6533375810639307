import json

import numpy as np
import pytest

from rlwectl.control import (
    FOUR_TANK_A,
    FOUR_TANK_B,
    FOUR_TANK_C,
    FOUR_TANK_K,
    FOUR_TANK_L,
    FOUR_TANK_R,
    ConversionError,
    NominalController,
    PlantModel,
    closed_loop_matrix,
    export_fixture_json,
    four_tank_controller,
    four_tank_fixture,
    import_fixture_json,
    inf_norm_mat,
    modal_convert,
    plant_step,
    quantize_output,
)


def test_plant_zero_fixed_point():
    plant = PlantModel(np.eye(2) * 0.5, np.eye(2), np.eye(2), np.zeros(2))
    new_state, y = plant_step(plant, np.zeros(2))
    assert np.all(new_state == 0) and np.all(y == 0)


def test_four_tank_first_row():
    plant, _, _, _ = four_tank_fixture()
    x = np.array([1.0, 0.0, 2.0, 0.0])
    plant.x = x
    plant.step(np.array([3.0, 0.0]))
    # x1+ = 0.9984 x1 + 0.0042 x3 + 0.0083 u1
    assert abs(plant.x[0] - (0.9984 * 1 + 0.0042 * 2 + 0.0083 * 3)) < 1e-12


def test_plant_matches_power_series(rng):
    plant, _, _, _ = four_tank_fixture()
    us = rng.normal(size=(10, 2))
    for u in us:
        plant.step(u)
    # closed form: x(T) = A^T x0 + sum A^(T-1-k) B u(k)
    A, B = np.array(FOUR_TANK_A), np.array(FOUR_TANK_B)
    want = np.linalg.matrix_power(A, 10) @ plant.x_ini
    for k, u in enumerate(us):
        want += np.linalg.matrix_power(A, 9 - k) @ B @ u
    assert np.max(np.abs(plant.x - want)) < 1e-9


def test_quantize_output():
    assert np.all(quantize_output(np.zeros(3), 1e-4) == 0)
    assert quantize_output([0.12345], 1e-4)[0] == 1235  # 1234.5 rounds away
    assert quantize_output([-0.12345], 1e-4)[0] == -1235
    y = np.array([0.123456, -7.6543e-3])
    r = 1e-4
    assert np.max(np.abs(r * quantize_output(y, r) - y)) <= r / 2


def test_modal_convert_four_tank():
    F, G, H, T = modal_convert(
        FOUR_TANK_A, FOUR_TANK_B, FOUR_TANK_C, FOUR_TANK_K, FOUR_TANK_L, FOUR_TANK_R
    )
    assert F.dtype == np.int64
    assert np.array_equal(np.sort(np.linalg.eigvals(F).real.round()), [-1, 0, 1, 2])
    assert G.shape == (4, 4) and H.shape == (2, 4)
    # Eigenvalues of the rewritten state matrix hit {0,1,-1,2} only to
    # the precision of the printed gains (about 4e-5 here).
    Ac = (
        np.array(FOUR_TANK_A)
        + np.array(FOUR_TANK_B) @ np.array(FOUR_TANK_K)
        - np.array(FOUR_TANK_L) @ np.array(FOUR_TANK_C)
        - np.array(FOUR_TANK_R) @ np.array(FOUR_TANK_K)
    )
    resid = T @ Ac @ np.linalg.inv(T) - F
    assert np.max(np.abs(resid)) < 1e-4


def test_modal_convert_identity_like():
    # A system whose rewritten matrix is already integer-diagonal: the
    # transform reduces to a permutation (ordering convention).
    A = np.diag([1.0, -1.0, 2.0, 0.0])
    B = np.zeros((4, 2))
    C = np.zeros((2, 4))
    K = np.zeros((2, 4))
    L = np.zeros((4, 2))
    R = np.zeros((4, 2))
    F, G, H, T = modal_convert(A, B, C, K, L, R, tol=1e-9)
    assert np.array_equal(np.sort(np.diag(F)), [-1, 0, 1, 2])
    assert np.array_equal(np.abs(T), np.abs(T).round())
    assert np.all(np.abs(T).sum(axis=0) == 1) and np.all(np.abs(T).sum(axis=1) == 1)


def test_modal_convert_rejects_complex():
    A = np.array([[0.0, -1.0], [1.0, 0.0]])  # rotation: complex eigenvalues
    Z = np.zeros((2, 2))
    with pytest.raises(ConversionError):
        modal_convert(A, Z, Z, Z, Z, Z)


def _observer_vs_converted(F):
    A, B, C = (np.array(M) for M in (FOUR_TANK_A, FOUR_TANK_B, FOUR_TANK_C))
    K, L = np.array(FOUR_TANK_K), np.array(FOUR_TANK_L)
    _, G, H, T = modal_convert(A, B, C, K, L, FOUR_TANK_R)
    x_ini = np.array([0.5, 0.02, -1.0, 0.9])
    z = np.linalg.inv(T) @ x_ini
    x = x_ini.copy()
    xp_obs = np.ones(4)
    xp_conv = np.ones(4)
    worst = 0.0
    for _ in range(200):
        u_obs = K @ z
        u_conv = H @ x
        worst = max(worst, float(np.max(np.abs(u_obs - u_conv))))
        z = (A + B @ K - L @ C) @ z + L @ (C @ xp_obs)
        x = F @ x + G @ np.concatenate([C @ xp_conv, u_conv])
        xp_obs = A @ xp_obs + B @ u_obs
        xp_conv = A @ xp_conv + B @ u_conv
    return worst


def test_converted_matches_observer_form():
    # With the exact (unrounded) modal matrix the two controllers are
    # similar, so the input trajectories coincide to round-off.
    A, B, C = (np.array(M) for M in (FOUR_TANK_A, FOUR_TANK_B, FOUR_TANK_C))
    K, L = np.array(FOUR_TANK_K), np.array(FOUR_TANK_L)
    _, _, _, T = modal_convert(A, B, C, K, L, FOUR_TANK_R)
    Ac = A + B @ K - L @ C - np.array(FOUR_TANK_R) @ K
    F_exact = T @ Ac @ np.linalg.inv(T)
    assert _observer_vs_converted(F_exact) < 1e-9
    # Rounding F to integers perturbs the model by the 4-decimal print
    # precision of the gains; the trajectories stay close but not equal.
    F_int, _, _, _ = modal_convert(A, B, C, K, L, FOUR_TANK_R)
    assert _observer_vs_converted(F_int.astype(float)) < 2e-3


def test_nominal_zero():
    ctrl = NominalController(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((1, 2)), np.zeros(2))
    assert np.all(ctrl.step(np.zeros(2)) == 0)


def test_nominal_requires_integer_F():
    with pytest.raises(ConversionError):
        NominalController(np.array([[0.5]]), np.eye(1), np.eye(1), np.zeros(1))


def test_fixture_invariants():
    plant, conv, xp_ini, x_ini = four_tank_fixture()
    assert np.max(np.abs(np.concatenate([xp_ini, x_ini]))) == 1.0
    assert np.all(np.diag(plant.C[:, :2]) == 0.5)
    assert np.max(np.abs(np.linalg.eigvals(plant.A))) < 1.0  # open loop Schur


def test_closed_loop_schur_and_bounded():
    plant, _, _, _ = four_tank_fixture()
    nominal = four_tank_controller(1e-4, 1e-4)
    Abar = closed_loop_matrix(plant, nominal)
    assert np.max(np.abs(np.linalg.eigvals(Abar))) < 1.0
    # simulated trajectory stays bounded over 10^4 steps
    chi = np.concatenate([plant.x_ini, nominal.x_ini])
    sup = 0.0
    for _ in range(10**4):
        chi = Abar @ chi
        sup = max(sup, np.max(np.abs(chi)))
    assert sup < 50.0


def test_quantized_controller_is_on_grid():
    nominal = four_tank_controller(1e-4, 1e-4)
    assert np.max(np.abs(nominal.G / 1e-4 - np.round(nominal.G / 1e-4))) < 1e-6
    assert np.max(np.abs(nominal.H / 1e-4 - np.round(nominal.H / 1e-4))) < 1e-6
    assert nominal.feeds_back_output
    assert nominal.p_in == 4  # y (2) plus fed back u (2)


def test_fixture_json_roundtrip(tmp_path):
    path = tmp_path / "fixture.json"
    export_fixture_json(str(path))
    doc = import_fixture_json(str(path))
    assert np.array_equal(doc["A"], np.array(FOUR_TANK_A))
    assert np.array_equal(doc["R"], np.array(FOUR_TANK_R))
    raw = json.loads(path.read_text())
    assert isinstance(raw["A"][0][0], str)  # decimal strings, not floats


def test_inf_norm_mat():
    assert inf_norm_mat([[1, -2], [3, 0.5]]) == 3.5
    assert inf_norm_mat([1, -4, 2]) == 4.0  # vectors: max abs entry
