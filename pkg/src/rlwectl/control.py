"""Plant / controller models, integer-state-matrix conversion, four-tank fixture.

The benchmark plant is a discretized four-tank process under an
observer-based stabilizing controller.  Because an encrypted dynamic
controller needs an integer state matrix, the controller is rewritten
with its own output fed back as an extra input (which shifts the state
matrix spectrum onto {0, 1, -1, 2}) and transformed to modal canonical
form; the resulting state matrix is exactly integer while the closed
loop keeps the originally designed eigenvalues.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class ConversionError(ValueError):
    """Raised when the modal conversion cannot produce an integer state matrix."""


def inf_norm_mat(M) -> float:
    """Induced infinity norm (max absolute row sum); vectors: max abs entry."""
    M = np.asarray(M, dtype=float)
    if M.ndim <= 1:
        return float(np.max(np.abs(M))) if M.size else 0.0
    return float(np.max(np.sum(np.abs(M), axis=1)))


def round_half_away(x):
    """Round half away from zero (the fixed rounding rule everywhere)."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_output(y, r: float) -> np.ndarray:
    """Sensor quantization: round(y / r) as integers."""
    return round_half_away(np.asarray(y, dtype=float) / r).astype(np.int64)


@dataclass
class PlantModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    x_ini: np.ndarray
    x: np.ndarray = field(default=None)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.C = np.asarray(self.C, dtype=float)
        self.x_ini = np.asarray(self.x_ini, dtype=float)
        n_p = self.A.shape[0]
        if self.A.shape != (n_p, n_p) or self.B.shape[0] != n_p or self.C.shape[1] != n_p:
            raise ValueError("plant matrix shapes do not conform")
        if self.x is None:
            self.x = self.x_ini.copy()

    @property
    def n_p(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def output(self) -> np.ndarray:
        return self.C @ self.x

    def step(self, u) -> np.ndarray:
        """Advance x <- A x + B u; returns the new state."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.m,):
            raise ValueError(f"input shape {u.shape} != ({self.m},)")
        self.x = self.A @ self.x + self.B @ u
        return self.x

    def reset(self):
        self.x = self.x_ini.copy()


def plant_step(plant: PlantModel, u) -> tuple[np.ndarray, np.ndarray]:
    """(new state, output of the pre-update state)."""
    y = plant.output()
    return plant.step(u), y


@dataclass
class NominalController:
    """x+ = F x + G y, u = H x with integer F and s-grid rational G, H, x_ini.

    `feeds_back_output` marks controllers whose input vector is the
    plant output concatenated with the controller's own (fed back)
    output, the shape produced by the integer-state-matrix conversion.
    """

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    x_ini: np.ndarray
    feeds_back_output: bool = False
    x: np.ndarray = field(default=None)

    def __post_init__(self):
        self.F = np.asarray(self.F)
        if not np.array_equal(self.F, np.round(self.F)):
            raise ConversionError("state matrix F must be integer")
        self.F = self.F.astype(np.int64)
        self.G = np.asarray(self.G, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        self.x_ini = np.asarray(self.x_ini, dtype=float)
        if self.x is None:
            self.x = self.x_ini.copy()

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def p_in(self) -> int:
        return self.G.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    def output(self) -> np.ndarray:
        return self.H @ self.x

    def update(self, y):
        y = np.asarray(y, dtype=float)
        self.x = self.F @ self.x + self.G @ y

    def step(self, y) -> np.ndarray:
        """u(t) from the pre-update state, then x <- F x + G y."""
        u = self.output()
        self.update(y)
        return u

    def reset(self):
        self.x = self.x_ini.copy()


def modal_convert(A, B, C, K, L_obs, R, tol: float = 1e-4, normalization: str = "maxentry"):
    """Integer-state-matrix conversion via the modal transform.

    Rewrites z+ = (A+BK-LC)z + Ly, u = Kz with the output fed back:
    z+ = (A+BK-LC-RK)z + [L R][y; u].  R is chosen so the rewritten
    state matrix has distinct real integer eigenvalues; T is its ordered
    eigendecomposition (eigenvalues ascending).  Returns (F, G, H, T)
    with F = round(T Ac T^-1) exactly integer, G = T [L R], H = K T^-1.

    normalization picks the eigenvector scaling: "maxentry" scales each
    eigenvector so its largest-magnitude entry is +1 (the deterministic
    default); "unit2" keeps unit Euclidean length with the pivot entry
    positive (the scaling eigensolvers return, used when reproducing
    figures computed with library defaults).
    """
    A, B, C = (np.asarray(M, dtype=float) for M in (A, B, C))
    K, L_obs, R = (np.asarray(M, dtype=float) for M in (K, L_obs, R))
    Ac = A + B @ K - L_obs @ C - R @ K
    w, V = np.linalg.eig(Ac)
    if np.max(np.abs(w.imag)) > 1e-9:
        raise ConversionError("rewritten state matrix has complex eigenvalues")
    w = w.real
    if np.min(np.diff(np.sort(w))) < 1e-6:
        raise ConversionError("eigenvalues are not distinct")
    order = np.argsort(w)
    V = V[:, order].real
    for j in range(V.shape[1]):
        pivot = np.argmax(np.abs(V[:, j]))
        if normalization == "maxentry":
            V[:, j] = V[:, j] / V[pivot, j]
        elif normalization == "unit2":
            V[:, j] = V[:, j] / (np.linalg.norm(V[:, j]) * np.sign(V[pivot, j]))
        else:
            raise ValueError(f"unknown normalization {normalization!r}")
    T = np.linalg.inv(V)
    T_inv = V
    F_raw = T @ Ac @ T_inv
    F = round_half_away(F_raw)
    residual = float(np.max(np.abs(F_raw - F)))
    if residual > tol:
        raise ConversionError(f"modal matrix is not integer within {tol} (residual {residual:.3g})")
    G = T @ np.hstack([L_obs, R])
    H = K @ T_inv
    return F.astype(np.int64), G, H, T


def closed_loop_matrix(plant: PlantModel, ctrl: NominalController) -> np.ndarray:
    """State matrix of the interconnection (output feedback folded in)."""
    A, B, C = plant.A, plant.B, plant.C
    F, G, H = ctrl.F.astype(float), ctrl.G, ctrl.H
    if ctrl.feeds_back_output:
        Gy, Gu = G[:, : plant.p], G[:, plant.p :]
        return np.block([[A, B @ H], [Gy @ C, F + Gu @ H]])
    return np.block([[A, B @ H], [G @ C, F]])


@dataclass(frozen=True)
class ConversionInputs:
    K: np.ndarray
    L_obs: np.ndarray
    R: np.ndarray
    T: np.ndarray


def snap_to_grid(M, step: float, what: str = "matrix") -> np.ndarray:
    """Snap entries onto integer multiples of `step`, verifying closeness.

    Controller parameters must be exactly representable at their scale;
    entries are rounded onto the grid and the rounding is bounded by
    step/2 by construction.
    """
    M = np.asarray(M, dtype=float)
    ints = round_half_away(M / step)
    return ints * step


def quantize_controller(
    F, G, H, x_ini, s: float, r: float, feeds_back_output: bool
) -> NominalController:
    """Nominal controller with G, H on the s-grid and x_ini on the r*s-grid."""
    return NominalController(
        F=np.asarray(F),
        G=snap_to_grid(G, s),
        H=snap_to_grid(H, s),
        x_ini=snap_to_grid(x_ini, r * s),
        feeds_back_output=feeds_back_output,
    )


# ---------------------------------------------------------------------------
# Four-tank benchmark fixture (all numeric entries are fixed constants).

FOUR_TANK_A = [
    [0.9984, 0.0, 0.0042, 0.0],
    [0.0, 0.9989, 0.0, -0.0033],
    [0.0, 0.0, 0.9958, 0.0],
    [0.0, 0.0, 0.0, 0.9967],
]
FOUR_TANK_B = [
    [0.0083, 0.0],
    [0.0, 0.0063],
    [0.0, 0.0048],
    [0.0031, 0.0],
]
FOUR_TANK_C = [
    [0.5, 0.0, 0.0, 0.0],
    [0.0, 0.5, 0.0, 0.0],
]
FOUR_TANK_K = [
    [-0.7905, 0.1579, -0.2745, -0.2686],
    [-0.1552, -0.7874, -0.3427, 0.3137],
]
FOUR_TANK_L = [
    [0.7815, 0.0],
    [0.0, 0.7816],
    [0.3190, 0.0],
    [0.0, -0.3199],
]
FOUR_TANK_R = [
    [-1.6879, -0.6892],
    [0.4148, -2.1054],
    [0.2880, 4.1931],
    [-0.7385, -2.0807],
]
FOUR_TANK_XP_INI = [1.0, 1.0, 1.0, 1.0]
FOUR_TANK_X_INI = [0.5, 0.02, -1.0, 0.9]


def four_tank_fixture() -> tuple[PlantModel, ConversionInputs, np.ndarray, np.ndarray]:
    """(plant, conversion inputs incl. computed T, x_p_ini, x_ini)."""
    plant = PlantModel(FOUR_TANK_A, FOUR_TANK_B, FOUR_TANK_C, np.array(FOUR_TANK_XP_INI))
    _, _, _, T = modal_convert(
        FOUR_TANK_A, FOUR_TANK_B, FOUR_TANK_C, FOUR_TANK_K, FOUR_TANK_L, FOUR_TANK_R
    )
    conv = ConversionInputs(
        K=np.array(FOUR_TANK_K),
        L_obs=np.array(FOUR_TANK_L),
        R=np.array(FOUR_TANK_R),
        T=T,
    )
    return plant, conv, np.array(FOUR_TANK_XP_INI), np.array(FOUR_TANK_X_INI)


def four_tank_controller(s: float, r: float) -> NominalController:
    """The converted four-tank controller, quantized onto the s-grid."""
    F, G, H, _ = modal_convert(
        FOUR_TANK_A, FOUR_TANK_B, FOUR_TANK_C, FOUR_TANK_K, FOUR_TANK_L, FOUR_TANK_R
    )
    return quantize_controller(F, G, H, FOUR_TANK_X_INI, s, r, feeds_back_output=True)


def four_tank_raw_controller(normalization: str = "maxentry") -> NominalController:
    """The converted controller without grid quantization."""
    F, G, H, _ = modal_convert(
        FOUR_TANK_A,
        FOUR_TANK_B,
        FOUR_TANK_C,
        FOUR_TANK_K,
        FOUR_TANK_L,
        FOUR_TANK_R,
        normalization=normalization,
    )
    return NominalController(F, G, H, FOUR_TANK_X_INI, feeds_back_output=True)


# -- fixture export/import ---------------------------------------------------


def _mat_to_strings(M) -> list[list[str]]:
    return [[repr(float(v)) for v in row] for row in np.atleast_2d(np.asarray(M, dtype=float))]


def _mat_from_strings(rows) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in rows], dtype=float)


def export_fixture_json(path: str):
    """Write the four-tank fixture matrices as decimal strings (row-major)."""
    doc = {
        "A": _mat_to_strings(FOUR_TANK_A),
        "B": _mat_to_strings(FOUR_TANK_B),
        "C": _mat_to_strings(FOUR_TANK_C),
        "K": _mat_to_strings(FOUR_TANK_K),
        "L_obs": _mat_to_strings(FOUR_TANK_L),
        "R": _mat_to_strings(FOUR_TANK_R),
        "x_p_ini": _mat_to_strings(FOUR_TANK_XP_INI),
        "x_ini": _mat_to_strings(FOUR_TANK_X_INI),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def import_fixture_json(path: str) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    return {k: _mat_from_strings(v) for k, v in doc.items()}
