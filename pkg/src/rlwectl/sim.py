"""Closed-loop simulation, trace recording and benchmarking.

Each run drives two closed loops in lock-step from identical initial
conditions: the selected controller (plaintext / element-wise encrypted
/ packed encrypted) on its own plant, and the exact nominal controller
on a second plant copy producing u_nom.  The per-step trace records
u(t), u_nom(t), their sup-norm gap and the wall-clock time of the
cryptographic portion of the step.

With `whitebox=True` a secret-key-side probe decrypts the state between
operations and measures the lumped per-step perturbations, the
quantities the closed-form budget bounds; it also watches the
non-constant coefficients grow and records the step at which they first
wrap around the modulus.  Probes run outside the timed sections.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .control import (
    NominalController,
    PlantModel,
    closed_loop_matrix,
    four_tank_controller,
    four_tank_fixture,
)
from .counters import OpCounter
from .enc_controller import (
    EncControllerNaive,
    EncControllerPacked,
    Scales,
    actuate_naive,
    actuate_packed,
    coeff_trace,
    generate_autokeys,
    sensor_encrypt,
    sensor_encrypt_packed,
    slot_trace,
)
from .gsw import Gadget
from .packing import PackLayout
from .planner import budget_for_system
from .ring import RingParams, get_context
from .rlwe import ErrorDist, SecretKey, keygen

MODES = ("plaintext", "naive", "packed")

BENCH_Q = 72057594037948417


@dataclass
class RunConfig:
    N: int = 2**11
    q: int = BENCH_Q
    nu: int = 2**7
    sd: float = 3.2
    sigma: float = 19.2
    r: float = 1e-4
    s_inv: int = 10**4
    l_inv: int = 10**4
    steps: int = 1000
    mode: str = "naive"
    seed: int = 1
    out: str | None = None
    whitebox: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.steps < 1:
            raise ValueError("steps must be positive")
        # Module-level preconditions, re-validated at load.
        RingParams(self.N, self.q)
        Gadget.for_modulus(self.q, self.nu).validate(self.q)
        ErrorDist(self.sd, self.sigma)
        Scales(self.r, self.s_inv, self.l_inv)

    @property
    def scales(self) -> Scales:
        return Scales(self.r, self.s_inv, self.l_inv)

    @property
    def params(self) -> RingParams:
        return RingParams(self.N, self.q)

    @property
    def gadget(self) -> Gadget:
        return Gadget.for_modulus(self.q, self.nu)

    @property
    def dist(self) -> ErrorDist:
        return ErrorDist(self.sd, self.sigma)

    @classmethod
    def from_json(cls, path: str, **overrides) -> "RunConfig":
        with open(path) as fh:
            doc = json.load(fh)
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)

    def to_json(self, path: str):
        doc = asdict(self)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)


@dataclass
class TraceRow:
    t: int
    u: np.ndarray
    u_nom: np.ndarray
    err_inf: float
    step_ms: float


@dataclass
class WhiteboxTrace:
    e0x_norms: list[float] = field(default_factory=list)
    e0u_norms: list[float] = field(default_factory=list)
    e0_ini: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    noncore_max: list[int] = field(default_factory=list)
    wrap_step: int | None = None


@dataclass
class SimResult:
    config: RunConfig
    rows: list[TraceRow]
    summary: dict
    counters: dict
    edge_counters: dict
    whitebox: WhiteboxTrace | None = None


def build_four_tank(cfg: RunConfig):
    """Plant, quantized nominal controller and closed-loop matrix."""
    plant, _conv, xp_ini, x_ini = four_tank_fixture()
    nominal = four_tank_controller(cfg.scales.s, cfg.r)
    Abar = closed_loop_matrix(plant, nominal)
    chi = np.concatenate([xp_ini, x_ini])
    return plant, nominal, Abar, chi


def _controller_input(y: np.ndarray, u: np.ndarray, nominal: NominalController) -> np.ndarray:
    if nominal.feeds_back_output:
        return np.concatenate([y, u])
    return y


def run_simulation(cfg: RunConfig, system=None) -> SimResult:
    """Run the closed loop for cfg.steps and return the recorded trace.

    `system` may supply a prebuilt (plant, nominal) pair; by default the
    four-tank fixture is used.
    """
    if system is None:
        plant, nominal, _, _ = build_four_tank(cfg)
    else:
        plant, nominal = system
    plant = PlantModel(plant.A, plant.B, plant.C, plant.x_ini)
    plant_nom = PlantModel(plant.A, plant.B, plant.C, plant.x_ini)
    ctrl_nom = NominalController(
        nominal.F, nominal.G, nominal.H, nominal.x_ini, nominal.feeds_back_output
    )
    scales = cfg.scales

    root = np.random.SeedSequence(cfg.seed)
    ss_key, ss_setup, ss_sensor = root.spawn(3)
    rng_key = np.random.default_rng(ss_key)
    rng_setup = np.random.default_rng(ss_setup)
    rng_sensor = np.random.default_rng(ss_sensor)

    edge = OpCounter()
    whitebox = WhiteboxTrace() if (cfg.whitebox and cfg.mode != "plaintext") else None

    if cfg.mode == "plaintext":
        ctrl = NominalController(
            nominal.F, nominal.G, nominal.H, nominal.x_ini, nominal.feeds_back_output
        )
        sk = None
        layout = None
    else:
        sk = keygen(cfg.params, cfg.dist, rng_key)
        if cfg.mode == "naive":
            ctrl = EncControllerNaive.setup(nominal, scales, sk, cfg.gadget, rng_setup)
            layout = None
        else:
            ctrl = EncControllerPacked.setup(nominal, scales, sk, cfg.gadget, rng_setup)
            layout = ctrl.layout

    if whitebox is not None:
        b, _ = budget_for_system(
            Abar=closed_loop_matrix(plant, nominal),
            B=plant.B,
            G=nominal.G,
            H=nominal.H,
            F=nominal.F,
            chi=np.concatenate([plant.x_ini, nominal.x_ini]),
            r=cfg.r,
            s=scales.s,
            L=scales.L,
            tau=PackLayout.for_dims(cfg.params, nominal.n, nominal.m, nominal.p_in).tau,
            N=cfg.N,
            d=cfg.gadget.d,
            nu=cfg.nu,
            sd=cfg.sd,
            sigma=cfg.sigma,
        )
        if cfg.mode == "naive":
            whitebox.alpha, whitebox.beta = b.alpha, b.beta
        else:
            whitebox.alpha, whitebox.beta = b.alpha_p, b.beta_p
        whitebox.gamma = b.gamma

    def probe_state():
        if cfg.mode == "naive":
            raw, scaled = coeff_trace(ctrl.x_ct, scales, sk)
            return raw, scaled[0]
        slots_raw, slots = slot_trace(ctrl.x_ct, ctrl.n, layout, scales, sk)
        raw, _ = coeff_trace([ctrl.x_ct], scales, sk)
        return raw, slots

    prev_raw = None
    x0_prev = None
    if whitebox is not None:
        prev_raw, x0_prev = probe_state()
        whitebox.e0_ini = float(np.max(np.abs(x0_prev - nominal.x_ini)))

    Fq = nominal.F.astype(np.int64)
    q = cfg.q
    rows: list[TraceRow] = []
    for t in range(cfg.steps):
        y = plant.output()
        t0 = time.perf_counter()
        if cfg.mode == "plaintext":
            u = ctrl.output()
        elif cfg.mode == "naive":
            u_cts = ctrl.output()
            u = actuate_naive(u_cts, scales, sk, edge)
        else:
            u_ct = ctrl.output()
            u = actuate_packed(u_ct, ctrl.m, scales, sk, layout, edge)
        t1 = time.perf_counter()

        if whitebox is not None:
            e0u = u - nominal.H @ x0_prev
            whitebox.e0u_norms.append(float(np.max(np.abs(e0u))))

        ytilde = _controller_input(y, u, nominal)

        t2 = time.perf_counter()
        if cfg.mode == "plaintext":
            ctrl.update(ytilde)
        elif cfg.mode == "naive":
            y_cts = sensor_encrypt(ytilde, scales, sk, rng_sensor, edge)
            ctrl.update(y_cts)
        else:
            y_ct = sensor_encrypt_packed(ytilde, scales, sk, layout, rng_sensor, edge)
            ctrl.update(y_ct)
        t3 = time.perf_counter()

        if whitebox is not None:
            raw, x0 = probe_state()
            e0x = x0 - (nominal.F @ x0_prev + nominal.G @ ytilde)
            whitebox.e0x_norms.append(float(np.max(np.abs(e0x))))
            if cfg.mode == "naive":
                # Non-constant coefficient rows follow x_i+ = F x_i + e_i;
                # a wrap shows up as a jump of order q in the residual.
                resid = raw[1:].astype(np.int64) - prev_raw[1:] @ Fq.T
                if whitebox.wrap_step is None and np.max(np.abs(resid)) > q // 4:
                    whitebox.wrap_step = t
                whitebox.noncore_max.append(int(np.max(np.abs(raw[1:]))))
            else:
                mask = np.ones(cfg.N, dtype=bool)
                mask[:: layout.stride] = False
                whitebox.noncore_max.append(int(np.max(np.abs(raw[mask]))))
            prev_raw, x0_prev = raw, x0

        # Lock-step nominal loop (exact reals, unquantized feedback).
        u_nom = ctrl_nom.output()
        y_nom = plant_nom.output()
        ctrl_nom.update(_controller_input(y_nom, u_nom, nominal))
        plant_nom.step(u_nom)

        plant.step(u)
        err = float(np.max(np.abs(u - u_nom)))
        rows.append(
            TraceRow(t, u.copy(), u_nom.copy(), err, ((t1 - t0) + (t3 - t2)) * 1e3)
        )

    errs = np.array([row.err_inf for row in rows])
    times = np.array([row.step_ms for row in rows])
    summary = {
        "mode": cfg.mode,
        "steps": cfg.steps,
        "seed": cfg.seed,
        "max_err_inf": float(errs.max()),
        "mean_err_inf": float(errs.mean()),
        "time_ms_mean": float(times.mean()),
        "time_ms_max": float(times.max()),
        "time_ms_min": float(times.min()),
        "time_ms_std": float(times.std()),
        "ntt_fallbacks": get_context(cfg.params).fallback_count,
    }
    counters = ctrl.counter.snapshot() if cfg.mode != "plaintext" else {}
    result = SimResult(cfg, rows, summary, counters, edge.snapshot(), whitebox)
    if cfg.out:
        write_trace_csv(cfg.out, result)
    return result


# ---------------------------------------------------------------------------
# Trace CSV IO.


def trace_header(m: int) -> list[str]:
    return (
        ["t"]
        + [f"u_{i}" for i in range(m)]
        + [f"unom_{i}" for i in range(m)]
        + ["err_inf", "step_ms"]
    )


def write_trace_csv(path: str, result: SimResult):
    m = result.rows[0].u.shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(trace_header(m)) + "\n")
        for row in result.rows:
            cells = (
                [str(row.t)]
                + [f"{v:.12g}" for v in row.u]
                + [f"{v:.12g}" for v in row.u_nom]
                + [f"{row.err_inf:.12g}", f"{row.step_ms:.12g}"]
            )
            fh.write(",".join(cells) + "\n")


def read_trace_csv(path: str) -> dict:
    """Parse a trace file; err_inf is recomputed from the u columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        m = sum(1 for h in header if h.startswith("u_"))
        expect = trace_header(m)
        if header != expect:
            raise ValueError(f"trace schema mismatch: {header} != {expect}")
        t, u, unom, err, ms = [], [], [], [], []
        for line in fh:
            cells = line.strip().split(",")
            t.append(int(cells[0]))
            u.append([float(v) for v in cells[1 : 1 + m]])
            unom.append([float(v) for v in cells[1 + m : 1 + 2 * m]])
            err.append(float(cells[1 + 2 * m]))
            ms.append(float(cells[2 + 2 * m]))
    t = np.array(t)
    if len(t) and not np.all(np.diff(t) > 0):
        raise ValueError("trace time column is not strictly increasing")
    u = np.array(u)
    unom = np.array(unom)
    recomputed = np.max(np.abs(u - unom), axis=1) if len(t) else np.array([])
    return {
        "t": t,
        "u": u,
        "u_nom": unom,
        "err_inf": recomputed,
        "err_inf_file": np.array(err),
        "step_ms": np.array(ms),
    }


# ---------------------------------------------------------------------------
# Benchmarking.


def _bench_one(doc: dict) -> tuple[list[float], dict]:
    res = run_simulation(RunConfig(**doc))
    return [r.step_ms for r in res.rows], res.counters


def run_bench(
    cfg: RunConfig, repetitions: int = 1, modes=("naive", "packed"), parallel: bool = False
) -> dict:
    """Per-step wall-clock statistics per mode (reporting only).

    With parallel=True independent repetitions run in separate worker
    processes (each with its own RNG stream derived from the seed);
    per-step times then reflect a loaded machine, so the serial default
    is what comparisons should use.
    """
    table = {}
    for mode in modes:
        docs = [
            {
                **asdict(cfg),
                "mode": mode,
                "seed": cfg.seed + rep,
                "out": None,
                "whitebox": False,
            }
            for rep in range(repetitions)
        ]
        if parallel and repetitions > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=min(repetitions, 4)) as pool:
                results = list(pool.map(_bench_one, docs))
        else:
            results = [_bench_one(doc) for doc in docs]
        times = np.concatenate([ms for ms, _ in results])
        table[mode] = {
            "mean_ms": float(times.mean()),
            "max_ms": float(times.max()),
            "min_ms": float(times.min()),
            "std_ms": float(times.std()),
            "counters": results[-1][1],
        }
    return table
