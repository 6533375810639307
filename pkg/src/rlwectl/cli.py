"""Command-line front end: keygen, simulate, check-params, bench.

Configuration comes from a JSON file plus flag overrides; any assertion
failure exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import serialize
from .control import closed_loop_matrix
from .enc_controller import EncControllerNaive, EncControllerPacked
from .packing import PackLayout
from .planner import budget_for_system, check_feasibility
from .rlwe import keygen as rlwe_keygen
from .sim import RunConfig, build_four_tank, run_bench, run_simulation


def _load_config(args) -> RunConfig:
    overrides = {
        "mode": getattr(args, "mode", None),
        "steps": getattr(args, "steps", None),
        "r": getattr(args, "r", None),
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "N": getattr(args, "ring_degree", None),
    }
    if getattr(args, "L", None) is not None:
        overrides["l_inv"] = int(round(1.0 / args.L))
    if args.config:
        return RunConfig.from_json(args.config, **overrides)
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_keygen(args) -> int:
    cfg = _load_config(args)
    _, nominal, _, _ = build_four_tank(cfg)
    root = np.random.SeedSequence(cfg.seed)
    ss_key, ss_setup, _ = root.spawn(3)
    sk = rlwe_keygen(cfg.params, cfg.dist, np.random.default_rng(ss_key))
    rng_setup = np.random.default_rng(ss_setup)
    if cfg.mode == "packed":
        ctrl = EncControllerPacked.setup(nominal, cfg.scales, sk, cfg.gadget, rng_setup)
    else:
        ctrl = EncControllerNaive.setup(nominal, cfg.scales, sk, cfg.gadget, rng_setup)
    serialize.write_secret_key(args.secret_key, sk)
    serialize.write_eval_bundle(args.bundle, ctrl)
    print(f"wrote secret key to {args.secret_key}")
    print(
        f"wrote evaluation bundle ({ctrl.gsw_ciphertext_count()} GSW parameter "
        f"ciphertexts, mode={cfg.mode}) to {args.bundle}"
    )
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    _warn_on_modulus_condition(cfg)
    result = run_simulation(cfg)
    print(json.dumps(result.summary, indent=1))
    if cfg.out:
        print(f"trace written to {cfg.out}")
    return 0


def _warn_on_modulus_condition(cfg: RunConfig):
    """Report (as warnings) when the sufficient modulus condition fails.

    The condition is conservative; a violated bound does not imply a bad
    run, so this never aborts.
    """
    if cfg.mode == "plaintext":
        return
    try:
        plant, nominal, Abar, chi = build_four_tank(cfg)
        tau = PackLayout.for_dims(cfg.params, nominal.n, nominal.m, nominal.p_in).tau
        budget, _ = budget_for_system(
            Abar=Abar, B=plant.B, G=nominal.G, H=nominal.H, F=nominal.F, chi=chi,
            r=cfg.r, s=cfg.scales.s, L=cfg.scales.L, tau=tau, N=cfg.N,
            d=cfg.gadget.d, nu=cfg.nu, sd=cfg.sd, sigma=cfg.sigma,
        )
        q_min = budget.q_min_packed if cfg.mode == "packed" else budget.q_min_naive
        if cfg.q <= q_min:
            print(
                f"warning: q = {cfg.q} is below the worst-case sufficient bound "
                f"{q_min:.3g} for mode {cfg.mode}; the guarantee does not apply "
                f"(the run may still behave well)",
                file=sys.stderr,
            )
    except Exception as exc:  # diagnostics must not block the run
        print(f"warning: modulus condition check skipped ({exc})", file=sys.stderr)


def cmd_check_params(args) -> int:
    cfg = _load_config(args)
    plant, nominal, Abar, chi = build_four_tank(cfg)
    tau = PackLayout.for_dims(cfg.params, nominal.n, nominal.m, nominal.p_in).tau
    report: dict = {"config": asdict(cfg), "tau": tau, "d": cfg.gadget.d}
    conventions = (
        ("bound-inf", "std-2norm") if args.convention == "both" else (args.convention,)
    )
    for conv in conventions:
        if conv == "std-2norm":
            # Reference convention: library-default eigenvector scaling
            # and the unquantized conversion.
            from rlwectl.control import closed_loop_matrix, four_tank_raw_controller

            ctrl = four_tank_raw_controller("unit2")
            Abar_c = closed_loop_matrix(plant, ctrl)
        else:
            ctrl, Abar_c = nominal, Abar
        common = dict(
            Abar=Abar_c,
            B=plant.B,
            G=ctrl.G,
            H=ctrl.H,
            F=ctrl.F,
            chi=chi,
            r=cfg.r,
            s=cfg.scales.s,
            L=cfg.scales.L,
            tau=tau,
            N=cfg.N,
            d=cfg.gadget.d,
            nu=cfg.nu,
            sd=cfg.sd,
            sigma=cfg.sigma,
        )
        budget, cert = budget_for_system(convention=conv, **common)
        norm_H = budget.inputs["norm_H"]
        chi_norm = budget.inputs["chi_norm"]
        feas = check_feasibility(args.eps, budget, norm_H, chi_norm, cert.M, cfg.q)
        report[conv] = {
            "sigma_mult": budget.sigma_mult,
            "alpha": budget.alpha,
            "beta": budget.beta,
            "gamma": budget.gamma,
            "alpha_packed": budget.alpha_p,
            "beta_packed": budget.beta_p,
            "eta_bar": budget.eta_bar,
            "eta_bar_packed": budget.eta_bar_p,
            "q_min_naive": budget.q_min_naive,
            "q_min_packed": budget.q_min_packed,
            "q_ok_naive": feas.q_ok_naive,
            "q_ok_packed": feas.q_ok_packed,
            "eps_min": feas.eps_min,
            "eps_min_naive": feas.eps_min_naive,
            "eps_min_packed": feas.eps_min_packed,
            "perf_ok_naive": feas.perf_ok_naive,
            "perf_ok_packed": feas.perf_ok_packed,
            "M": cert.M,
            "lambda": cert.lam,
        }
        print(f"== convention {conv}")
        print(f"   sigma_mult = {budget.sigma_mult:.6g}")
        print(f"   alpha={budget.alpha:.6g} beta={budget.beta:.6g} gamma={budget.gamma:.6g}")
        print(f"   alpha'={budget.alpha_p:.6g} beta'={budget.beta_p:.6g}")
        print(f"   eta_bar={budget.eta_bar:.6g} eta_bar'={budget.eta_bar_p:.6g}")
        print(
            f"   q_min naive/packed = {budget.q_min_naive:.6g} / {budget.q_min_packed:.6g}"
            f"  (q = {cfg.q}: ok={feas.q_ok_naive}/{feas.q_ok_packed})"
        )
        print(f"   smallest guaranteed eps = {feas.eps_min:.6g}")
    print("-- machine readable --")
    print(json.dumps(report, indent=1))
    return 0


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    table = run_bench(
        cfg, repetitions=args.reps, modes=tuple(args.modes), parallel=args.parallel
    )
    print(f"{'mode':<10}{'mean ms':>10}{'max ms':>10}{'min ms':>10}{'std':>8}")
    for mode, stats in table.items():
        print(
            f"{mode:<10}{stats['mean_ms']:>10.2f}{stats['max_ms']:>10.2f}"
            f"{stats['min_ms']:>10.2f}{stats['std_ms']:>8.2f}"
        )
    print(json.dumps({m: {k: v for k, v in s.items()} for m, s in table.items()}, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rlwectl")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--mode", choices=("plaintext", "naive", "packed"))
        p.add_argument("--steps", type=int)
        p.add_argument("--r", type=float, help="sensor quantization step")
        p.add_argument("--L", type=float, help="headroom scale (1/L integer)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="trace CSV output path")
        p.add_argument("--ring-degree", type=int, dest="ring_degree")

    p = sub.add_parser("keygen", help="generate key material")
    common(p)
    p.add_argument("--secret-key", default="secret_key.bin")
    p.add_argument("--bundle", default="eval_bundle.bin")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("simulate", help="run the closed loop")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-params", help="evaluate bounds and feasibility")
    common(p)
    p.add_argument("--eps", type=float, default=1e9, help="target performance bound")
    p.add_argument(
        "--convention",
        choices=("bound-inf", "std-2norm", "both"),
        default="both",
    )
    p.set_defaults(func=cmd_check_params)

    p = sub.add_parser("bench", help="per-step timing statistics")
    common(p)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--modes", nargs="+", default=["naive", "packed"])
    p.add_argument("--parallel", action="store_true", help="run repetitions concurrently")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
