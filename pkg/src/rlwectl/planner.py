"""Closed-form error budgets, decay certificates and feasibility checks.

Per external product the fresh decryption error is bounded by
sigma_mult = d*N*sigma*nu.  Feeding that through one controller step
gives per-step perturbation bounds (alpha, beta, gamma) for the
element-wise controller and (alpha', beta', gamma) for the packed one;
combining them with a decay certificate ||Abar^k|| <= M*lambda^k yields
the trajectory envelope eta, a lower bound on the modulus q, and the
smallest guaranteed performance error epsilon.

Two evaluation conventions are supported:

* "bound-inf" (default, used by all guarantees and tests): sigma is the
  hard truncation bound of the error distribution and matrix norms are
  induced infinity norms.
* "std-2norm": sigma is the distribution's standard deviation and
  matrix norms are spectral norms.  This reproduces reference epsilon
  figures computed that way; it is reported for comparison only and
  never used as a guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import inf_norm_mat


class InstabilityError(ValueError):
    """The closed-loop matrix is not Schur stable."""


def _norm(M, mode: str) -> float:
    if mode == "inf":
        return inf_norm_mat(M)
    return float(np.linalg.norm(np.atleast_2d(np.asarray(M, dtype=float)), 2))


def _vec_norm(v, mode: str) -> float:
    v = np.asarray(v, dtype=float).ravel()
    if mode == "inf":
        return float(np.max(np.abs(v)))
    return float(np.linalg.norm(v))


@dataclass(frozen=True)
class StabilityCert:
    """||Abar^k|| <= M * lambda^k, certified by direct powering up to K.

    The powering stops at the first K with ||Abar^K|| <= lambda^K; by
    submultiplicativity ||Abar^(aK+b)|| <= ||Abar^K||^a * ||Abar^b||,
    every k > K is then covered as well.
    """

    M: float
    lam: float
    horizon: int


def estimate_decay(Abar, norm_mode: str = "inf", max_horizon: int = 200000) -> StabilityCert:
    """Certificate with lambda midway between the spectral radius and 1."""
    Abar = np.asarray(Abar, dtype=float)
    rho = float(np.max(np.abs(np.linalg.eigvals(Abar))))
    if rho >= 1.0:
        raise InstabilityError(f"spectral radius {rho} >= 1")
    lam = (1.0 + rho) / 2.0
    M = 1.0
    P = np.eye(Abar.shape[0])
    k = 0
    lam_k = 1.0
    while True:
        nk = _norm(P, norm_mode)
        M = max(M, nk / lam_k)
        if k > 0 and nk <= lam_k:
            break
        if k >= max_horizon:
            raise InstabilityError("decay certificate did not close within the horizon")
        P = P @ Abar
        k += 1
        lam_k *= lam
    return StabilityCert(M=M, lam=lam, horizon=k)


def sigma_mult(d: int, N: int, sigma: float, nu: int) -> float:
    """Worst-case fresh error of one external product: d*N*sigma*nu."""
    return float(d) * float(N) * float(sigma) * float(nu)


@dataclass
class ErrorBudget:
    sigma_mult: float
    alpha: float
    beta: float
    gamma: float
    alpha_p: float
    beta_p: float
    eta_bar: float
    eta_bar_p: float
    q_min_naive: float
    q_min_packed: float
    convention: str = "bound-inf"
    inputs: dict = field(default_factory=dict)


def eta(alpha: float, beta: float, gamma: float, cert: StabilityCert, norm_B: float, chi_norm: float) -> float:
    """M * (||[x_p_ini; x_ini]|| + gamma + (||B|| beta + alpha) / (1 - lambda))."""
    return cert.M * (chi_norm + gamma + (norm_B * beta + alpha) / (1.0 - cert.lam))


def error_budget(
    *,
    r: float,
    s: float,
    L: float,
    n: int,
    p: int,
    norm_G: float,
    norm_H: float,
    norm_Ft: float,
    norm_Gt: float,
    norm_Ht: float,
    norm_B: float,
    chi_norm: float,
    tau: int,
    sigma: float,
    sig_mult: float,
    cert: StabilityCert,
    convention: str = "bound-inf",
) -> ErrorBudget:
    """Evaluate every closed-form bound for one parameter set."""
    rsL = r * s * L
    log2tau = float(np.log2(tau))
    alpha = rsL * (n + p) * sig_mult + r * norm_G / 2.0 + r * L * norm_G * sigma
    beta = r * s * s * L * n * sig_mult
    gamma = rsL * sigma
    alpha_p = alpha + rsL * (n * norm_Ft + p * norm_Gt / s) * log2tau * sig_mult
    beta_p = beta + rsL * n * norm_Ht * log2tau * sig_mult
    eta_bar = eta(alpha, beta, gamma, cert, norm_B, chi_norm)
    eta_bar_p = eta(alpha_p, beta_p, gamma, cert, norm_B, chi_norm)
    if rsL > 0:
        q_min_naive = 2.0 * max(eta_bar / rsL, (norm_H * eta_bar + beta) / (rsL * s))
        q_min_packed = 2.0 * max(
            eta_bar_p / rsL, (norm_H * eta_bar_p + beta_p) / (rsL * s)
        )
    else:
        q_min_naive = q_min_packed = float("inf")
    return ErrorBudget(
        sigma_mult=sig_mult,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        alpha_p=alpha_p,
        beta_p=beta_p,
        eta_bar=eta_bar,
        eta_bar_p=eta_bar_p,
        q_min_naive=q_min_naive,
        q_min_packed=q_min_packed,
        convention=convention,
        inputs={
            "r": r,
            "s": s,
            "L": L,
            "n": n,
            "p": p,
            "tau": tau,
            "sigma": sigma,
            "norm_G": norm_G,
            "norm_H": norm_H,
            "norm_Ft": norm_Ft,
            "norm_Gt": norm_Gt,
            "norm_Ht": norm_Ht,
            "norm_B": norm_B,
            "chi_norm": chi_norm,
            "M": cert.M,
            "lambda": cert.lam,
        },
    )


def q_bounds(budget: ErrorBudget) -> tuple[float, float]:
    return budget.q_min_naive, budget.q_min_packed


@dataclass
class FeasibilityReport:
    perf_ok_naive: bool
    perf_ok_packed: bool
    q_ok_naive: bool
    q_ok_packed: bool
    eps_min_naive: float
    eps_min_packed: float
    eps_min: float
    slack_naive: float
    slack_packed: float


def check_feasibility(
    eps: float, budget: ErrorBudget, norm_H: float, chi_norm: float, M: float, q: int
) -> FeasibilityReport:
    """Evaluate the sufficient performance conditions at a target eps.

    Condition pair (per controller): beta <= eps/2 and
    eta_bar <= M * ||[x_p_ini; x_ini]|| + eps / (2 ||H||).
    eps_min is the smallest eps for which both controllers' pairs hold.
    """
    eps_min_naive = max(2.0 * budget.beta, 2.0 * norm_H * (budget.eta_bar - M * chi_norm))
    eps_min_packed = max(
        2.0 * budget.beta_p, 2.0 * norm_H * (budget.eta_bar_p - M * chi_norm)
    )
    eps_min = max(eps_min_naive, eps_min_packed)
    naive_ok = (budget.beta <= eps / 2.0) and (
        budget.eta_bar <= M * chi_norm + eps / (2.0 * norm_H)
    )
    packed_ok = (budget.beta_p <= eps / 2.0) and (
        budget.eta_bar_p <= M * chi_norm + eps / (2.0 * norm_H)
    )
    return FeasibilityReport(
        perf_ok_naive=naive_ok,
        perf_ok_packed=packed_ok,
        q_ok_naive=q > budget.q_min_naive,
        q_ok_packed=q > budget.q_min_packed,
        eps_min_naive=eps_min_naive,
        eps_min_packed=eps_min_packed,
        eps_min=eps_min,
        slack_naive=eps - eps_min_naive,
        slack_packed=eps - eps_min_packed,
    )


def budget_for_system(
    *,
    Abar,
    B,
    G,
    H,
    F,
    chi,
    r: float,
    s: float,
    L: float,
    tau: int,
    N: int,
    d: int,
    nu: int,
    sd: float,
    sigma: float,
    convention: str = "bound-inf",
) -> tuple[ErrorBudget, StabilityCert]:
    """Budget + certificate for a concrete closed loop.

    convention "bound-inf" uses the truncation bound sigma and infinity
    norms; "std-2norm" uses the standard deviation sd and spectral
    norms (see module docstring).
    """
    if convention not in ("bound-inf", "std-2norm"):
        raise ValueError(f"unknown convention {convention!r}")
    mode = "inf" if convention == "bound-inf" else "two"
    sig = sigma if convention == "bound-inf" else sd
    cert = estimate_decay(Abar, norm_mode=mode)
    n = np.asarray(F).shape[0]
    p = np.asarray(G).shape[1]
    budget = error_budget(
        r=r,
        s=s,
        L=L,
        n=n,
        p=p,
        norm_G=_norm(G, mode),
        norm_H=_norm(H, mode),
        norm_Ft=_norm(np.asarray(F).T, mode),
        norm_Gt=_norm(np.asarray(G).T, mode),
        norm_Ht=_norm(np.asarray(H).T, mode),
        norm_B=_norm(B, mode),
        chi_norm=_vec_norm(chi, mode),
        tau=tau,
        sigma=sig,
        sig_mult=sigma_mult(d, N, sig, nu),
        cert=cert,
        convention=convention,
    )
    return budget, cert
