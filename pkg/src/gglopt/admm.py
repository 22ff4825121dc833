"""Scaled-form ADMM for single, group and fused graphical lasso, with optional latent low-rank part.

Splitting: Omega_k = Theta_k - L_k.  One sweep updates Omega (log-det prox), Theta
(penalty prox), L (nuclear/PSD prox), then the scaled dual U.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from .core import (
    CovInput,
    DomainError,
    Family,
    PenaltySpec,
    Solution,
    SolveDiagnostics,
    SolverConfig,
    objective,
    scale_to_correlation,
    validate_input,
    ValidationError,
)
from .prox import (
    prox_fused_l1,
    prox_log_det,
    prox_nuclear_psd,
    prox_sparse_group,
    soft_threshold,
    symmetrize,
)

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = SolverConfig()


@dataclass
class AdmmState:
    omega: list
    theta: list
    lowrank: list
    dual: list
    rho: float
    iteration: int = 0


def _initial_state(cov, latent, rho, warm_start):
    p, K = cov.p, cov.K
    if warm_start is None:
        theta = [np.eye(p) for _ in range(K)]
        lowrank = [np.zeros((p, p)) for _ in range(K)]
        dual = [np.zeros((p, p)) for _ in range(K)]
    else:
        theta = [np.array(t, dtype=float) for t in warm_start.theta]
        lowrank = [np.array(l, dtype=float) if latent else np.zeros((p, p)) for l in warm_start.lowrank]
        dual = []
        for S, T, L in zip(cov.matrices, theta, lowrank):
            # exact scaled dual at a fixed point: U = ((Theta - L)^-1 - S) / rho
            try:
                dual.append(symmetrize(np.linalg.inv(T - L) - S) / rho)
            except np.linalg.LinAlgError:
                dual.append(np.zeros((p, p)))
    omega = [T - L for T, L in zip(theta, lowrank)]
    return AdmmState(omega, theta, lowrank, dual, rho)


def _theta_update(family, V, lambda1, lambda2, rho):
    """Penalty prox applied to the list of matrices ``V`` (diagonals untouched)."""
    K, p = len(V), V[0].shape[0]
    if family is Family.SGL:
        out = soft_threshold(V[0], lambda1 / rho)
        np.fill_diagonal(out, np.diag(V[0]))
        return [out]
    iu = np.triu_indices(p, 1)
    stacked = np.stack(V)
    upper = stacked[:, iu[0], iu[1]]
    if family is Family.GGL:
        upper = prox_sparse_group(upper, lambda1 / rho, lambda2 / rho, axis=0)
    else:
        upper = prox_fused_l1(upper, lambda1 / rho, lambda2 / rho)
    out = []
    for k in range(K):
        T = np.zeros((p, p))
        T[iu] = upper[k]
        T = T + T.T
        np.fill_diagonal(T, np.diag(V[k]))
        out.append(T)
    return out


def _diagonal_solution(cov, pen, t0):
    theta = tuple(np.diag(1.0 / np.diag(S)) for S in cov.matrices)
    lowrank = tuple(np.zeros_like(t) for t in theta)
    diag = SolveDiagnostics(
        iterations=0,
        primal_residual=0.0,
        dual_residual=0.0,
        objective_value=objective(cov, pen, theta, lowrank),
        converged=True,
        wall_time_seconds=time.perf_counter() - t0,
    )
    return Solution(theta, lowrank, diag)


def _max_offdiag(cov):
    vals = []
    for S in cov.matrices:
        A = np.abs(S)
        np.fill_diagonal(A, 0.0)
        vals.append(A.max())
    return max(vals)


def admm(cov: CovInput, pen: PenaltySpec, cfg: SolverConfig = DEFAULT_CONFIG, warm_start=None,
         callback=None) -> Solution:
    """Run ADMM on an already validated problem (no correlation scaling).

    ``callback(state)`` is called after every sweep, if given.
    """
    t0 = time.perf_counter()
    family, latent = pen.family, pen.latent
    K, p = cov.K, cov.p
    mu = pen.mu_for(K)
    lam2 = pen.lambda2 if family is not Family.SGL else 0.0

    # screening: no off-diagonal above lambda1 means the unique solution is diagonal
    if not latent and _max_offdiag(cov) <= pen.lambda1:
        return _diagonal_solution(cov, pen, t0)

    state = _initial_state(cov, latent, cfg.rho_init, warm_start)
    rho = state.rho
    S = cov.matrices
    sqrt_n = np.sqrt(K) * p
    r_norm = s_norm = np.inf
    eps_pri = eps_dual = 0.0
    converged = False
    it = 0
    for it in range(1, int(cfg.max_iter) + 1):
        omega = [prox_log_det(T - L - U - Sk / rho, 1.0 / rho)
                 for Sk, T, L, U in zip(S, state.theta, state.lowrank, state.dual)]
        theta_old, lowrank_old = state.theta, state.lowrank
        V = [symmetrize(O + L + U) for O, L, U in zip(omega, lowrank_old, state.dual)]
        theta = _theta_update(family, V, pen.lambda1, lam2, rho)
        if latent:
            lowrank = [prox_nuclear_psd(T - O - U, m / rho)
                       for T, O, U, m in zip(theta, omega, state.dual, mu)]
        else:
            lowrank = lowrank_old
        resid = [O - T + L for O, T, L in zip(omega, theta, lowrank)]
        dual = [symmetrize(U + r) for U, r in zip(state.dual, resid)]

        r_norm = np.sqrt(sum(np.sum(r * r) for r in resid))
        s_sq = sum(np.sum((T - To) ** 2) for T, To in zip(theta, theta_old))
        if latent:
            s_sq += sum(np.sum((L - Lo) ** 2) for L, Lo in zip(lowrank, lowrank_old))
        s_norm = rho * np.sqrt(s_sq)
        norm_omega = np.sqrt(sum(np.sum(O * O) for O in omega))
        norm_tl = np.sqrt(sum(np.sum((T - L) ** 2) for T, L in zip(theta, lowrank)))
        norm_u = np.sqrt(sum(np.sum(U * U) for U in dual))
        eps_pri = sqrt_n * cfg.eps_abs + cfg.eps_rel * max(norm_omega, norm_tl)
        eps_dual = sqrt_n * cfg.eps_abs + cfg.eps_rel * rho * norm_u

        state.omega, state.theta, state.lowrank, state.dual = omega, theta, lowrank, dual
        state.iteration = it
        if callback is not None:
            callback(state)
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break
        if cfg.adaptive_rho:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                state.dual = [U / 2.0 for U in state.dual]
            elif s_norm > 10.0 * r_norm:
                rho /= 2.0
                state.dual = [U * 2.0 for U in state.dual]
            state.rho = rho

    theta = tuple(state.theta)
    lowrank = tuple(state.lowrank)
    try:
        obj = objective(cov, pen, theta, lowrank)
    except DomainError:
        obj = float("nan")
    if not converged:
        logger.warning("ADMM stopped after %d iterations without converging (r=%.3g, s=%.3g)",
                       it, r_norm, s_norm)
    diag = SolveDiagnostics(
        iterations=it,
        primal_residual=float(r_norm),
        dual_residual=float(s_norm),
        objective_value=obj,
        converged=converged,
        wall_time_seconds=time.perf_counter() - t0,
        eps_primal=float(eps_pri),
        eps_dual=float(eps_dual),
    )
    return Solution(theta, lowrank, diag, rho=rho)


def solve(cov: CovInput, pen: PenaltySpec, cfg: SolverConfig = DEFAULT_CONFIG, warm_start=None) -> Solution:
    """Validate, optionally rescale to correlations, and run ADMM."""
    if not isinstance(cov, CovInput):
        raise TypeError("cov must be a CovInput")
    cov.check()
    pen.check_against(cov)
    if not cfg.scale_to_correlation:
        return admm(cov, pen, cfg, warm_start)

    scaled, scales = [], []
    for S in cov.matrices:
        R, d = scale_to_correlation(S)
        scaled.append(R)
        scales.append(d)
    ccov = CovInput(scaled, cov.sample_counts)
    if warm_start is not None:
        warm_start = Solution(
            tuple(t * np.outer(d, d) for t, d in zip(warm_start.theta, scales)),
            tuple(l * np.outer(d, d) for l, d in zip(warm_start.lowrank, scales)),
            warm_start.diagnostics, warm_start.rho)
    sol = admm(ccov, pen, cfg, warm_start)
    theta = tuple(t / np.outer(d, d) for t, d in zip(sol.theta, scales))
    lowrank = tuple(l / np.outer(d, d) for l, d in zip(sol.lowrank, scales))
    try:
        obj = objective(cov, pen, theta, lowrank)
    except DomainError:
        obj = float("nan")
    d0 = sol.diagnostics
    diag = SolveDiagnostics(d0.iterations, d0.primal_residual, d0.dual_residual, obj, d0.converged,
                            d0.wall_time_seconds, d0.eps_primal, d0.eps_dual)
    return Solution(theta, lowrank, diag, rho=sol.rho)


def solve_sgl(S, N, lambda1, cfg: SolverConfig = DEFAULT_CONFIG, warm_start=None) -> Solution:
    return solve(CovInput([S], [N]), PenaltySpec(Family.SGL, lambda1), cfg, warm_start)


def solve_latent_sgl(S, N, lambda1, mu1, cfg: SolverConfig = DEFAULT_CONFIG, warm_start=None) -> Solution:
    pen = PenaltySpec(Family.SGL, lambda1, latent=True, mu1=(mu1,))
    return solve(CovInput([S], [N]), pen, cfg, warm_start)


def solve_multi(cov: CovInput, pen: PenaltySpec, cfg: SolverConfig = DEFAULT_CONFIG, warm_start=None) -> Solution:
    """Joint solve over K instances (GGL or FGL); SGL with K=1 is accepted too."""
    if pen.family is Family.SGL and cov.K != 1:
        raise ValidationError(["parameter: SGL requires K=1"])
    return solve(cov, pen, cfg, warm_start)


def _nearest_subgradient_fused(w, theta, l1, l2, tol):
    """Euclidean projection of w onto l1*d||x||_1 + l2*d TV(x) at x=theta."""
    K = len(w)
    D = np.diff(np.eye(K), axis=0)
    dtheta = D @ theta
    fixed = np.zeros(K)
    cols, lo, hi = [], [], []
    for k in range(K):
        if abs(theta[k]) > tol:
            fixed += l1 * np.sign(theta[k]) * np.eye(K)[k]
        elif l1 > 0:
            cols.append(l1 * np.eye(K)[k])
            lo.append(-1.0)
            hi.append(1.0)
    for j in range(K - 1):
        if abs(dtheta[j]) > tol:
            fixed += l2 * np.sign(dtheta[j]) * D[j]
        elif l2 > 0:
            cols.append(l2 * D[j])
            lo.append(-1.0)
            hi.append(1.0)
    target = w - fixed
    if not cols:
        return fixed
    A = np.column_stack(cols)
    res = lsq_linear(A, target, bounds=(lo, hi), method="bvls", tol=1e-14)
    return fixed + A @ res.x


def kkt_residual(cov: CovInput, pen: PenaltySpec, sol: Solution, zero_tol: float = 0.0) -> float:
    """max_k || (Theta_k - L_k)^-1 - S_k - G_k ||_inf with G the nearest penalty subgradient.

    Entries of Theta with ``|x| <= zero_tol`` count as zeros.
    """
    K, p = cov.K, cov.p
    W = []
    for k, (S, T, L) in enumerate(zip(cov.matrices, sol.theta, sol.lowrank)):
        try:
            W.append(symmetrize(np.linalg.inv(T - L)) - S)
        except np.linalg.LinAlgError:
            raise DomainError(f"Theta - L is singular (instance k={k})", index=k) from None
    W = np.stack(W)
    T = np.stack(sol.theta)
    off = ~np.eye(p, dtype=bool)
    l1 = pen.lambda1
    l2 = pen.lambda2 if pen.family is not Family.SGL else 0.0

    G = np.zeros_like(W)
    w, t = W[:, off], T[:, off]
    nz = np.abs(t) > zero_tol
    if pen.family is Family.SGL or l2 == 0:
        g = np.where(nz, l1 * np.sign(t), np.clip(w, -l1, l1))
    elif pen.family is Family.GGL:
        g = np.empty_like(w)
        tnorm = np.sqrt(np.sum(np.where(nz, t, 0.0) ** 2, axis=0))
        group_nz = tnorm > 0
        # nonzero groups: fixed l2 direction, l1 box only on zero coordinates
        with np.errstate(invalid="ignore", divide="ignore"):
            dirn = np.where(group_nz, np.where(nz, t, 0.0) / np.where(group_nz, tnorm, 1.0), 0.0)
        g_nz = np.where(nz, l1 * np.sign(t), np.clip(w, -l1, l1)) + l2 * dirn
        # zero groups: projection onto box + ball is w - prox_sparse_group(w)
        g_zero = w - prox_sparse_group(w, l1, l2, axis=0)
        g = np.where(group_nz[None, :], g_nz, g_zero)
    else:
        g = np.empty_like(w)
        for j in range(w.shape[1]):
            g[:, j] = _nearest_subgradient_fused(w[:, j], np.where(nz[:, j], t[:, j], 0.0), l1, l2, tol=zero_tol)
    G[:, off] = g
    return float(np.max(np.abs(W - G)))
