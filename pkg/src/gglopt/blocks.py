"""Block-wise SGL: screen the covariance at lambda1 and solve each connected component alone."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .admm import DEFAULT_CONFIG, solve
from .core import CovInput, Family, PenaltySpec, Solution, SolveDiagnostics, SolverConfig, objective


@dataclass(frozen=True)
class ComponentPartition:
    labels: np.ndarray
    component_count: int
    component_sizes: np.ndarray

    def members(self, c):
        return np.flatnonzero(self.labels == c)


def threshold_graph(S, lambda1):
    """Adjacency ``|S_ij| > lambda1`` for i != j (strict, so ties are screened out)."""
    A = np.abs(np.asarray(S, dtype=float)) > lambda1
    np.fill_diagonal(A, False)
    return A


def connected_components(adjacency) -> ComponentPartition:
    """Component labels numbered in order of each component's lowest-index vertex."""
    adjacency = np.asarray(adjacency, dtype=bool)
    count, raw = csgraph.connected_components(sparse.csr_matrix(adjacency), directed=False)
    # scipy does not document its numbering, so renumber by first occurrence
    _, first = np.unique(raw, return_index=True)
    order = np.empty(count, dtype=int)
    order[np.argsort(first)] = np.arange(count)
    labels = order[raw]
    sizes = np.bincount(labels, minlength=count)
    return ComponentPartition(labels, count, sizes)


def thread_count():
    """Worker cap from GGLOPT_THREADS; 0 or unset means one per CPU."""
    raw = os.environ.get("GGLOPT_THREADS", "").strip()
    n = int(raw) if raw else 0
    return n if n > 0 else (os.cpu_count() or 1)


def solve_sgl_blockwise(S, N, lambda1, cfg: SolverConfig = DEFAULT_CONFIG) -> Solution:
    t0 = time.perf_counter()
    S = np.asarray(S, dtype=float)
    cov = CovInput([S], [N]).check()
    pen = PenaltySpec(Family.SGL, lambda1)
    p = S.shape[0]
    part = connected_components(threshold_graph(S, lambda1))

    theta = np.zeros((p, p))
    blocks = []
    for c in range(part.component_count):
        idx = part.members(c)
        if idx.size == 1:
            i = idx[0]
            theta[i, i] = 1.0 / S[i, i]
        else:
            blocks.append(idx)

    def run(idx):
        sub = CovInput([S[np.ix_(idx, idx)]], [N])
        return solve(sub, pen, cfg)

    workers = min(thread_count(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, blocks))
    else:
        results = [run(idx) for idx in blocks]

    iters, r_max, s_max, ok = 0, 0.0, 0.0, True
    for idx, sol in zip(blocks, results):
        theta[np.ix_(idx, idx)] = sol.theta[0]
        d = sol.diagnostics
        iters += d.iterations
        r_max = max(r_max, d.primal_residual)
        s_max = max(s_max, d.dual_residual)
        ok = ok and d.converged

    theta_t = (theta,)
    lowrank = (np.zeros((p, p)),)
    try:
        obj = objective(cov, pen, theta_t, lowrank)
    except ValueError:
        obj = float("nan")
    diag = SolveDiagnostics(
        iterations=iters,
        primal_residual=r_max,
        dual_residual=s_max,
        objective_value=obj,
        converged=ok,
        wall_time_seconds=time.perf_counter() - t0,
    )
    return Solution(theta_t, lowrank, diag)


def fragmenting_lambda(S, max_component):
    """Smallest off-diagonal magnitude whose threshold graph has no component above ``max_component``.

    Raising lambda1 only removes edges, so the largest component size is
    monotone and a bisection over the sorted magnitudes suffices.
    """
    S = np.asarray(S, dtype=float)
    vals = np.unique(np.abs(S[np.triu_indices(S.shape[0], 1)]))
    vals = np.concatenate([[0.0], vals])

    def largest(lam):
        return connected_components(threshold_graph(S, lam)).component_sizes.max()

    lo, hi = 0, vals.size - 1
    if largest(vals[lo]) <= max_component:
        return float(vals[lo])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if largest(vals[mid]) <= max_component:
            hi = mid
        else:
            lo = mid
    return float(vals[hi])
