"""Grid search with the extended BIC."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import DEFAULT_CONFIG, solve
from .core import (
    CovInput,
    DomainError,
    Family,
    PenaltySpec,
    Solution,
    SolverConfig,
    ValidationError,
    Violation,
    logdet_pd,
    scale_to_correlation,
)

logger = logging.getLogger(__name__)

EDGE_TOL = 1e-8
TIE_TOL = 1e-9

__all__ = [
    "ParameterGrid",
    "SelectionEntry",
    "SelectionReport",
    "SelectionError",
    "ebic",
    "edge_count",
    "default_lambda_grid",
    "grid_search",
    "scale_to_correlation",
]


class SelectionError(RuntimeError):
    def __init__(self, message, report):
        self.report = report
        super().__init__(message)


@dataclass(frozen=True)
class ParameterGrid:
    lambda1_values: tuple
    lambda2_values: tuple = ()
    mu1_values: tuple = ()
    gamma: float = 0.5

    def __post_init__(self):
        for name in ("lambda1_values", "lambda2_values", "mu1_values"):
            object.__setattr__(self, name, tuple(float(v) for v in np.atleast_1d(getattr(self, name))))
        l1 = np.array(self.lambda1_values)
        problems = []
        if l1.size == 0:
            problems.append("lambda1_values is empty")
        elif np.any(l1 <= 0) or np.any(np.diff(l1) >= 0):
            problems.append("lambda1_values must be positive and strictly descending")
        allv = np.array(self.lambda1_values + self.lambda2_values + self.mu1_values)
        if not np.all(np.isfinite(allv)):
            problems.append("grid values must be finite")
        if np.any(np.array(self.lambda2_values) < 0) or np.any(np.array(self.mu1_values) < 0):
            problems.append("lambda2 and mu1 values must be nonnegative")
        if not 0.0 <= self.gamma <= 1.0:
            problems.append("gamma must lie in [0, 1]")
        if problems:
            raise ValidationError([Violation("grid", m) for m in problems])

    @property
    def latent(self):
        return len(self.mu1_values) > 0

    def points(self):
        """(lambda1, lambda2, mu1) triples: lambda1 descending, lambda2 ascending, mu1 innermost."""
        l2s = sorted(self.lambda2_values) or [0.0]
        mus = list(self.mu1_values) or [None]
        return [(l1, l2, mu) for l1 in self.lambda1_values for l2 in l2s for mu in mus]


@dataclass(frozen=True)
class SelectionEntry:
    lambda1: float
    lambda2: float
    mu1: float | None
    ebic: float
    edges: tuple
    converged: bool
    iterations: int


@dataclass
class SelectionReport:
    entries: list
    best: int | None
    solution: Solution | None
    gamma: float
    family: Family
    extra: dict = field(default_factory=dict)

    @property
    def best_entry(self):
        return None if self.best is None else self.entries[self.best]

    def to_dict(self):
        rows = []
        for i, e in enumerate(self.entries):
            rows.append({
                "index": i,
                "lambda1": e.lambda1,
                "lambda2": e.lambda2,
                "mu1": e.mu1,
                "ebic": e.ebic if np.isfinite(e.ebic) else None,
                "edges": list(e.edges),
                "converged": e.converged,
                "iterations": e.iterations,
                "best": i == self.best,
            })
        return {"family": self.family.value, "gamma": self.gamma, "best": self.best, "entries": rows}


def edge_count(theta, tol=EDGE_TOL):
    theta = np.asarray(theta)
    iu = np.triu_indices(theta.shape[0], 1)
    return int(np.sum(np.abs(theta[iu]) > tol))


def lowrank_dof(L, tol=1e-8):
    """Free parameters of a rank-r symmetric p x p matrix: r*p - r*(r-1)/2."""
    L = np.asarray(L, dtype=float)
    if not np.any(L):
        return 0
    d = np.linalg.eigvalsh(L)
    r = int(np.sum(np.abs(d) > tol * max(1.0, np.abs(d).max())))
    return r * L.shape[0] - r * (r - 1) // 2


def ebic(cov: CovInput, theta, gamma=0.5, lowrank=None, lowrank_df=True) -> float:
    """Extended BIC summed over instances.

    Likelihood uses ``Theta - L`` when ``lowrank`` is given; edges are counted on ``Theta``.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    theta = [np.asarray(t, dtype=float) for t in theta]
    if lowrank is None:
        lowrank = [np.zeros_like(t) for t in theta]
    p = cov.p
    total = 0.0
    for k, (S, N, T, L) in enumerate(zip(cov.matrices, cov.sample_counts, theta, lowrank)):
        R = T - np.asarray(L, dtype=float)
        E = edge_count(T)
        total += N * (np.sum(S * R) - logdet_pd(R, index=k)) + E * np.log(N) + 4.0 * E * gamma * np.log(p)
        if lowrank_df:
            total += lowrank_dof(L) * np.log(N)
    return float(total)


def default_lambda_grid(cov: CovInput, count: int) -> np.ndarray:
    """``count`` log-spaced values from the diagonal-solution threshold down by two decades."""
    if count < 2:
        raise ValueError("count must be >= 2")
    lmax = 0.0
    for S in cov.matrices:
        A = np.abs(np.asarray(S))
        np.fill_diagonal(A, 0.0)
        lmax = max(lmax, A.max())
    if lmax <= 0:
        lmax = 1.0
    return np.geomspace(lmax, lmax / 100.0, count)


def _penalty(family, l1, l2, mu, K):
    if mu is None:
        return PenaltySpec(family, l1, l2)
    return PenaltySpec(family, l1, l2, latent=True, mu1=(mu,) * K)


def grid_search(cov: CovInput, pen_family, grid: ParameterGrid, cfg: SolverConfig = DEFAULT_CONFIG) -> SelectionReport:
    family = Family.parse(pen_family)
    cov.check()
    if family is Family.SGL and grid.lambda2_values:
        raise ValidationError([Violation("grid", "lambda2 grid is not used by SGL")])
    if family is Family.SGL and cov.K != 1:
        raise ValidationError([Violation("parameter", "SGL requires K=1")])

    entries, solutions = [], []
    warm = None
    for l1, l2, mu in grid.points():
        pen = _penalty(family, l1, l2, mu, cov.K)
        sol = solve(cov, pen, cfg, warm_start=warm)
        d = sol.diagnostics
        score = np.inf
        if d.converged:
            try:
                score = ebic(cov, sol.theta, grid.gamma, sol.lowrank if pen.latent else None)
            except DomainError:
                score = np.inf
        if d.converged and np.isfinite(score):
            warm = sol
        entries.append(SelectionEntry(l1, l2, mu, score, tuple(edge_count(t) for t in sol.theta),
                                      d.converged, d.iterations))
        solutions.append(sol)
        logger.debug("grid point l1=%g l2=%g mu=%s ebic=%g", l1, l2, mu, score)

    best = None
    for i, e in enumerate(entries):
        if not (e.converged and np.isfinite(e.ebic)):
            continue
        if best is None:
            best = i
            continue
        b = entries[best]
        if e.ebic < b.ebic - TIE_TOL:
            best = i
        elif abs(e.ebic - b.ebic) <= TIE_TOL and e.lambda1 > b.lambda1:
            best = i
    report = SelectionReport(entries, best, None, grid.gamma, family)
    if best is None:
        raise SelectionError("no grid point converged", report)

    e = entries[best]
    tight = replace(cfg, eps_abs=cfg.eps_abs / 10.0)
    refined = solve(cov, _penalty(family, e.lambda1, e.lambda2, e.mu1, cov.K), tight,
                    warm_start=solutions[best])
    report.solution = refined if refined.diagnostics.converged else solutions[best]
    return report
