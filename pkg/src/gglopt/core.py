"""Problem data, parameter containers and the exact objective.

The objective is

    sum_k  -logdet(Theta_k - L_k) + <S_k, Theta_k - L_k>  +  P(Theta)  +  sum_k mu1_k * ||L_k||_*

with P one of the single, group or fused off-diagonal penalties.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SYMMETRY_TOL_INPUT = 1e-10
SYMMETRY_TOL_OUTPUT = 1e-9
PSD_TOL = -1e-8


class ValidationError(ValueError):
    """Raised when problem data or parameters are inconsistent."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class DomainError(ValueError):
    """Raised when a log-determinant is requested of a non-PD matrix."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class Family(str, enum.Enum):
    SGL = "sgl"
    GGL = "ggl"
    FGL = "fgl"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _as_matrix_tuple(matrices):
    if isinstance(matrices, np.ndarray) and matrices.ndim == 2:
        matrices = [matrices]
    return tuple(np.array(m, dtype=float) for m in matrices)


@dataclass(frozen=True)
class CovInput:
    """K empirical covariance matrices together with their sample counts."""

    matrices: tuple
    sample_counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrices", _as_matrix_tuple(self.matrices))
        counts = self.sample_counts
        if np.isscalar(counts):
            counts = [counts]
        object.__setattr__(self, "sample_counts", tuple(int(n) for n in counts))
        for m in self.matrices:
            m.setflags(write=False)

    @property
    def K(self):
        return len(self.matrices)

    @property
    def p(self):
        return self.matrices[0].shape[0]

    def check(self):
        """Raise :class:`ValidationError` unless :func:`validate_input` is clean."""
        violations = validate_input(self)
        if violations:
            raise ValidationError(violations)
        return self


@dataclass(frozen=True)
class PenaltySpec:
    family: Family
    lambda1: float
    lambda2: float = 0.0
    latent: bool = False
    mu1: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        mu1 = self.mu1
        if np.isscalar(mu1):
            mu1 = (mu1,)
        object.__setattr__(self, "mu1", tuple(float(m) for m in mu1))
        problems = []
        if not self.lambda1 >= 0:
            problems.append(Violation("parameter", f"lambda1 must be >= 0, got {self.lambda1}"))
        if not self.lambda2 >= 0:
            problems.append(Violation("parameter", f"lambda2 must be >= 0, got {self.lambda2}"))
        if any(not m >= 0 for m in self.mu1):
            problems.append(Violation("parameter", f"mu1 entries must be >= 0, got {self.mu1}"))
        if self.latent and not self.mu1:
            problems.append(Violation("parameter", "latent=True requires mu1"))
        if problems:
            raise ValidationError(problems)

    def mu_for(self, K):
        """Per-instance latent weights broadcast to length K."""
        if not self.latent:
            return (0.0,) * K
        if len(self.mu1) == 1:
            return self.mu1 * K
        if len(self.mu1) != K:
            raise ValidationError([Violation("parameter", f"mu1 has {len(self.mu1)} entries, expected {K}")])
        return self.mu1

    def check_against(self, cov):
        if self.family is Family.SGL and cov.K != 1:
            raise ValidationError([Violation("parameter", f"SGL requires K=1, got K={cov.K}")])
        self.mu_for(cov.K)
        return self


@dataclass(frozen=True)
class SolverConfig:
    rho_init: float = 1.0
    max_iter: int = 1000
    eps_abs: float = 1e-7
    eps_rel: float = 1e-5
    adaptive_rho: bool = True
    scale_to_correlation: bool = False

    def __post_init__(self):
        problems = []
        if not self.rho_init > 0:
            problems.append(Violation("config", "rho_init must be > 0"))
        if not self.eps_abs > 0 or not self.eps_rel > 0:
            problems.append(Violation("config", "eps_abs and eps_rel must be > 0"))
        if int(self.max_iter) < 1:
            problems.append(Violation("config", "max_iter must be >= 1"))
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    primal_residual: float
    dual_residual: float
    objective_value: float
    converged: bool
    wall_time_seconds: float
    eps_primal: float = 0.0
    eps_dual: float = 0.0


@dataclass(frozen=True)
class Solution:
    theta: tuple
    lowrank: tuple
    diagnostics: SolveDiagnostics
    rho: float = field(default=1.0, compare=False)

    @property
    def K(self):
        return len(self.theta)

    @property
    def precision(self):
        """Observed-variable precision estimates Theta_k - L_k."""
        return tuple(t - l for t, l in zip(self.theta, self.lowrank))


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self):
        return f"{self.kind}: {self.message}"


def validate_input(cov: CovInput) -> list:
    """Return every problem found in ``cov``; an empty list means valid."""
    out = []
    mats = cov.matrices
    if len(mats) == 0:
        return [Violation("dimension", "no covariance matrices given")]
    shapes = {m.shape for m in mats}
    for k, m in enumerate(mats):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            out.append(Violation("dimension", f"matrix {k} is not square: shape {m.shape}"))
        elif m.shape[0] < 2:
            out.append(Violation("dimension", f"matrix {k} has p={m.shape[0]} < 2"))
    if len(shapes) > 1:
        out.append(Violation("dimension", f"matrices have differing shapes {sorted(shapes)}"))
    if len(cov.sample_counts) != len(mats):
        out.append(Violation("samples", f"{len(cov.sample_counts)} sample counts for {len(mats)} matrices"))
    for k, n in enumerate(cov.sample_counts):
        if n < 2:
            out.append(Violation("samples", f"sample count {k} is {n} < 2"))
    for k, m in enumerate(mats):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            continue
        if not np.all(np.isfinite(m)):
            out.append(Violation("finite", f"matrix {k} has non-finite entries"))
            continue
        asym = np.max(np.abs(m - m.T)) if m.size else 0.0
        if asym > SYMMETRY_TOL_INPUT:
            out.append(Violation("asymmetry", f"matrix {k} asymmetric by {asym:.3g}"))
            continue
        lo = np.linalg.eigvalsh(m)[0]
        if lo < PSD_TOL:
            out.append(Violation("psd", f"matrix {k} has eigenvalue {lo:.3g}"))
        if np.any(np.diag(m) <= 0):
            out.append(Violation("diagonal", f"matrix {k} has a nonpositive diagonal entry"))
    return out


def offdiag_abs_sum(A):
    return np.abs(A).sum() - np.abs(np.diag(A)).sum()


def penalty_value(pen: PenaltySpec, theta: Sequence[np.ndarray]) -> float:
    """Value of the sparsity penalty (off-diagonal entries only)."""
    T = np.stack(theta)
    p = T.shape[1]
    off = ~np.eye(p, dtype=bool)
    val = pen.lambda1 * np.abs(T[:, off]).sum()
    if pen.family is Family.GGL:
        val += pen.lambda2 * np.sqrt((T[:, off] ** 2).sum(axis=0)).sum()
    elif pen.family is Family.FGL and len(theta) > 1:
        val += pen.lambda2 * np.abs(np.diff(T[:, off], axis=0)).sum()
    return float(val)


def logdet_pd(A, index=None):
    """``log det A`` for symmetric PD ``A``; raises :class:`DomainError` otherwise."""
    try:
        c = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        where = "" if index is None else f" (instance k={index})"
        raise DomainError(f"matrix is not positive definite{where}", index=index) from None
    return 2.0 * np.log(np.diag(c)).sum()


def objective(cov: CovInput, pen: PenaltySpec, theta, lowrank=None) -> float:
    theta = _as_matrix_tuple(theta)
    if lowrank is None:
        lowrank = tuple(np.zeros_like(t) for t in theta)
    lowrank = _as_matrix_tuple(lowrank)
    if len(theta) != cov.K or len(lowrank) != cov.K:
        raise ValueError("theta/lowrank count does not match the number of instances")
    mu = pen.mu_for(cov.K)
    val = 0.0
    for k, (S, T, L) in enumerate(zip(cov.matrices, theta, lowrank)):
        if T.shape != S.shape or L.shape != S.shape:
            raise ValueError(f"shape mismatch at instance {k}")
        R = T - L
        val += -logdet_pd(R, index=k) + np.sum(S * R)
        # nuclear norm of a PSD matrix is its trace
        val += mu[k] * np.trace(L)
    return float(val + penalty_value(pen, theta))


def scale_to_correlation(S):
    """Return ``(R, d)`` with ``R = D^-1 S D^-1`` and ``d = sqrt(diag(S))``.

    A precision estimated on ``R`` maps back as ``D^-1 Theta D^-1``.
    """
    S = np.asarray(S, dtype=float)
    diag = np.diag(S)
    if np.any(diag <= 0):
        raise ValidationError([Violation("diagonal", "scaling needs a strictly positive diagonal")])
    d = np.sqrt(diag)
    R = S / np.outer(d, d)
    np.fill_diagonal(R, 1.0)
    return R, d
