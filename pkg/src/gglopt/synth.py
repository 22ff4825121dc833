"""Seeded synthetic ground truth for sparse (and sparse-minus-low-rank) precision matrices.

All randomness comes from ``numpy.random.Generator`` seeded with PCG64, so a
(parameters, seed) pair always reproduces the same arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RNG_NAME = "numpy.random.PCG64"


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _edge_set(P, tol=1e-10):
    iu = np.triu_indices(P.shape[0], 1)
    mask = np.abs(P[iu]) > tol
    return frozenset(zip(iu[0][mask].tolist(), iu[1][mask].tolist()))


@dataclass(frozen=True)
class GroundTruth:
    precision: np.ndarray
    covariance: np.ndarray
    edges: frozenset
    seed: int


@dataclass(frozen=True)
class LatentGroundTruth:
    """Observed marginal of a larger sparse model.

    ``precision = sparse - lowrank`` is the observed precision, ``edges`` the
    support of ``sparse`` (the conditional graph given the hidden variables).
    """

    sparse: np.ndarray
    lowrank: np.ndarray
    precision: np.ndarray
    covariance: np.ndarray
    edges: frozenset
    seed: int
    hidden: int


def _weighted_graph(rng, p, edge_probability, weight_range):
    lo, hi = weight_range
    iu = np.triu_indices(p, 1)
    m = iu[0].size
    present = rng.random(m) < edge_probability
    mags = rng.uniform(lo, hi, m)
    signs = rng.choice([-1.0, 1.0], m)
    W = np.zeros((p, p))
    W[iu] = np.where(present, mags * signs, 0.0)
    return W + W.T


def _dominant(W):
    P = W.copy()
    np.fill_diagonal(P, np.abs(W).sum(axis=1) + 0.1)
    return P


def generate_precision(p, edge_probability=0.1, weight_range=(0.2, 0.5), seed=0) -> GroundTruth:
    """Erdos-Renyi support, random-sign weights, diagonal = row |sum| + 0.1."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if not 0.0 <= edge_probability <= 1.0:
        raise ValueError("edge_probability must lie in [0, 1]")
    lo, hi = weight_range
    if not 0 < lo <= hi:
        raise ValueError("weight_range must satisfy 0 < lo <= hi")
    rng = _rng(seed)
    P = _dominant(_weighted_graph(rng, p, edge_probability, weight_range))
    C = np.linalg.inv(P)
    C = (C + C.T) / 2.0
    return GroundTruth(P, C, _edge_set(P), seed)


def generate_block_precision(p, block_size, edge_probability=0.3, weight_range=(0.2, 0.5), seed=0) -> GroundTruth:
    """Block-diagonal variant: independent Erdos-Renyi graphs on consecutive blocks."""
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    rng = _rng(seed)
    W = np.zeros((p, p))
    for start in range(0, p, block_size):
        stop = min(start + block_size, p)
        if stop - start > 1:
            W[start:stop, start:stop] = _weighted_graph(rng, stop - start, edge_probability, weight_range)
    P = _dominant(W)
    C = np.linalg.inv(P)
    return GroundTruth(P, (C + C.T) / 2.0, _edge_set(P), seed)


def generate_latent_precision(p, hidden, edge_probability=0.1, weight_range=(0.2, 0.5),
                              hidden_edge_probability=1.0, hidden_weight_range=(0.2, 0.4),
                              seed=0) -> LatentGroundTruth:
    """Sparse model on p+hidden variables, hidden block marginalized by Schur complement.

    Hidden variables have unit precision and couple to observed ones through B, so
    the marginal low-rank part is ``L = B B^T``.  The observed diagonal is
    raised until ``lambda_min(sparse) - lambda_max(L) >= 0.1``, which keeps
    ``sparse - L`` positive definite with the same margin.
    """
    if hidden < 0:
        raise ValueError("hidden must be >= 0")
    rng = _rng(seed)
    sparse = _dominant(_weighted_graph(rng, p, edge_probability, weight_range))
    if hidden:
        lo, hi = hidden_weight_range
        B = np.where(rng.random((p, hidden)) < hidden_edge_probability,
                     rng.uniform(lo, hi, (p, hidden)) * rng.choice([-1.0, 1.0], (p, hidden)), 0.0)
        L = B @ B.T
        shift = np.linalg.eigvalsh(L)[-1] - np.linalg.eigvalsh(sparse)[0] + 0.1
        sparse[np.diag_indices(p)] += max(shift, 0.0)
    else:
        L = np.zeros((p, p))
    P = sparse - L
    C = np.linalg.inv(P)
    return LatentGroundTruth(sparse, L, P, (C + C.T) / 2.0, _edge_set(sparse), seed, hidden)


def sample_covariance(truth, N, seed=0):
    """Empirical covariance (1/N, known zero mean) of N Gaussian draws from ``truth.covariance``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    rng = _rng(seed)
    C = truth.covariance
    F = np.linalg.cholesky(C)
    Z = rng.standard_normal((N, C.shape[0]))
    X = Z @ F.T
    S = X.T @ X / N
    return (S + S.T) / 2.0


def recovery_metrics(truth, theta, tol=1e-8):
    """(precision, recall, F1) of the strictly-upper support of ``theta`` against ``truth.edges``."""
    pred = _edge_set(np.asarray(theta), tol)
    true = set(truth.edges)
    tp = len(pred & true)
    precision = tp / len(pred) if pred else 1.0
    recall = tp / len(true) if true else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1
