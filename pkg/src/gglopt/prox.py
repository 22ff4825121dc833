"""Proximal operators used by the ADMM solvers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_EIG = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None):
        d = self.eigenvalues if values is None else values
        Q = self.eigenvectors
        return symmetrize((Q * d) @ Q.T)

    def rank(self):
        return int(np.sum(np.abs(self.eigenvalues) > ZERO_EIG))


def symmetrize(A):
    return (A + A.T) / 2.0


def eigh(A) -> EigenDecomposition:
    """Symmetric eigendecomposition, eigenvalues ascending."""
    A = np.asarray(A, dtype=float)
    try:
        d, Q = np.linalg.eigh(symmetrize(A))
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError(f"eigendecomposition failed: {exc}") from exc
    return EigenDecomposition(d, Q)


def soft_threshold(x, tau):
    """``sign(x) * max(|x| - tau, 0)``, elementwise."""
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def soft_threshold_offdiag(A, tau):
    out = soft_threshold(A, tau)
    np.fill_diagonal(out, np.diag(A))
    return out


def group_soft_threshold(v, tau, axis=0):
    """Block shrinkage ``v * max(1 - tau/||v||, 0)`` along ``axis``."""
    v = np.asarray(v, dtype=float)
    norm = np.sqrt(np.sum(v * v, axis=axis, keepdims=True))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norm > tau, 1.0 - tau / norm, 0.0)
    return v * scale


def prox_log_det(A, beta):
    """argmin_X  -beta*logdet(X) + 1/2 ||X - A||_F^2.

    In the ADMM Omega-step the quadratic carries weight rho, so callers pass
    ``beta = 1/rho`` and ``A = Theta - U - S/rho``; passing rho here instead is wrong.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    ed = eigh(A)
    d = ed.eigenvalues
    return ed.reconstruct((d + np.sqrt(d * d + 4.0 * beta)) / 2.0)


def prox_nuclear_psd(A, tau):
    """Eigenvalue shrinkage clipped at zero: prox of tau*trace over the PSD cone."""
    ed = eigh(A)
    return ed.reconstruct(np.maximum(ed.eigenvalues - tau, 0.0))


def prox_tv_1d(v, tau):
    """Exact prox of ``tau * sum |x_k - x_{k-1}|`` (1-D fused lasso / TV denoising).

    Direct taut-string scan (Condat's algorithm), linear time in the length of ``v``.
    """
    y = np.asarray(v, dtype=float).ravel()
    n = y.size
    x = np.empty(n)
    if n == 0:
        return x
    if n == 1 or tau <= 0:
        x[:] = y
        return x
    lam = float(tau)
    k = k0 = kplus = kminus = 0
    umin, umax = lam, -lam
    vmin, vmax = y[0] - lam, y[0] + lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                x[k0:kminus + 1] = vmin
                k0 = kminus + 1
                k = kminus = k0
                vmin = y[k]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                x[k0:kplus + 1] = vmax
                k0 = kplus + 1
                k = kplus = k0
                vmax = y[k]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                x[k0:k + 1] = vmin
                return x
        umin += y[k + 1] - vmin
        if umin < -lam:
            x[k0:kminus + 1] = vmin
            k0 = kminus + 1
            k = kplus = kminus = k0
            vmin = y[k]
            vmax = vmin + 2.0 * lam
            umin, umax = lam, -lam
            continue
        umax += y[k + 1] - vmax
        if umax > lam:
            x[k0:kplus + 1] = vmax
            k0 = kplus + 1
            k = kplus = kminus = k0
            vmax = y[k]
            vmin = vmax - 2.0 * lam
            umin, umax = lam, -lam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= -lam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = -lam


def prox_sparse_group(v, l1, l2, axis=0):
    """Prox of ``l1*||v||_1 + l2*||v||_2``: soft-threshold, then group-shrink."""
    return group_soft_threshold(soft_threshold(np.asarray(v, dtype=float), l1), l2, axis=axis)


def prox_fused_l1(v, l1, l2):
    """Prox of ``l1*||v||_1 + l2*TV(v)``: TV prox, then soft-threshold.

    ``v`` may be 2-D of shape (K, m); each column is treated independently.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return soft_threshold(prox_tv_1d(v, l2), l1)
    out = np.empty_like(v)
    for j in range(v.shape[1]):
        out[:, j] = prox_tv_1d(v[:, j], l2)
    return soft_threshold(out, l1)
