"""Pure-Python (batched numpy) implementation of the Monte Carlo kernel.

Simulates many independent realizations of the closed-loop polynomial task
and returns, for every run and time step, the self-normalized error norm
and the log-determinant ratio that the confidence radii consume. All runs
advance in lockstep so the per-step linear algebra is batched over the run
axis.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray


def poly_selfnorm_stats(
    noise: NDArray,
    phases: NDArray,
    theta_true: NDArray,
    pbar: NDArray,
    z: NDArray,
) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """Per-run, per-step martingale statistics of the polynomial loop.

    Parameters
    ----------
    noise : (R, T) array
        Pre-generated output noise, one row per run.
    phases : (R,) array
        Reference phase of each run.
    theta_true : (4,) array
        True polynomial coefficients.
    pbar : (4, 4) array
        Positive definite normalization matrix (prior weight or the shifted
        weight of the martingale bound).
    z : (4,) array
        Martingale offset (``P @ (mu - theta_true)`` for confidence sets).

    Returns
    -------
    snorm_sq : (R, T) array
        ``norm(z + s_t)^2`` in the inverse ``pbar + V_t`` norm, t = 1..T.
    logdet : (R, T) array
        ``log det(pbar + V_t) - log det(pbar)``, t = 1..T.
    theta_hat_T : (R, 4) array
        Final regularized estimate with prior weight ``pbar``, center 0.
    V_T : (R, 4, 4) array
        Final Gram matrix of each run.
    """
    noise = np.asarray(noise, dtype=float)
    phases = np.asarray(phases, dtype=float)
    theta_true = np.asarray(theta_true, dtype=float)
    pbar = np.asarray(pbar, dtype=float)
    z = np.asarray(z, dtype=float)
    R, T = noise.shape

    logdet_pbar = 2.0 * np.sum(np.log(np.diag(np.linalg.cholesky(pbar))))

    V = np.zeros((R, 4, 4))
    s = np.zeros((R, 4))
    b = np.zeros((R, 4))
    ysum = np.zeros(R)
    snorm_sq = np.empty((R, T))
    logdet = np.empty((R, T))
    for t in range(T):
        r_t = 2.0 * np.sin(0.1 * t + phases)
        u = np.clip(r_t - ysum, -1.0, 1.0)
        M = np.stack([np.ones(R), u, u * u, u * u * u], axis=1)
        y = M @ theta_true + noise[:, t]
        V += M[:, :, None] * M[:, None, :]
        s += M * noise[:, t, None]
        b += M * y[:, None]
        ysum += y

        H = pbar[None, :, :] + V
        L = np.linalg.cholesky(H)
        rhs = z[None, :] + s
        x = np.linalg.solve(H, rhs[:, :, None])[:, :, 0]
        snorm_sq[:, t] = np.einsum("ri,ri->r", rhs, x)
        logdet[:, t] = (
            2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
            - logdet_pbar
        )

    theta_hat = np.linalg.solve(pbar[None, :, :] + V, b[:, :, None])[:, :, 0]
    return snorm_sq, logdet, theta_hat, V
