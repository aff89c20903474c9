"""Online regularized multi-output least squares.

The estimator keeps only the sufficient statistics of the weighted normal
equations (the Gram matrix ``V`` and right-hand side ``b``), so memory is
constant per step and the closed-form estimate can be produced at any time
by one factored solve.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatchError, NotPositiveDefiniteError
from .linalg import (
    UNBOUNDED,
    ExtendedReal,
    cholesky_spd,
    check_symmetric,
    weighted_sq_norm,
)


class Singular:
    """Returned by :func:`estimate` when the normal equations have no
    unique solution yet (``P + V_t`` singular). A first-class value, not an
    exception: downstream radii are simply unbounded in that regime."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "SINGULAR"


SINGULAR = Singular()


@dataclass(frozen=True)
class Prior:
    """Regularization center ``mu``, weight ``P`` (PSD), and the known
    radius ``c_theta`` bounding ``norm(theta_star - mu)_P``."""

    mu: NDArray
    P: NDArray
    c_theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        P = check_symmetric(np.asarray(self.P, dtype=float), "P")
        object.__setattr__(self, "P", P)
        if self.mu.shape != (P.shape[0],):
            raise DimensionMismatchError("mu and P dimensions differ")
        if self.c_theta < 0:
            raise ValueError("c_theta must be nonnegative")
        # PSD check: P + eps*I must factor
        n = P.shape[0]
        eps = 1e-12 * max(np.trace(P), 1.0)
        cholesky_spd(P + eps * np.eye(n), "P + eps*I")


@dataclass(frozen=True)
class Observation:
    """One regression sample: regressor matrix ``M`` (m x n) and the output
    ``y_next`` (m,) it produced."""

    M: NDArray
    y_next: NDArray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        y = np.atleast_1d(np.asarray(self.y_next, dtype=float))
        if y.shape != (M.shape[0],):
            raise DimensionMismatchError(
                f"y_next of shape {y.shape} incompatible with M {M.shape}"
            )
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "y_next", y)


@dataclass(frozen=True)
class EstimatorState:
    """Immutable sufficient statistics after ``t`` observations.

    ``V`` accumulates ``M.T @ W @ M`` and ``b`` accumulates
    ``P @ mu + sum M.T @ W @ y``; both equal their batch counterparts at all
    times.
    """

    t: int
    W: NDArray
    prior: Prior
    V: NDArray
    b: NDArray
    logdet_P: Optional[float]


def init(prior: Prior, W: NDArray, m: int, n: int) -> EstimatorState:
    """Fresh state: ``t = 0``, ``V = 0``, ``b = P @ mu``."""
    W = check_symmetric(np.asarray(W, dtype=float), "W")
    if W.shape != (m, m):
        raise DimensionMismatchError(f"W must be {m}x{m}, got {W.shape}")
    if prior.mu.shape != (n,):
        raise DimensionMismatchError(f"prior has dim {prior.mu.shape[0]}, expected {n}")
    cholesky_spd(W, "W")
    try:
        logdet_P = cholesky_spd(prior.P, "P").log_det
    except NotPositiveDefiniteError:
        logdet_P = None
    return EstimatorState(
        t=0,
        W=W,
        prior=prior,
        V=np.zeros((n, n)),
        b=prior.P @ prior.mu,
        logdet_P=logdet_P,
    )


def update(state: EstimatorState, obs: Observation) -> EstimatorState:
    """Absorb one observation; the input state is not mutated."""
    n = state.V.shape[0]
    m = state.W.shape[0]
    if obs.M.shape != (m, n):
        raise DimensionMismatchError(
            f"observation M of shape {obs.M.shape}, expected ({m}, {n})"
        )
    MW = obs.M.T @ state.W
    V = state.V + MW @ obs.M
    b = state.b + MW @ obs.y_next
    return replace(state, t=state.t + 1, V=0.5 * (V + V.T), b=b)


def estimate(state: EstimatorState) -> NDArray | Singular:
    """Closed-form minimizer ``(P + V_t)^{-1} b``, or :data:`SINGULAR`."""
    A = state.prior.P + state.V
    try:
        F = cholesky_spd(A, "P + V")
    except NotPositiveDefiniteError:
        return SINGULAR
    y = np.linalg.solve(F.lower, state.b)
    return np.linalg.solve(F.lower.T, y)


def self_normalized_error(state: EstimatorState, theta_true: NDArray) -> ExtendedReal:
    """Test-harness oracle: ``norm(theta_true - theta_hat)_{P + V_t}``.

    Unbounded while the estimate is singular. Requires knowledge of the
    true parameter, so it never appears in deployment paths.
    """
    theta_true = np.asarray(theta_true, dtype=float)
    if theta_true.shape != state.b.shape:
        raise DimensionMismatchError("theta_true has the wrong dimension")
    theta_hat = estimate(state)
    if theta_hat is SINGULAR:
        return UNBOUNDED
    A = state.prior.P + state.V
    return float(np.sqrt(max(0.0, weighted_sq_norm(theta_true - theta_hat, A))))
