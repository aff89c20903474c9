"""Dense symmetric-positive-definite linear algebra used throughout the package.

Everything here operates on small matrices (dimension at most a few dozen):
Cholesky factors with their log-determinants, weighted and inverse-weighted
norms, log-determinant ratios, generalized spectral radii, whitened operator
norms, and the Kronecker regressor used to vectorize matrix-valued
least-squares problems.

Inverse-weighted quantities are always computed through triangular solves on
a Cholesky factor, never through explicit matrix inverses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .errors import DimensionMismatchError, NotPositiveDefiniteError

#: Relative pivot threshold for the positive-definiteness test: a Cholesky
#: pivot at or below ``CHOL_REL_TOL * trace(A) / dim`` flags the matrix as
#: singular or indefinite.
CHOL_REL_TOL = 1e-12


class Unbounded:
    """Distinguished value for infinite radii and spectral factors.

    Arithmetic with it saturates; it serializes as the string ``"inf"``.
    A single module-level instance :data:`UNBOUNDED` is used everywhere.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNBOUNDED"


UNBOUNDED = Unbounded()

#: A nonnegative real number or :data:`UNBOUNDED`.
ExtendedReal = float | Unbounded


def is_unbounded(x: ExtendedReal) -> bool:
    return isinstance(x, Unbounded)


def format_extended(x: ExtendedReal) -> str:
    """Serialize an extended real: ``"inf"`` for :data:`UNBOUNDED`."""
    return "inf" if is_unbounded(x) else repr(float(x))


def check_symmetric(A: NDArray, name: str = "matrix") -> NDArray:
    """Validate (elementwise, relative 1e-12) symmetry of a square matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {A.shape}")
    scale = np.maximum(1.0, np.abs(A))
    if not np.all(np.abs(A - A.T) <= 1e-12 * scale):
        raise DimensionMismatchError(f"{name} is not symmetric")
    return A


@dataclass(frozen=True)
class SpdFactor:
    """Lower Cholesky factor of a positive definite matrix with its log-det.

    ``lower @ lower.T`` reconstructs the source matrix and
    ``log_det == 2 * sum(log(diag(lower)))`` by construction.
    """

    dim: int
    lower: NDArray
    log_det: float


def cholesky_spd(A: NDArray, name: str = "matrix") -> SpdFactor:
    """Factor a symmetric matrix, rejecting singular/indefinite inputs.

    Raises
    ------
    NotPositiveDefiniteError
        If the factorization fails or any pivot falls at or below the
        scale-invariant threshold ``CHOL_REL_TOL * trace(A) / dim``.
    """
    A = check_symmetric(A, name)
    dim = A.shape[0]
    pivot_tol = CHOL_REL_TOL * max(np.trace(A), 0.0) / dim if dim else 0.0
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{name} is not positive definite") from exc
    diag = np.diag(L)
    if np.any(diag * diag <= pivot_tol):
        raise NotPositiveDefiniteError(
            f"{name} has a Cholesky pivot below the singularity threshold"
        )
    log_det = 2.0 * float(np.sum(np.log(diag)))
    return SpdFactor(dim=dim, lower=L, log_det=log_det)


def is_positive_definite(A: NDArray) -> bool:
    """Positive definiteness per the package-wide Cholesky pivot test."""
    try:
        cholesky_spd(A)
    except NotPositiveDefiniteError:
        return False
    return True


def weighted_sq_norm(x: NDArray, A: NDArray) -> float:
    """Quadratic form ``x.T @ A @ x``."""
    x = np.asarray(x, dtype=float)
    A = np.asarray(A, dtype=float)
    if x.shape != (A.shape[0],):
        raise DimensionMismatchError(
            f"vector of dim {x.shape} incompatible with matrix {A.shape}"
        )
    return float(x @ A @ x)


def inv_weighted_sq_norm(x: NDArray, F: SpdFactor) -> float:
    """Quadratic form ``x.T @ inv(A) @ x`` where ``F`` factors ``A``.

    Computed as the squared norm of one triangular solve ``L \\ x``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (F.dim,):
        raise DimensionMismatchError(
            f"vector of dim {x.shape} incompatible with factor of dim {F.dim}"
        )
    y = scipy.linalg.solve_triangular(F.lower, x, lower=True)
    return float(y @ y)


def logdet_ratio(P: NDArray, V: NDArray) -> float:
    """``log det(I + inv(P) @ V)`` for ``P`` PD and ``V`` PSD.

    Evaluated stably as ``log_det(P + V) - log_det(P)``; the result is
    clamped at zero against rounding on tiny ``V``.
    """
    P = np.asarray(P, dtype=float)
    V = np.asarray(V, dtype=float)
    if P.shape != V.shape:
        raise DimensionMismatchError(f"shape mismatch {P.shape} vs {V.shape}")
    fP = cholesky_spd(P, "P")
    fPV = cholesky_spd(P + V, "P + V")
    return max(0.0, fPV.log_det - fP.log_det)


def gen_spectral_radius(V: NDArray, Vbar: NDArray) -> ExtendedReal:
    """Largest generalized eigenvalue of the pencil ``(Vbar, V)``.

    Equals the spectral radius of ``inv(V) @ Vbar`` when ``V`` is positive
    definite (computed as a symmetric whitened eigenproblem); returns
    :data:`UNBOUNDED` when ``V`` is singular per the pivot test.
    """
    Vbar = check_symmetric(Vbar, "Vbar")
    cholesky_spd(Vbar, "Vbar")
    V = check_symmetric(V, "V")
    if V.shape != Vbar.shape:
        raise DimensionMismatchError(f"shape mismatch {V.shape} vs {Vbar.shape}")
    try:
        fV = cholesky_spd(V, "V")
    except NotPositiveDefiniteError:
        return UNBOUNDED
    W = scipy.linalg.solve_triangular(fV.lower, Vbar, lower=True)
    W = scipy.linalg.solve_triangular(fV.lower, W.T, lower=True)
    return float(np.linalg.eigvalsh(0.5 * (W + W.T))[-1])


def whitened_op_norm(M: NDArray, F: SpdFactor) -> float:
    """Largest singular value of ``M @ inv(sqrt(A))`` where ``F`` factors ``A``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != F.dim:
        raise DimensionMismatchError(
            f"matrix with {M.shape[1]} columns incompatible with factor of dim {F.dim}"
        )
    # M @ L^{-T} has the same singular values as (L^{-1} @ M.T).T
    Y = scipy.linalg.solve_triangular(F.lower, M.T, lower=True)
    return float(np.linalg.norm(Y, ord=2))


def kron_regressor(phi: NDArray, n_x: int) -> NDArray:
    """Block-diagonal regressor ``I_{n_x} (x) phi.T``.

    Satisfies ``kron_regressor(phi, n_x) @ Theta.ravel() == Theta @ phi``
    for any ``(n_x, len(phi))`` matrix ``Theta`` (row-major vectorization).
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 1:
        raise DimensionMismatchError("phi must be a vector")
    if n_x < 1:
        raise DimensionMismatchError("n_x must be >= 1")
    return np.kron(np.eye(n_x), phi)
