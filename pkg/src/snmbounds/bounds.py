"""Confidence radii for the self-normalized estimation error.

Each function maps bound parameters and Gram-type matrices to a
:class:`Radius`. They are pure functions of their arguments and never read
the estimator's data stream, so coverage tests compose them freely with
independently generated statistics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatchError, ParamOutOfRangeError
from .linalg import (
    UNBOUNDED,
    ExtendedReal,
    SpdFactor,
    check_symmetric,
    gen_spectral_radius,
    is_unbounded,
    logdet_ratio,
    whitened_op_norm,
)


class Method(enum.Enum):
    THM2 = "THM2"
    THM3 = "THM3"
    EXISTING_EQ25 = "EXISTING_EQ25"
    POINTWISE = "POINTWISE"
    SUBGAUSSIAN = "SUBGAUSSIAN"
    LTI_FR = "LTI_FR"
    LTI_OP = "LTI_OP"


@dataclass(frozen=True)
class BoundParams:
    """Noise proxy scale ``c_w``, prior radius ``c_theta``, confidence
    level ``delta``."""

    c_w: float
    c_theta: float
    delta: float

    def __post_init__(self):
        if not self.c_w > 0:
            raise ParamOutOfRangeError("c_w must be positive")
        if self.c_theta < 0:
            raise ParamOutOfRangeError("c_theta must be nonnegative")
        if not 0 < self.delta < 1:
            raise ParamOutOfRangeError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class PointwiseParams:
    """Concentration margin ``epsilon`` and its failure probability
    ``delta_prime`` for the expected Gram matrix ``EV_T``.

    ``epsilon = 0`` (with ``delta_prime = 0``) is admissible for
    deterministic regressors. ``delta_prime`` is metadata for the caller's
    union bound; the radius formula does not consume it.
    """

    epsilon: float
    delta_prime: float
    EV_T: NDArray

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ParamOutOfRangeError("epsilon must lie in [0, 1)")
        if not 0 <= self.delta_prime < 1:
            raise ParamOutOfRangeError("delta_prime must lie in [0, 1)")
        object.__setattr__(
            self, "EV_T", check_symmetric(np.asarray(self.EV_T, dtype=float), "EV_T")
        )


@dataclass(frozen=True)
class Radius:
    """A confidence radius tagged with the formula that produced it."""

    value: ExtendedReal
    method: Method

    def __post_init__(self):
        if not is_unbounded(self.value) and self.value < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def finite(self) -> bool:
        return not is_unbounded(self.value)


def beta_thm2(params: BoundParams, P: NDArray, V: NDArray) -> Radius:
    """Radius for a strictly positive definite regularization weight:
    ``sqrt(c_theta^2 + c_w^2 logdet(I + inv(P) V) + 2 c_w^2 log(1/delta))``.
    """
    ld = logdet_ratio(P, V)
    val = math.sqrt(
        params.c_theta**2
        + params.c_w**2 * ld
        + 2.0 * params.c_w**2 * math.log(1.0 / params.delta)
    )
    return Radius(val, Method.THM2)


def beta_thm3(
    params: BoundParams, P: NDArray, V: NDArray, Vbar: NDArray
) -> Radius:
    """Radius valid for any PSD regularization weight (including OLS):
    ``sqrt(1 + rho(inv(V) Vbar)) * sqrt(c_theta^2 + c_w^2 logdet(I + inv(Vbar) V)
    + 2 c_w^2 log(1/delta))``; unbounded while ``V`` is singular.

    ``P`` does not enter the formula (the prior bias is absorbed into
    ``c_theta``); it is accepted for interface symmetry with
    :func:`beta_thm2` and only shape-checked.
    """
    P = check_symmetric(np.asarray(P, dtype=float), "P")
    if P.shape != np.asarray(V).shape:
        raise DimensionMismatchError("P and V dimensions differ")
    rho = gen_spectral_radius(V, Vbar)
    if is_unbounded(rho):
        return Radius(UNBOUNDED, Method.THM3)
    ld = logdet_ratio(Vbar, V)
    val = math.sqrt(1.0 + rho) * math.sqrt(
        params.c_theta**2
        + params.c_w**2 * ld
        + 2.0 * params.c_w**2 * math.log(1.0 / params.delta)
    )
    return Radius(val, Method.THM3)


def beta_existing_eq25(params: BoundParams, P: NDArray, V: NDArray) -> Radius:
    """State-of-the-art comparison radius treating the regularization bias
    with a triangle inequality:
    ``c_theta + c_w sqrt(logdet(I + inv(P) V) + 2 log(1/delta))``.
    """
    ld = logdet_ratio(P, V)
    val = params.c_theta + params.c_w * math.sqrt(
        ld + 2.0 * math.log(1.0 / params.delta)
    )
    return Radius(val, Method.EXISTING_EQ25)


def beta_pointwise(
    params: BoundParams, pw: PointwiseParams, n_theta: int
) -> Radius:
    """Pointwise (final-time) OLS radius under persistent excitation:
    ``c_w sqrt(2 n log(2/(1-eps)) + 4 log(1/delta))``.

    The caller owns the union bound: total confidence is
    ``delta + delta_prime``.
    """
    if n_theta < 1:
        raise ParamOutOfRangeError("n_theta must be >= 1")
    val = params.c_w * math.sqrt(
        2.0 * n_theta * math.log(2.0 / (1.0 - pw.epsilon))
        + 4.0 * math.log(1.0 / params.delta)
    )
    return Radius(val, Method.POINTWISE)


def subgaussian_bound(n_theta: int, delta: float) -> float:
    """Squared-norm threshold ``2 n log 2 + 4 log(1/delta)`` such that a
    zero-mean subgaussian vector with proxy ``R`` satisfies
    ``norm(v)^2_{inv(R)} <= threshold`` with probability ``1 - delta``.

    Note this is a squared threshold, unlike the (unsquared) radii.
    """
    if n_theta < 1:
        raise ParamOutOfRangeError("n_theta must be >= 1")
    if not 0 < delta < 1:
        raise ParamOutOfRangeError("delta must lie in (0, 1)")
    return 2.0 * n_theta * math.log(2.0) + 4.0 * math.log(1.0 / delta)


def _lti_common(
    params: BoundParams, n_x: int, Phi: NDArray, Phibar: NDArray
) -> tuple[ExtendedReal, float]:
    if n_x < 1:
        raise ParamOutOfRangeError("n_x must be >= 1")
    rho = gen_spectral_radius(Phi, Phibar)
    if is_unbounded(rho):
        return UNBOUNDED, 0.0
    return rho, logdet_ratio(Phibar, Phi)


def beta_lti_frobenius(
    params: BoundParams, n_x: int, Phi: NDArray, Phibar: NDArray
) -> Radius:
    """Frobenius-norm radius for structure-agnostic LTI identification:
    ``c_w sqrt(1 + rho(inv(Phi) Phibar)) * sqrt(n_x logdet(I + inv(Phibar) Phi)
    + 2 log(1/delta))``; unbounded while ``Phi`` is singular.
    """
    rho, ld = _lti_common(params, n_x, Phi, Phibar)
    if is_unbounded(rho):
        return Radius(UNBOUNDED, Method.LTI_FR)
    val = (
        params.c_w
        * math.sqrt(1.0 + rho)
        * math.sqrt(n_x * ld + 2.0 * math.log(1.0 / params.delta))
    )
    return Radius(val, Method.LTI_FR)


def beta_lti_operator(
    params: BoundParams, n_x: int, Phi: NDArray, Phibar: NDArray
) -> Radius:
    """Operator-norm variant of the LTI radius (covering-argument bound):
    ``2 c_w sqrt(1 + rho(inv(Phi) Phibar)) * sqrt(logdet(I + inv(Phibar) Phi)
    + 2 n_x log 5 + 2 log(1/delta))``.

    Bounds the operator norm of the whitened error, which never exceeds the
    Frobenius norm, so it is also a valid substitute in output bounds.
    """
    rho, ld = _lti_common(params, n_x, Phi, Phibar)
    if is_unbounded(rho):
        return Radius(UNBOUNDED, Method.LTI_OP)
    val = (
        2.0
        * params.c_w
        * math.sqrt(1.0 + rho)
        * math.sqrt(
            ld + 2.0 * n_x * math.log(5.0) + 2.0 * math.log(1.0 / params.delta)
        )
    )
    return Radius(val, Method.LTI_OP)


def output_radius(M: NDArray, F: SpdFactor, beta: Radius) -> ExtendedReal:
    """Output-space radius ``beta * opnorm(M @ inv(sqrt(P + V_t)))``.

    Saturates to :data:`UNBOUNDED` for unbounded ``beta`` unless ``M`` is
    exactly zero.
    """
    sigma = whitened_op_norm(M, F)
    if is_unbounded(beta.value):
        return 0.0 if sigma == 0.0 else UNBOUNDED
    return beta.value * sigma
