"""Uniform-in-time finite-sample confidence sets for regularized
multi-output linear regression, with Monte Carlo verification oracles and
reproducible benchmark experiments."""

from ._accel import BACKEND as KERNEL_BACKEND
from .linalg import UNBOUNDED, ExtendedReal, SpdFactor, cholesky_spd
from .bounds import (
    BoundParams,
    Method,
    PointwiseParams,
    Radius,
    beta_existing_eq25,
    beta_lti_frobenius,
    beta_lti_operator,
    beta_pointwise,
    beta_thm2,
    beta_thm3,
    output_radius,
    subgaussian_bound,
)
from .estimator import (
    SINGULAR,
    EstimatorState,
    Observation,
    Prior,
    estimate,
    init,
    self_normalized_error,
    update,
)
from .rng import RngStream

__version__ = "0.1.0"
