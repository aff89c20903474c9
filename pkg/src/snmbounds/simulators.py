"""Data generation for the two benchmark problems.

Both simulators expose the full noise sequence alongside the observations,
so verification oracles can reconstruct the martingale terms and true
errors exactly.

The polynomial task is a scalar closed loop: the input at time ``t`` is a
clipped tracking error that feeds back all past outputs, which makes the
regressors correlated with past noise. The heat chain is a linear chain of
temperature nodes driven by a sinusoidal boundary temperature; it carries
both a structured (two-parameter) regressor view and a structure-agnostic
LTI view of the same data.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatchError
from .estimator import Observation
from .rng import RngStream


@dataclass(frozen=True)
class PolyClosedLoop:
    """Cubic-polynomial regression with clipped feedback input.

    ``theta_true`` holds the four monomial coefficients; the regressor at
    time ``t`` is the row ``(1, u_t, u_t^2, u_t^3)``. Noise is Gaussian
    with standard deviation ``c_w``.
    """

    theta_true: NDArray
    c_w: float = 0.2
    phase: float = 0.0
    horizon: int = 20

    def __post_init__(self):
        theta = np.asarray(self.theta_true, dtype=float)
        if theta.shape != (4,):
            raise DimensionMismatchError("theta_true must have 4 coefficients")
        object.__setattr__(self, "theta_true", theta)
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True)
class HeatChain:
    """Chain of ``n_x`` temperature nodes with convective coupling.

    Node ``i`` relaxes toward its predecessor at rate ``alpha_true`` and
    toward the ambient temperature at rate ``beta_true``. Node 0 is the
    exogenous driving temperature ``theta_max * (1 + sin(0.1 t))``. The
    per-component noise is uniform on [-1, 1], which is subgaussian with
    proxy scale ``1/sqrt(3)`` for identity output weighting.
    """

    alpha_true: float = 0.5
    beta_true: float = 0.1
    n_x: int = 5
    theta_ext: float = 25.0
    theta_max: float = 100.0
    theta_init: float = 20.0
    horizon: int = 1000

    def __post_init__(self):
        if not (0 < self.alpha_true < 1 and 0 < self.beta_true < 1):
            raise ValueError("alpha_true and beta_true must lie in (0, 1)")
        if self.n_x < 1 or self.horizon < 1:
            raise ValueError("n_x and horizon must be >= 1")


#: Subgaussian proxy scale of uniform [-1, 1] noise (exact standard
#: deviation; sharper than the Hoeffding constant 1).
UNIFORM_NOISE_PROXY = 1.0 / np.sqrt(3.0)


@dataclass(frozen=True)
class SimulatedTrajectory:
    """A generated run with everything the oracles need.

    ``observations[t]`` pairs the regressor ``M_t`` with the output
    ``y_{t+1}``; ``noises[t]`` is the realized ``w_t``, so
    ``y_{t+1} - M_t @ theta_true == w_t`` exactly. ``lti_phis`` holds the
    stacked ``(x_t, u_t)`` vectors for the heat chain (``None`` for the
    polynomial task).
    """

    observations: Sequence[Observation]
    noises: NDArray
    states: NDArray
    inputs: NDArray
    lti_phis: Optional[NDArray] = None
    meta: dict = field(default_factory=dict)


def reference_signal(t: NDArray | float, phase: float) -> NDArray | float:
    """Tracking reference ``2 sin(0.1 t + phase)`` of the polynomial loop."""
    return 2.0 * np.sin(0.1 * np.asarray(t, dtype=float) + phase)


def poly_regressor_row(u: float) -> NDArray:
    """Monomial feature row ``(1, u, u^2, u^3)``."""
    return np.array([1.0, u, u * u, u * u * u])


def simulate_poly(sys: PolyClosedLoop, rng: RngStream) -> SimulatedTrajectory:
    """Run the closed-loop polynomial task for ``sys.horizon`` steps.

    The feedback sum starts from a conventional ``y_0 = 0`` (the model
    only defines outputs from ``y_1`` on), so ``u_0`` is the clipped
    reference alone.
    """
    g = rng.generator()
    T = sys.horizon
    noise = g.normal(0.0, sys.c_w, size=T)
    theta = sys.theta_true

    observations = []
    inputs = np.empty(T)
    outputs = np.empty(T + 1)
    outputs[0] = 0.0
    ysum = 0.0
    for t in range(T):
        r_t = float(reference_signal(t, sys.phase))
        u_t = float(np.clip(r_t - ysum, -1.0, 1.0))
        M_t = poly_regressor_row(u_t)
        y_next = float(M_t @ theta) + noise[t]
        observations.append(Observation(M=M_t[None, :], y_next=np.array([y_next])))
        inputs[t] = u_t
        outputs[t + 1] = y_next
        ysum += y_next
    return SimulatedTrajectory(
        observations=observations,
        noises=noise[:, None],
        states=outputs[1:, None],
        inputs=inputs[:, None],
        meta={"system": "poly", "phase": sys.phase},
    )


def structured_regressor(x: NDArray, u: NDArray) -> NDArray:
    """Two-column regressor of the heat chain.

    Column 1 holds the node-to-predecessor temperature differences (with
    the driving temperature ``u[0]`` as node 0), column 2 the ambient
    differences ``u[1] - x``; multiplying by ``(alpha, beta)`` gives the
    drift of every node.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.ndim != 1 or u.shape != (2,):
        raise DimensionMismatchError("x must be a state vector and u a 2-vector")
    prev = np.concatenate(([u[0]], x[:-1]))
    return np.column_stack([prev - x, u[1] - x])


def simulate_heat(sys: HeatChain, rng: RngStream) -> SimulatedTrajectory:
    """Run the heat chain, emitting both regressor views."""
    g = rng.generator()
    T, n_x = sys.horizon, sys.n_x
    noise = g.uniform(-1.0, 1.0, size=(T, n_x))
    theta = np.array([sys.alpha_true, sys.beta_true])

    states = np.empty((T + 1, n_x))
    states[0] = sys.theta_init
    inputs = np.empty((T, 2))
    phis = np.empty((T, n_x + 2))
    observations = []
    for t in range(T):
        u_t = np.array(
            [sys.theta_max * (1.0 + np.sin(0.1 * t)), sys.theta_ext]
        )
        M_t = structured_regressor(states[t], u_t)
        states[t + 1] = states[t] + M_t @ theta + noise[t]
        inputs[t] = u_t
        phis[t] = np.concatenate([states[t], u_t])
        observations.append(
            Observation(M=M_t, y_next=states[t + 1] - states[t])
        )
    return SimulatedTrajectory(
        observations=observations,
        noises=noise,
        states=states[1:],
        inputs=inputs,
        lti_phis=phis,
        meta={"system": "heat"},
    )


def lti_true_matrices(
    alpha: float, beta: float, n_x: int
) -> tuple[NDArray, NDArray]:
    """State-space matrices ``(A, B)`` equivalent to the heat chain.

    ``A`` is lower bidiagonal with ``1 - alpha - beta`` on the diagonal and
    ``alpha`` on the first subdiagonal; ``B`` couples node 1 to the driving
    temperature and every node to ambient.
    """
    if n_x < 1:
        raise DimensionMismatchError("n_x must be >= 1")
    A = (1.0 - alpha - beta) * np.eye(n_x)
    idx = np.arange(1, n_x)
    A[idx, idx - 1] = alpha
    B = np.zeros((n_x, 2))
    B[0, 0] = alpha
    B[:, 1] = beta
    return A, B


def sample_eval_set(
    rng: RngStream, count: int, n_x: int, theta_max: float
) -> NDArray:
    """``count`` state-input pairs drawn uniformly from the box
    ``[0, theta_max]^(n_x + 2)``; row layout ``(x, u)``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    g = rng.generator()
    return g.uniform(0.0, theta_max, size=(count, n_x + 2))


def export_trajectory(
    traj: SimulatedTrajectory, config: dict, rng: RngStream, path: str
) -> None:
    """Write a trajectory as CSV plus a JSON sidecar with config and seed.

    Columns: ``t``, then state, input, output, and noise components.
    """
    n_x = traj.states.shape[1]
    n_u = traj.inputs.shape[1]
    n_y = traj.observations[0].y_next.shape[0]
    header = (
        ["t"]
        + [f"x[{i}]" for i in range(n_x)]
        + [f"u[{i}]" for i in range(n_u)]
        + [f"y[{i}]" for i in range(n_y)]
        + [f"w[{i}]" for i in range(traj.noises.shape[1])]
    )
    lines = [",".join(header)]
    for t, obs in enumerate(traj.observations):
        cells = [str(t)]
        cells += [repr(v) for v in traj.states[t]]
        cells += [repr(v) for v in traj.inputs[t]]
        cells += [repr(v) for v in obs.y_next]
        cells += [repr(v) for v in traj.noises[t]]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    sidecar = {
        "config": config,
        "seed": rng.seed,
        "stream_index": rng.stream_index,
        "meta": traj.meta,
    }
    with open(os.path.splitext(path)[0] + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
