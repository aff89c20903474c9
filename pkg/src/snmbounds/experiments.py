"""Reproducible data-producing experiments behind the four result figures.

Each ``run_*`` function turns an :class:`ExperimentConfig` into a
:class:`FigureData` table with a fixed per-experiment schema. Monte Carlo
runs are sharded over worker processes by run index with pre-assigned
Philox streams, so output is bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from . import _accel
from .bounds import BoundParams, beta_lti_frobenius, beta_lti_operator, beta_thm3
from .errors import ParamOutOfRangeError, SchemaMismatchError
from .linalg import UNBOUNDED, cholesky_spd, format_extended, is_unbounded
from .rng import FIXTURE_STREAM, RngStream
from .simulators import (
    UNIFORM_NOISE_PROXY,
    HeatChain,
    lti_true_matrices,
    sample_eval_set,
    simulate_heat,
    structured_regressor,
)

SCHEMA_VERSION = 1
CODE_VERSION = "0.1.0"

SCHEMAS = {
    "EX1_BANDS": ["run", "u", "g_true", "g_hat", "band_halfwidth"],
    "EX1_BETA_SWEEP": ["run", "c_theta", "lhs", "beta_thm2", "beta_existing"],
    "EX1_VIOLATION": ["delta", "method", "n_runs", "n_violations", "rate"],
    "EX2_SHRINK": ["t", "method", "lhs", "rhs"],
}

# --- polynomial benchmark constants -------------------------------------

EX1_THETA_STAR = np.array([0.0, 1.0, 0.0, -1.0])
EX1_CW = 0.2
EX1_HORIZON = 20
EX1_DELTA = 0.05
DEFAULT_DELTA_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5)


def ex1_prior_gram() -> NDArray:
    """Gram matrix of the monomial basis (1, u, u^2, u^3) under the
    uniform measure on [-1, 1]: entry (i, j) is 2/(i+j+1) for even i+j."""
    P = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            if (i + j) % 2 == 0:
                P[i, j] = 2.0 / (i + j + 1)
    return P


def ex1_c_theta_star() -> float:
    """Prior radius of the true parameter: its norm in the Gram weight."""
    P = ex1_prior_gram()
    return math.sqrt(float(EX1_THETA_STAR @ P @ EX1_THETA_STAR))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_runs: int = 10_000
    horizon: int = EX1_HORIZON
    delta_grid: tuple = DEFAULT_DELTA_GRID
    c_theta_grid: tuple = ()
    base_seed: int = 0
    eval_set_size: int = 1000
    delta: float = EX1_DELTA

    def __post_init__(self):
        if self.experiment not in (
            "EX1_BANDS",
            "EX1_BETA_SWEEP",
            "EX1_VIOLATION",
            "EX2_SHRINK",
        ):
            raise ParamOutOfRangeError(f"unknown experiment {self.experiment!r}")
        if self.n_runs < 1 or self.horizon < 1 or self.eval_set_size < 1:
            raise ParamOutOfRangeError("n_runs, horizon, eval_set_size must be >= 1")
        if len(self.delta_grid) == 0:
            raise ParamOutOfRangeError("delta_grid must be nonempty")
        for d in tuple(self.delta_grid) + (self.delta,):
            if not 0 < d < 1:
                raise ParamOutOfRangeError(f"delta {d} outside (0, 1)")

    def meta(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": {
                "n_runs": self.n_runs,
                "horizon": self.horizon,
                "delta_grid": list(self.delta_grid),
                "c_theta_grid": list(self.c_theta_grid),
                "eval_set_size": self.eval_set_size,
                "delta": self.delta,
            },
            "base_seed": self.base_seed,
            "schema_version": SCHEMA_VERSION,
            "code_version": CODE_VERSION,
        }


@dataclass(frozen=True)
class FigureData:
    """Tabular experiment output with its schema and provenance."""

    experiment: str
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    def to_csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_format_cell(c) for c in row))
        return "\n".join(lines) + "\n"

    def to_json_rows(self) -> list:
        return [
            {k: _json_cell(v) for k, v in zip(self.columns, row)}
            for row in self.rows
        ]


def _json_cell(c):
    if is_unbounded(c):
        return format_extended(c)
    if isinstance(c, (float, np.floating)):
        return float(c)
    if isinstance(c, (int, np.integer)):
        return int(c)
    return c


def _format_cell(c) -> str:
    # numpy scalars repr as e.g. "np.float64(...)", so coerce to built-ins
    if is_unbounded(c):
        return "inf"
    if isinstance(c, (float, np.floating)):
        return repr(float(c))
    if isinstance(c, (int, np.integer)):
        return str(int(c))
    return str(c)


def aggregate(results: list[FigureData]) -> FigureData:
    """Combine shards of the same experiment.

    Row tables concatenate; the violation table merges matching
    (delta, method) rows by exact integer summation of counts.
    """
    if not results:
        raise SchemaMismatchError("nothing to aggregate")
    first = results[0]
    for r in results[1:]:
        if r.experiment != first.experiment or r.columns != first.columns:
            raise SchemaMismatchError("experiment tag or schema differs")
    rows = [row for r in results for row in r.rows]
    if first.experiment == "EX1_VIOLATION":
        merged: dict = {}
        for delta, method, n_runs, n_viol, _ in rows:
            key = (delta, method)
            prev = merged.get(key, (0, 0))
            merged[key] = (prev[0] + n_runs, prev[1] + n_viol)
        rows = [
            (delta, method, n, v, v / n)
            for (delta, method), (n, v) in sorted(merged.items())
        ]
    return FigureData(first.experiment, first.columns, rows, first.meta)


# --- Example 1: shared Monte Carlo statistics ---------------------------


def _ex1_chunk(args) -> tuple:
    base_seed, lo, hi, horizon = args
    noise = np.empty((hi - lo, horizon))
    phases = np.empty(hi - lo)
    for i, r in enumerate(range(lo, hi)):
        g = RngStream(base_seed, r).generator()
        phases[i] = g.uniform(0.0, 2.0 * math.pi)
        noise[i] = g.normal(0.0, EX1_CW, size=horizon)
    P = ex1_prior_gram()
    z = -P @ EX1_THETA_STAR  # P (mu - theta*), mu = 0
    return _accel.poly_selfnorm_stats(noise, phases, EX1_THETA_STAR, P, z)


def _ex1_collect(
    base_seed: int, n_runs: int, horizon: int, workers: int
) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """Self-normalized error and log-det statistics for all runs,
    identical for any worker count (per-run streams, index-ordered
    concatenation)."""
    workers = max(1, min(workers, n_runs))
    bounds_ = np.linspace(0, n_runs, workers + 1).astype(int)
    tasks = [
        (base_seed, int(lo), int(hi), horizon)
        for lo, hi in zip(bounds_[:-1], bounds_[1:])
        if hi > lo
    ]
    if workers == 1:
        parts = [_ex1_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_ex1_chunk, tasks))
    snorm_sq = np.concatenate([p[0] for p in parts])
    logdet = np.concatenate([p[1] for p in parts])
    theta_hat = np.concatenate([p[2] for p in parts])
    V_T = np.concatenate([p[3] for p in parts])
    return snorm_sq, logdet, theta_hat, V_T


def _beta_sq_thm2(c_theta: float, logdet: NDArray, delta: float) -> NDArray:
    return c_theta**2 + EX1_CW**2 * (logdet + 2.0 * math.log(1.0 / delta))


def _beta_sq_existing(c_theta: float, logdet: NDArray, delta: float) -> NDArray:
    return (
        c_theta + EX1_CW * np.sqrt(logdet + 2.0 * math.log(1.0 / delta))
    ) ** 2


def run_ex1_violation(cfg: ExperimentConfig, workers: int = 1) -> FigureData:
    """Uniform-in-time violation frequency per confidence level.

    A run violates a bound if the realized self-normalized error exceeds
    the radius at any step; the same random streams serve every delta and
    both bound variants.
    """
    snorm_sq, logdet, _, _ = _ex1_collect(
        cfg.base_seed, cfg.n_runs, cfg.horizon, workers
    )
    c_theta = ex1_c_theta_star()
    rows = []
    for delta in cfg.delta_grid:
        for method, beta_sq in (
            ("THM2", _beta_sq_thm2(c_theta, logdet, delta)),
            ("EXISTING_EQ25", _beta_sq_existing(c_theta, logdet, delta)),
        ):
            n_viol = int(np.sum(np.any(snorm_sq > beta_sq, axis=1)))
            rows.append((delta, method, cfg.n_runs, n_viol, n_viol / cfg.n_runs))
    return FigureData("EX1_VIOLATION", tuple(SCHEMAS["EX1_VIOLATION"]), rows, cfg.meta())


def run_ex1_bands(
    cfg: ExperimentConfig, workers: int = 1, u_grid_size: int = 101
) -> FigureData:
    """Pointwise output confidence bands around the final estimate."""
    _, logdet, theta_hat, V_T = _ex1_collect(
        cfg.base_seed, cfg.n_runs, cfg.horizon, workers
    )
    P = ex1_prior_gram()
    c_theta = ex1_c_theta_star()
    u = np.linspace(-1.0, 1.0, u_grid_size)
    U = np.stack([np.ones_like(u), u, u**2, u**3], axis=0)  # (4, grid)
    g_true = EX1_THETA_STAR @ U
    beta = np.sqrt(_beta_sq_thm2(c_theta, logdet[:, -1], cfg.delta))
    rows = []
    for r in range(cfg.n_runs):
        H = P + V_T[r]
        sigma = np.sqrt(np.einsum("ig,ig->g", U, np.linalg.solve(H, U)))
        g_hat = theta_hat[r] @ U
        half = beta[r] * sigma
        for k in range(u_grid_size):
            rows.append(
                (r, float(u[k]), float(g_true[k]), float(g_hat[k]), float(half[k]))
            )
    return FigureData("EX1_BANDS", tuple(SCHEMAS["EX1_BANDS"]), rows, cfg.meta())


def run_ex1_beta_sweep(cfg: ExperimentConfig, workers: int = 1) -> FigureData:
    """Realized error vs both radii across a grid of prior radii."""
    snorm_sq, logdet, _, _ = _ex1_collect(
        cfg.base_seed, cfg.n_runs, cfg.horizon, workers
    )
    grid = cfg.c_theta_grid
    if not grid:
        c_star = ex1_c_theta_star()
        grid = tuple(np.geomspace(0.1 * c_star, 10.0 * c_star, 20))
    lhs = np.sqrt(snorm_sq[:, -1])
    ld = logdet[:, -1]
    rows = []
    for r in range(cfg.n_runs):
        for c_theta in grid:
            rows.append(
                (
                    r,
                    float(c_theta),
                    float(lhs[r]),
                    float(math.sqrt(_beta_sq_thm2(c_theta, ld[r], cfg.delta))),
                    float(math.sqrt(_beta_sq_existing(c_theta, ld[r], cfg.delta))),
                )
            )
    return FigureData("EX1_BETA_SWEEP", tuple(SCHEMAS["EX1_BETA_SWEEP"]), rows, cfg.meta())


# --- Example 2: heat-chain shrink curves --------------------------------


def _report_grid(horizon: int, points: int = 40) -> NDArray:
    grid = np.unique(
        np.round(np.geomspace(1, horizon, points)).astype(int)
    )
    return grid


def run_ex2_shrink(cfg: ExperimentConfig, workers: int = 1) -> FigureData:
    """Worst-case prediction-error bounds of the structured and the
    structure-agnostic estimators along one seeded heat-chain run.

    The evaluation set is fixed once per experiment from a reserved
    stream, shared by all report times and methods.
    """
    sys = HeatChain(horizon=cfg.horizon)
    traj = simulate_heat(sys, RngStream(cfg.base_seed, 0))
    eval_xu = sample_eval_set(
        RngStream(cfg.base_seed, FIXTURE_STREAM),
        cfg.eval_set_size,
        sys.n_x,
        sys.theta_max,
    )
    n_x = sys.n_x
    theta_star = np.array([sys.alpha_true, sys.beta_true])
    A_star, B_star = lti_true_matrices(sys.alpha_true, sys.beta_true, n_x)
    Theta_star = np.hstack([A_star, B_star])

    M_seq = np.stack([obs.M for obs in traj.observations])  # (T, n_x, 2)
    y_seq = np.stack([obs.y_next for obs in traj.observations])  # (T, n_x)
    phis = traj.lti_phis  # (T, n_x + 2)
    x_next = traj.states  # (T, n_x)

    cum_V = np.cumsum(np.einsum("tij,tik->tjk", M_seq, M_seq), axis=0)
    cum_b = np.cumsum(np.einsum("tij,ti->tj", M_seq, y_seq), axis=0)
    cum_Phi = np.cumsum(np.einsum("ti,tj->tij", phis, phis), axis=0)
    cum_C = np.cumsum(np.einsum("ti,tj->tij", x_next, phis), axis=0)

    M_eval = np.stack(
        [structured_regressor(row[:n_x], row[n_x:]) for row in eval_xu]
    )  # (S, n_x, 2)
    phi_eval = eval_xu  # (S, n_x + 2)

    params = BoundParams(
        c_w=UNIFORM_NOISE_PROXY, c_theta=0.0, delta=cfg.delta
    )
    Vbar = sys.theta_max**2 * np.eye(2)
    Phibar = sys.theta_max**2 * np.eye(n_x + 2)

    rows = []
    for t in _report_grid(cfg.horizon):
        V_t = cum_V[t - 1]
        b_t = cum_b[t - 1]
        beta_s = beta_thm3(params, np.zeros((2, 2)), V_t, Vbar)
        if beta_s.finite:
            fV = cholesky_spd(V_t)
            theta_hat = scipy.linalg.cho_solve((fV.lower, True), b_t)
            diff = M_eval @ (theta_star - theta_hat)  # (S, n_x)
            lhs_s = float(np.max(np.linalg.norm(diff, axis=1)))
            # batched whitened operator norms of the (n_x, 2) regressors
            Y = scipy.linalg.solve_triangular(
                fV.lower, M_eval.transpose(2, 0, 1).reshape(2, -1), lower=True
            ).reshape(2, len(M_eval), n_x)
            G = np.einsum("isn,jsn->sij", Y, Y)  # (S, 2, 2)
            tr = G[:, 0, 0] + G[:, 1, 1]
            disc = np.sqrt(
                (G[:, 0, 0] - G[:, 1, 1]) ** 2 + 4.0 * G[:, 0, 1] ** 2
            )
            sigma_max = math.sqrt(float(np.max(0.5 * (tr + disc))))
            rows.append((int(t), "STRUCTURED", lhs_s, beta_s.value * sigma_max))
        else:
            rows.append((int(t), "STRUCTURED", UNBOUNDED, UNBOUNDED))

        Phi_t = cum_Phi[t - 1]
        beta_fr = beta_lti_frobenius(params, n_x, Phi_t, Phibar)
        beta_op = beta_lti_operator(params, n_x, Phi_t, Phibar)
        if beta_fr.finite:
            fPhi = cholesky_spd(Phi_t)
            Theta_hat = scipy.linalg.cho_solve(
                (fPhi.lower, True), cum_C[t - 1].T
            ).T
            diff = phi_eval @ (Theta_star - Theta_hat).T  # (S, n_x)
            lhs_l = float(np.max(np.linalg.norm(diff, axis=1)))
            Yp = scipy.linalg.solve_triangular(fPhi.lower, phi_eval.T, lower=True)
            phi_norm_max = float(np.sqrt(np.max(np.sum(Yp * Yp, axis=0))))
            rows.append((int(t), "LTI_FR", lhs_l, beta_fr.value * phi_norm_max))
            rows.append((int(t), "LTI_OP", lhs_l, beta_op.value * phi_norm_max))
        else:
            rows.append((int(t), "LTI_FR", UNBOUNDED, UNBOUNDED))
            rows.append((int(t), "LTI_OP", UNBOUNDED, UNBOUNDED))
    return FigureData("EX2_SHRINK", tuple(SCHEMAS["EX2_SHRINK"]), rows, cfg.meta())


RUNNERS = {
    "EX1_BANDS": run_ex1_bands,
    "EX1_BETA_SWEEP": run_ex1_beta_sweep,
    "EX1_VIOLATION": run_ex1_violation,
    "EX2_SHRINK": run_ex2_shrink,
}


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> FigureData:
    """Dispatch on the experiment tag; ``workers=None`` uses available
    parallelism (output is worker-count independent)."""
    if workers is None:
        workers = os.cpu_count() or 1
    return RUNNERS[cfg.experiment](cfg, workers=workers)
