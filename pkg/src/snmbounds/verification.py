"""Empirical oracles for the probabilistic statements behind the radii.

Each check here attacks one ingredient of the theory with an independent
numerical method: Monte Carlo coverage counts for the martingale and
concentration inequalities, adaptive quadrature for the Gaussian integral
identity, and exact chi-square tails as a cross-check for the subgaussian
threshold. Gaussian noise (proxy = covariance) is the canonical subgaussian
instance throughout, which keeps every threshold analytically checkable.

The statistical pass criterion is uniform across checks: an empirical rate
may exceed its target by at most three binomial standard errors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.stats
from numpy.typing import NDArray

from . import _accel
from .bounds import subgaussian_bound
from .errors import ParamOutOfRangeError
from .linalg import check_symmetric, cholesky_spd
from .rng import RngStream

#: Pass criterion: empirical rate <= target + SLACK_SIGMAS standard errors.
SLACK_SIGMAS = 3.0


def binomial_slack(delta: float, n_runs: int) -> float:
    """Allowance of ``SLACK_SIGMAS`` binomial standard errors."""
    return SLACK_SIGMAS * math.sqrt(delta * (1.0 - delta) / n_runs)


@dataclass(frozen=True)
class CoverageResult:
    """Violation count of one Monte Carlo coverage experiment."""

    n_runs: int
    n_violations: int
    delta: float
    slack: float

    def __post_init__(self):
        if not 0 <= self.n_violations <= self.n_runs:
            raise ValueError("violation count out of range")

    @property
    def rate(self) -> float:
        return self.n_violations / self.n_runs

    @property
    def passed(self) -> bool:
        return self.rate <= self.delta + self.slack

    def record(self, check: str, params: dict, seed: RngStream) -> dict:
        """JSON-serializable summary of this check."""
        return {
            "check": check,
            "params": params,
            "n_runs": self.n_runs,
            "n_violations": self.n_violations,
            "rate": self.rate,
            "threshold": self.delta + self.slack,
            "pass": self.passed,
            "seed": seed.seed,
            "stream_index": seed.stream_index,
        }


@dataclass(frozen=True)
class SnmTestCase:
    """Scenario for the martingale-bound coverage check.

    ``regressor_plan`` selects how the regressors are produced:
    ``DETERMINISTIC_FIXED`` uses the pre-laid sequence in ``regressors``
    (or a default sinusoidal design), while ``STATE_FEEDBACK`` runs the
    closed-loop polynomial task so the regressors depend on past noise.
    """

    shift_z: NDArray
    Pbar: NDArray
    noise_proxy_scale: float
    horizon: int
    regressor_plan: str = "DETERMINISTIC_FIXED"
    regressors: Optional[NDArray] = None
    theta_true: NDArray = field(
        default_factory=lambda: np.array([0.0, 1.0, 0.0, -1.0])
    )

    def __post_init__(self):
        object.__setattr__(
            self, "shift_z", np.asarray(self.shift_z, dtype=float)
        )
        Pbar = check_symmetric(np.asarray(self.Pbar, dtype=float), "Pbar")
        cholesky_spd(Pbar, "Pbar")
        object.__setattr__(self, "Pbar", Pbar)
        if self.regressor_plan not in ("DETERMINISTIC_FIXED", "STATE_FEEDBACK"):
            raise ParamOutOfRangeError(
                f"unknown regressor plan {self.regressor_plan!r}"
            )
        if self.noise_proxy_scale <= 0 or self.horizon < 1:
            raise ParamOutOfRangeError("need c_w > 0 and horizon >= 1")


def _psd_factor(R: NDArray) -> NDArray:
    """Square root of a PSD matrix for sampling (eigendecomposition based,
    tolerant of exact singularity)."""
    vals, vecs = np.linalg.eigh(R)
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)


def mc_check_lemma1(
    H: NDArray,
    R: NDArray,
    x: NDArray,
    n_samples: int,
    rng: RngStream,
) -> tuple[float, float, bool]:
    """Monte Carlo check of the determinant-weighted moment inequality
    ``E[exp(norm(x+v)^2 / 2)_{inv(H+R)}] / sqrt(det(H+R))
    <= exp(norm(x)^2 / 2)_{inv(H)} / sqrt(det H)``
    for Gaussian ``v`` with covariance (= proxy) ``R``.

    Returns the sample-mean left side, the exact right side, and a pass
    flag with a three-standard-error statistical tolerance (Gaussian noise
    attains equality, so a strict comparison would fail half the time).
    """
    H = check_symmetric(np.asarray(H, dtype=float), "H")
    R = check_symmetric(np.asarray(R, dtype=float), "R")
    x = np.asarray(x, dtype=float)
    fH = cholesky_spd(H, "H")
    fHR = cholesky_spd(H + R, "H + R")
    if np.any(np.linalg.eigvalsh(H - R) < -1e-10 * max(1.0, np.trace(H))):
        warnings.warn(
            "R exceeds H in the PSD order: the Monte Carlo estimator of the "
            "left side has unbounded variance",
            stacklevel=2,
        )
    g = rng.generator()
    v = g.standard_normal(size=(n_samples, H.shape[0])) @ _psd_factor(R).T
    y = scipy.linalg.solve_triangular(fHR.lower, (x[None, :] + v).T, lower=True)
    e = np.exp(0.5 * np.sum(y * y, axis=0))
    mean = float(np.mean(e))
    se = float(np.std(e, ddof=1) / math.sqrt(n_samples))
    lhs = mean * math.exp(-0.5 * fHR.log_det)
    rhs = math.exp(
        0.5 * float(np.sum(
            scipy.linalg.solve_triangular(fH.lower, x, lower=True) ** 2
        ))
        - 0.5 * fH.log_det
    )
    passed = lhs <= rhs * (1.0 + SLACK_SIGMAS * se / mean)
    return lhs, rhs, passed


def quadrature_check_gaussian_integral(
    Sigma: NDArray, b: NDArray
) -> tuple[float, float]:
    """Numeric vs closed-form value of the completed-square Gaussian
    integral ``int exp(-norm(u)^2/2)_{inv(Sigma)} + u.b) du``.

    Adaptive (tensorized for 2-D) quadrature over a box of 12 standard
    deviations around the maximizer ``Sigma @ b``; closed form is
    ``sqrt((2 pi)^n det Sigma) exp(norm(b)^2_Sigma / 2)``.
    """
    Sigma = check_symmetric(np.asarray(Sigma, dtype=float), "Sigma")
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = Sigma.shape[0]
    if n > 2:
        raise ParamOutOfRangeError("quadrature check supports dim <= 2 only")
    fS = cholesky_spd(Sigma, "Sigma")
    Sinv = np.linalg.inv(Sigma)
    center = Sigma @ b
    half = 12.0 * np.sqrt(np.diag(Sigma))
    closed = math.sqrt((2.0 * math.pi) ** n) * math.exp(
        0.5 * fS.log_det + 0.5 * float(b @ Sigma @ b)
    )
    if n == 1:
        numeric, _ = scipy.integrate.quad(
            lambda u: math.exp(-0.5 * Sinv[0, 0] * u * u + u * b[0]),
            center[0] - half[0],
            center[0] + half[0],
        )
    else:
        def integrand(u1, u0):
            u = np.array([u0, u1])
            return math.exp(-0.5 * float(u @ Sinv @ u) + float(u @ b))

        numeric, _ = scipy.integrate.dblquad(
            integrand,
            center[0] - half[0],
            center[0] + half[0],
            lambda u0: center[1] - half[1],
            lambda u0: center[1] + half[1],
            epsabs=1e-10 * closed,
            epsrel=1e-9,
        )
    return float(numeric), closed


def mc_check_lemma2(
    n_runs: int,
    horizon: int,
    delta: float,
    rng: RngStream,
    process: str = "EXPONENTIAL_WALK",
) -> CoverageResult:
    """Uniform-in-time Markov bound for nonnegative supermartingales.

    The default test process is the exponential random walk
    ``q_t = exp(sum g_k - t/2)`` (a nonnegative martingale with
    ``E[q_0] = 1``, nontrivial fluctuations). ``CONSTANT`` and
    ``DECREASING`` exercise the degenerate supermartingales for which no
    violation is possible.
    """
    if not 0 < delta < 1:
        raise ParamOutOfRangeError("delta must lie in (0, 1)")
    g = rng.generator()
    if process == "EXPONENTIAL_WALK":
        increments = g.standard_normal(size=(n_runs, horizon))
        drift = np.arange(1, horizon + 1) * 0.5
        log_q = np.cumsum(increments, axis=1) - drift[None, :]
    elif process == "CONSTANT":
        log_q = np.zeros((n_runs, horizon))
    elif process == "DECREASING":
        log_q = np.cumsum(-g.uniform(0.0, 1.0, size=(n_runs, horizon)), axis=1)
    else:
        raise ParamOutOfRangeError(f"unknown process {process!r}")
    threshold = math.log(1.0 / delta)  # E[q_0] = 1
    violations = int(np.sum(np.any(log_q > threshold, axis=1)))
    return CoverageResult(n_runs, violations, delta, binomial_slack(delta, n_runs))


def _deterministic_plan(horizon: int, dim: int) -> NDArray:
    """Default fixed regressor sequence: rows of phase-shifted sinusoid
    powers, persistently exciting for the 4-dim monomial basis."""
    t = np.arange(horizon)
    u = np.sin(0.35 * t + 0.3)
    return np.stack([u**k for k in range(dim)], axis=1)[:, None, :]


def mc_check_theorem1(
    case: SnmTestCase, n_runs: int, delta: float, rng: RngStream
) -> CoverageResult:
    """Coverage of the self-normalized martingale bound: per run, the
    inequality must hold at every step (a run violates if it fails at any
    ``t``, matching the uniform-in-time quantifier)."""
    if not 0 < delta < 1:
        raise ParamOutOfRangeError("delta must lie in (0, 1)")
    z = case.shift_z
    c_w = case.noise_proxy_scale
    T = case.horizon
    log_term = 2.0 * math.log(1.0 / delta)

    if case.regressor_plan == "STATE_FEEDBACK":
        # closed-loop polynomial task: one Philox substream per run
        noise = np.empty((n_runs, T))
        phases = np.empty(n_runs)
        for r in range(n_runs):
            g = rng.substream(rng.stream_index + r).generator()
            phases[r] = g.uniform(0.0, 2.0 * math.pi)
            noise[r] = g.normal(0.0, c_w, size=T)
        snorm_sq, logdet, _, _ = _accel.poly_selfnorm_stats(
            noise, phases, case.theta_true, case.Pbar, z
        )
        rhs = _snorm_rhs_base(case) + c_w**2 * (logdet + log_term)
        violations = int(np.sum(np.any(snorm_sq > rhs, axis=1)))
        return CoverageResult(
            n_runs, violations, delta, binomial_slack(delta, n_runs)
        )

    plan = case.regressors
    if plan is None:
        plan = _deterministic_plan(T, case.Pbar.shape[0])
    plan = np.asarray(plan, dtype=float)
    if plan.ndim == 2:
        plan = plan[:, None, :]
    # deterministic design: V_t and the factorizations are shared by all runs
    n = case.Pbar.shape[0]
    g = rng.generator()
    base = _snorm_rhs_base(case)
    s = np.zeros((n_runs, n))
    H = case.Pbar.copy()
    logdet0 = cholesky_spd(case.Pbar).log_det
    violated = np.zeros(n_runs, dtype=bool)
    for t in range(T):
        M = plan[t]
        w = g.normal(0.0, c_w, size=(n_runs, M.shape[0]))
        s += w @ M
        H = H + M.T @ M
        fH = cholesky_spd(H)
        rhs_t = base + c_w**2 * (fH.log_det - logdet0 + log_term)
        y = scipy.linalg.solve_triangular(fH.lower, (z[None, :] + s).T, lower=True)
        violated |= np.sum(y * y, axis=0) > rhs_t
    violations = int(np.sum(violated))
    return CoverageResult(n_runs, violations, delta, binomial_slack(delta, n_runs))


def _snorm_rhs_base(case: SnmTestCase) -> float:
    """Offset term ``norm(z)^2`` in the inverse ``Pbar`` norm."""
    fP = cholesky_spd(case.Pbar)
    y = scipy.linalg.solve_triangular(fP.lower, case.shift_z, lower=True)
    return float(y @ y)


def mc_check_corollary2(
    R: NDArray, n_runs: int, delta: float, rng: RngStream
) -> CoverageResult:
    """Coverage of the general subgaussian threshold for Gaussian draws.

    ``norm(v)^2`` in the inverse-``R`` norm is exactly chi-square with
    ``n`` degrees of freedom, so besides counting violations we assert the
    exact tail probability at the threshold stays below ``delta``.
    """
    R = check_symmetric(np.asarray(R, dtype=float), "R")
    cholesky_spd(R, "R")
    n = R.shape[0]
    threshold = subgaussian_bound(n, delta)
    exact_tail = float(scipy.stats.chi2.sf(threshold, df=n))
    if exact_tail > delta:
        raise AssertionError(
            f"subgaussian threshold not conservative: chi2 tail {exact_tail} > {delta}"
        )
    g = rng.generator()
    # scale invariance: the violation indicator only depends on the
    # whitened draws, so sample chi-square norms directly
    v = g.standard_normal(size=(n_runs, n))
    violations = int(np.sum(np.sum(v * v, axis=1) > threshold))
    return CoverageResult(n_runs, violations, delta, binomial_slack(delta, n_runs))
