import math

import numpy as np
import pytest

from snmbounds.errors import ParamOutOfRangeError, SchemaMismatchError
from snmbounds.experiments import (
    DEFAULT_DELTA_GRID,
    EX1_THETA_STAR,
    SCHEMAS,
    ExperimentConfig,
    FigureData,
    aggregate,
    ex1_c_theta_star,
    ex1_prior_gram,
    run_experiment,
)
from snmbounds.linalg import UNBOUNDED


class TestEx1Constants:
    def test_prior_gram_values(self):
        P = ex1_prior_gram()
        assert P[0, 0] == 2.0
        assert P[0, 2] == pytest.approx(2.0 / 3.0)
        assert P[1, 3] == pytest.approx(2.0 / 5.0)
        assert P[0, 1] == 0.0
        assert np.allclose(P, P.T)
        assert np.all(np.linalg.eigvalsh(P) > 0)

    def test_prior_gram_is_monomial_integral(self):
        # entry (i, j) equals the integral of u^(i+j) over [-1, 1]
        P = ex1_prior_gram()
        u = np.linspace(-1, 1, 200_001)
        for i in range(4):
            for j in range(4):
                quad = np.trapezoid(u ** (i + j), u)
                assert P[i, j] == pytest.approx(quad, abs=1e-6)

    def test_c_theta_star(self):
        # norm of (0, 1, 0, -1): integral of (u - u^3)^2 over [-1, 1]
        # = 2/3 - 4/5 + 2/7 = 16/105
        assert ex1_c_theta_star() == pytest.approx(math.sqrt(16.0 / 105.0))


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig("EX1_VIOLATION")
        assert cfg.n_runs == 10_000
        assert cfg.delta_grid == DEFAULT_DELTA_GRID

    def test_validation(self):
        with pytest.raises(ParamOutOfRangeError):
            ExperimentConfig("NOPE")
        with pytest.raises(ParamOutOfRangeError):
            ExperimentConfig("EX1_BANDS", n_runs=0)
        with pytest.raises(ParamOutOfRangeError):
            ExperimentConfig("EX1_BANDS", delta_grid=(0.5, 1.5))

    def test_meta_round_trip(self):
        cfg = ExperimentConfig("EX2_SHRINK", base_seed=3)
        meta = cfg.meta()
        assert meta["experiment"] == "EX2_SHRINK"
        assert meta["base_seed"] == 3
        assert "schema_version" in meta


class TestFigureData:
    def test_csv_formatting(self):
        fd = FigureData("EX2_SHRINK", ("t", "method", "lhs", "rhs"),
                        [(1, "STRUCTURED", 0.5, UNBOUNDED)])
        text = fd.to_csv_text()
        assert text == "t,method,lhs,rhs\n1,STRUCTURED,0.5,inf\n"

    def test_json_rows(self):
        fd = FigureData("EX2_SHRINK", ("t", "method", "lhs", "rhs"),
                        [(1, "STRUCTURED", 0.5, UNBOUNDED)])
        rows = fd.to_json_rows()
        assert rows == [{"t": 1, "method": "STRUCTURED", "lhs": 0.5, "rhs": "inf"}]

    def test_float_repr_is_lossless(self):
        x = 1.0 / 3.0
        fd = FigureData("EX1_BANDS", ("a",), [(x,)])
        cell = fd.to_csv_text().strip().split("\n")[1]
        assert float(cell) == x

    def test_numpy_scalars_serialize_as_plain_numbers(self):
        fd = FigureData(
            "EX2_SHRINK", ("t", "method", "lhs", "rhs"),
            [(np.int64(3), "STRUCTURED", np.float64(0.25), np.float64(0.5))],
        )
        assert fd.to_csv_text() == "t,method,lhs,rhs\n3,STRUCTURED,0.25,0.5\n"
        row = fd.to_json_rows()[0]
        assert type(row["t"]) is int
        assert type(row["lhs"]) is float


class TestAggregate:
    def test_concat(self):
        cols = tuple(SCHEMAS["EX2_SHRINK"])
        a = FigureData("EX2_SHRINK", cols, [(1, "STRUCTURED", 0.1, 0.2)])
        b = FigureData("EX2_SHRINK", cols, [(2, "STRUCTURED", 0.1, 0.2)])
        assert len(aggregate([a, b]).rows) == 2

    def test_violation_merge(self):
        cols = tuple(SCHEMAS["EX1_VIOLATION"])
        a = FigureData("EX1_VIOLATION", cols, [(0.05, "THM2", 100, 3, 0.03)])
        b = FigureData("EX1_VIOLATION", cols, [(0.05, "THM2", 100, 2, 0.02)])
        merged = aggregate([a, b]).rows
        assert merged == [(0.05, "THM2", 200, 5, 0.025)]

    def test_schema_mismatch(self):
        cols = tuple(SCHEMAS["EX1_VIOLATION"])
        a = FigureData("EX1_VIOLATION", cols, [])
        b = FigureData("EX1_BANDS", tuple(SCHEMAS["EX1_BANDS"]), [])
        with pytest.raises(SchemaMismatchError):
            aggregate([a, b])
        with pytest.raises(SchemaMismatchError):
            aggregate([])


class TestEx1Violation:
    def test_small_run(self):
        cfg = ExperimentConfig("EX1_VIOLATION", n_runs=300, delta_grid=(0.1, 0.5))
        fd = run_experiment(cfg, workers=1)
        assert fd.columns == tuple(SCHEMAS["EX1_VIOLATION"])
        assert len(fd.rows) == 4  # 2 deltas x 2 methods
        for delta, method, n_runs, n_viol, rate in fd.rows:
            assert n_runs == 300
            assert 0 <= n_viol <= n_runs
            assert rate == n_viol / n_runs
            assert method in ("THM2", "EXISTING_EQ25")

    def test_existing_never_beats_thm2(self):
        # the existing radius dominates the new one, so it can only have
        # fewer or equal violations at every delta
        cfg = ExperimentConfig("EX1_VIOLATION", n_runs=500)
        fd = run_experiment(cfg, workers=1)
        by = {(d, m): v for d, m, _, v, _ in fd.rows}
        for delta in cfg.delta_grid:
            assert by[(delta, "EXISTING_EQ25")] <= by[(delta, "THM2")]

    def test_violations_monotone_in_delta(self):
        cfg = ExperimentConfig("EX1_VIOLATION", n_runs=500)
        fd = run_experiment(cfg, workers=1)
        by = {(d, m): v for d, m, _, v, _ in fd.rows}
        for method in ("THM2", "EXISTING_EQ25"):
            counts = [by[(d, method)] for d in sorted(cfg.delta_grid)]
            assert counts == sorted(counts)

    def test_worker_count_independence(self):
        cfg = ExperimentConfig("EX1_VIOLATION", n_runs=64, delta_grid=(0.1,))
        one = run_experiment(cfg, workers=1)
        three = run_experiment(cfg, workers=3)
        assert one.rows == three.rows
        assert one.to_csv_text() == three.to_csv_text()

    def test_seed_sensitivity(self):
        cfg_a = ExperimentConfig("EX1_VIOLATION", n_runs=400, base_seed=0)
        cfg_b = ExperimentConfig("EX1_VIOLATION", n_runs=400, base_seed=1)
        a = run_experiment(cfg_a, workers=1)
        b = run_experiment(cfg_b, workers=1)
        assert a.rows != b.rows


class TestEx1Bands:
    def test_shape_and_containment(self):
        cfg = ExperimentConfig("EX1_BANDS", n_runs=50, delta=0.05)
        fd = run_experiment(cfg, workers=1)
        assert fd.columns == tuple(SCHEMAS["EX1_BANDS"])
        assert len(fd.rows) == 50 * 101
        arr = np.array([row[1:] for row in fd.rows])
        u, g_true, g_hat, half = arr.T
        assert np.all(half >= 0)
        assert np.min(u) == -1.0 and np.max(u) == 1.0
        # g_true is the cubic u - u^3
        assert np.allclose(g_true, u - u**3, atol=1e-12)
        # containment per run (a 5% event per run; 50 runs with 3-sigma
        # slack: at most a handful of misses)
        run_ids = np.array([row[0] for row in fd.rows])
        misses = 0
        for r in range(50):
            sel = run_ids == r
            if np.any(np.abs(g_true[sel] - g_hat[sel]) > half[sel]):
                misses += 1
        assert misses <= 8

    def test_band_width_shrinks_with_horizon(self):
        short = run_experiment(
            ExperimentConfig("EX1_BANDS", n_runs=20, horizon=5), workers=1
        )
        long = run_experiment(
            ExperimentConfig("EX1_BANDS", n_runs=20, horizon=80), workers=1
        )
        mean_half = lambda fd: np.mean([row[4] for row in fd.rows])
        assert mean_half(long) < mean_half(short)


class TestEx1BetaSweep:
    def test_schema_and_ordering(self):
        cfg = ExperimentConfig(
            "EX1_BETA_SWEEP", n_runs=30, c_theta_grid=(0.1, 0.39, 1.0)
        )
        fd = run_experiment(cfg, workers=1)
        assert fd.columns == tuple(SCHEMAS["EX1_BETA_SWEEP"])
        assert len(fd.rows) == 30 * 3
        for _, c_theta, lhs, b2, bex in fd.rows:
            assert lhs >= 0
            # dominance chain at every grid point
            assert b2 <= bex + 1e-12
            assert bex <= math.sqrt(2.0) * b2 + 1e-12

    def test_default_grid_size(self):
        cfg = ExperimentConfig("EX1_BETA_SWEEP", n_runs=2)
        fd = run_experiment(cfg, workers=1)
        assert len(fd.rows) == 2 * 20

    def test_radii_monotone_in_c_theta(self):
        cfg = ExperimentConfig(
            "EX1_BETA_SWEEP", n_runs=5, c_theta_grid=(0.1, 0.5, 2.0)
        )
        fd = run_experiment(cfg, workers=1)
        for r in range(5):
            rows = [row for row in fd.rows if row[0] == r]
            b2 = [row[3] for row in rows]
            bex = [row[4] for row in rows]
            assert b2 == sorted(b2)
            assert bex == sorted(bex)


class TestEx2Shrink:
    def test_schema_and_methods(self):
        cfg = ExperimentConfig(
            "EX2_SHRINK", horizon=100, eval_set_size=50, base_seed=0
        )
        fd = run_experiment(cfg, workers=1)
        assert fd.columns == tuple(SCHEMAS["EX2_SHRINK"])
        methods = {row[1] for row in fd.rows}
        assert methods == {"STRUCTURED", "LTI_FR", "LTI_OP"}
        ts = sorted({row[0] for row in fd.rows})
        assert ts[0] == 1 and ts[-1] == 100

    def test_early_lti_unbounded_structured_finite(self):
        cfg = ExperimentConfig(
            "EX2_SHRINK", horizon=100, eval_set_size=50, base_seed=0
        )
        fd = run_experiment(cfg, workers=1)
        by = {(row[0], row[1]): row for row in fd.rows}
        # t=1: structured Gram (5x2 regressor) is already full rank,
        # the 7-dim LTI Gram cannot be
        assert by[(1, "STRUCTURED")][3] is not UNBOUNDED
        assert by[(1, "LTI_FR")][3] is UNBOUNDED
        assert by[(1, "LTI_OP")][3] is UNBOUNDED
        # by t=100 everything is finite
        for m in ("STRUCTURED", "LTI_FR", "LTI_OP"):
            assert by[(100, m)][3] is not UNBOUNDED

    def test_bounds_dominate_errors(self):
        cfg = ExperimentConfig(
            "EX2_SHRINK", horizon=200, eval_set_size=100, base_seed=1
        )
        fd = run_experiment(cfg, workers=1)
        for t, method, lhs, rhs in fd.rows:
            if rhs is UNBOUNDED:
                continue
            assert lhs <= rhs, (t, method, lhs, rhs)

    def test_structured_tighter_than_lti_late(self):
        cfg = ExperimentConfig(
            "EX2_SHRINK", horizon=1000, eval_set_size=200, base_seed=0
        )
        fd = run_experiment(cfg, workers=1)
        by = {(row[0], row[1]): row[3] for row in fd.rows}
        t_last = max(row[0] for row in fd.rows)
        assert by[(t_last, "STRUCTURED")] < by[(t_last, "LTI_FR")]
        assert by[(t_last, "STRUCTURED")] < by[(t_last, "LTI_OP")]

    def test_bounds_shrink_over_time(self):
        cfg = ExperimentConfig(
            "EX2_SHRINK", horizon=1000, eval_set_size=100, base_seed=0
        )
        fd = run_experiment(cfg, workers=1)
        for method in ("STRUCTURED", "LTI_FR", "LTI_OP"):
            series = [
                (row[0], row[3])
                for row in fd.rows
                if row[1] == method and row[3] is not UNBOUNDED
            ]
            series.sort()
            first = series[1][1]  # skip the very first finite point
            last = series[-1][1]
            assert last < first

    def test_deterministic(self):
        cfg = ExperimentConfig("EX2_SHRINK", horizon=50, eval_set_size=20)
        a = run_experiment(cfg, workers=1)
        b = run_experiment(cfg, workers=1)
        assert a.to_csv_text() == b.to_csv_text()


class TestThetaStarConstant:
    def test_value(self):
        assert tuple(EX1_THETA_STAR) == (0.0, 1.0, 0.0, -1.0)
