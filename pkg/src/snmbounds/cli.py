"""Command-line entry point.

Subcommands map onto the experiments and verification checks:

- ``bands`` (alias ``example1``): output confidence bands of the
  polynomial task (figure-1 data);
- ``sweep``: realized error vs both radii across prior radii (figure 2);
- ``violation``: violation frequency vs confidence level (figure 3);
- ``example2``: heat-chain shrink curves (figure 4);
- ``verify``: one of the Monte Carlo / quadrature oracles, as JSON.

Output files are written atomically (temp file + rename); reruns with the
same flags produce byte-identical files for any ``--workers`` value.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .errors import ParamOutOfRangeError
from .experiments import (
    DEFAULT_DELTA_GRID,
    EX1_CW,
    EX1_DELTA,
    EX1_HORIZON,
    ExperimentConfig,
    FigureData,
    ex1_prior_gram,
    run_experiment,
)
from .rng import RngStream
from .verification import (
    SnmTestCase,
    mc_check_corollary2,
    mc_check_lemma1,
    mc_check_lemma2,
    mc_check_theorem1,
    quadrature_check_gaussian_integral,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base seed (u64); env SNM_SEED overrides")
    p.add_argument("--out", type=str, default=None, help="output file path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--config", type=str, default=None, help="JSON file with ExperimentConfig fields")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snmbounds",
        description="Finite-sample confidence-set experiments and verification checks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    for name, hlp in (
        ("bands", "output confidence bands of the polynomial task"),
        ("example1", "alias of 'bands'"),
    ):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--runs", type=int, default=20)
        p.add_argument("--horizon", type=int, default=EX1_HORIZON)
        p.add_argument("--delta", type=float, default=EX1_DELTA)
        p.add_argument("--u-grid", type=int, default=101)
        _add_common(p)

    p = sub.add_parser("sweep", help="realized error vs radii across prior radii")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--horizon", type=int, default=EX1_HORIZON)
    p.add_argument("--delta", type=float, default=EX1_DELTA)
    p.add_argument("--c-thetas", type=str, default=None, help="comma-separated grid")
    _add_common(p)

    p = sub.add_parser("violation", help="violation frequency vs confidence level")
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--horizon", type=int, default=EX1_HORIZON)
    p.add_argument(
        "--deltas",
        type=str,
        default=",".join(str(d) for d in DEFAULT_DELTA_GRID),
        help="comma-separated confidence levels",
    )
    _add_common(p)

    p = sub.add_parser("example2", help="heat-chain shrink curves")
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--delta", type=float, default=EX1_DELTA)
    p.add_argument("--eval-set-size", type=int, default=1000)
    _add_common(p)

    p = sub.add_parser("verify", help="run one verification oracle")
    p.add_argument(
        "--check",
        required=True,
        choices=("lemma1", "lemma2", "theorem1", "corollary2", "gaussian-integral"),
    )
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--delta", type=float, default=EX1_DELTA)
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument(
        "--plan",
        choices=("DETERMINISTIC_FIXED", "STATE_FEEDBACK"),
        default="DETERMINISTIC_FIXED",
        help="regressor plan (theorem1 only)",
    )
    _add_common(p)

    return parser


def _parse_deltas(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(",") if v)
    except ValueError as exc:
        raise ParamOutOfRangeError(f"bad delta list {text!r}") from exc
    for v in vals:
        if not 0 < v < 1:
            raise ParamOutOfRangeError(f"--deltas value {v} outside (0, 1)")
    return vals


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".snmbounds-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(data: FigureData, args) -> None:
    if args.format == "csv":
        text = data.to_csv_text()
    else:
        text = json.dumps(
            {"meta": data.meta, "rows": data.to_json_rows()}, indent=2, sort_keys=True
        ) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        if args.format == "csv":
            _atomic_write(
                os.path.splitext(args.out)[0] + ".meta.json",
                json.dumps(data.meta, indent=2, sort_keys=True) + "\n",
            )
    else:
        sys.stdout.write(text)


def _seed(args) -> int:
    env = os.environ.get("SNM_SEED")
    return int(env) if env is not None else args.seed


def _config_overrides(args) -> dict:
    if not args.config:
        return {}
    with open(args.config, encoding="utf-8") as fh:
        return json.load(fh)


def _run_verify(args) -> int:
    seed = _seed(args)
    stream = RngStream(seed, 0)
    if args.check == "lemma1":
        g = stream.generator()
        n_cases, ok = 10, True
        records = []
        for i in range(n_cases):
            A = g.standard_normal((2, 2))
            H = A @ A.T + 2.0 * np.eye(2)
            B = g.standard_normal((2, 2))
            R = B @ B.T
            R *= 0.9 * np.min(np.linalg.eigvalsh(H)) / max(
                np.max(np.linalg.eigvalsh(R)), 1e-12
            )
            x = g.standard_normal(2)
            lhs, rhs, passed = mc_check_lemma1(
                H, R, x, args.runs, stream.substream(i + 1)
            )
            ok &= passed
            records.append({"case": i, "lhs": lhs, "rhs": rhs, "pass": passed})
        record = {"check": "lemma1", "n_cases": n_cases, "cases": records,
                  "pass": ok, "seed": seed}
    elif args.check == "lemma2":
        res = mc_check_lemma2(args.runs, args.horizon, args.delta, stream)
        record = res.record("lemma2", {"delta": args.delta, "horizon": args.horizon}, stream)
    elif args.check == "theorem1":
        case = SnmTestCase(
            shift_z=np.zeros(4),
            Pbar=ex1_prior_gram(),
            noise_proxy_scale=EX1_CW,
            horizon=min(args.horizon, EX1_HORIZON),
            regressor_plan=args.plan,
        )
        res = mc_check_theorem1(case, args.runs, args.delta, stream)
        record = res.record(
            "theorem1", {"delta": args.delta, "plan": args.plan}, stream
        )
    elif args.check == "corollary2":
        res = mc_check_corollary2(np.eye(2), args.runs, args.delta, stream)
        record = res.record("corollary2", {"delta": args.delta, "dim": 2}, stream)
    else:  # gaussian-integral
        g = stream.generator()
        ok = True
        worst = 0.0
        for _ in range(10):
            n = int(g.integers(1, 3))
            A = g.standard_normal((n, n))
            Sigma = A @ A.T + 0.5 * np.eye(n)
            b = g.standard_normal(n)
            numeric, closed = quadrature_check_gaussian_integral(Sigma, b)
            rel = abs(numeric - closed) / closed
            worst = max(worst, rel)
            ok &= rel <= 1e-6
        record = {"check": "gaussian-integral", "worst_rel_error": worst,
                  "pass": ok, "seed": seed}
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    passed = bool(record["pass"])
    # keep stdout clean for the JSON payload when no output file is given
    print(
        f"verify {args.check}: {'pass' if passed else 'FAIL'}",
        file=sys.stdout if args.out else sys.stderr,
    )
    return 0 if passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "verify":
            return _run_verify(args)

        overrides = _config_overrides(args)
        seed = _seed(args)
        if args.subcommand in ("bands", "example1"):
            kwargs = dict(
                experiment="EX1_BANDS",
                n_runs=args.runs,
                horizon=args.horizon,
                delta=args.delta,
                base_seed=seed,
            )
            kwargs.update(overrides)
            cfg = ExperimentConfig(**kwargs)
            from .experiments import run_ex1_bands

            data = run_ex1_bands(
                cfg, workers=args.workers or (os.cpu_count() or 1),
                u_grid_size=args.u_grid,
            )
        elif args.subcommand == "sweep":
            grid = ()
            if args.c_thetas:
                grid = tuple(float(v) for v in args.c_thetas.split(",") if v)
                if any(v < 0 for v in grid):
                    raise ParamOutOfRangeError("--c-thetas values must be nonnegative")
            kwargs = dict(
                experiment="EX1_BETA_SWEEP",
                n_runs=args.runs,
                horizon=args.horizon,
                delta=args.delta,
                c_theta_grid=grid,
                base_seed=seed,
            )
            kwargs.update(overrides)
            cfg = ExperimentConfig(**kwargs)
            data = run_experiment(cfg, workers=args.workers)
        elif args.subcommand == "violation":
            kwargs = dict(
                experiment="EX1_VIOLATION",
                n_runs=args.runs,
                horizon=args.horizon,
                delta_grid=_parse_deltas(args.deltas),
                base_seed=seed,
            )
            kwargs.update(overrides)
            cfg = ExperimentConfig(**kwargs)
            data = run_experiment(cfg, workers=args.workers)
        else:  # example2
            kwargs = dict(
                experiment="EX2_SHRINK",
                n_runs=1,
                horizon=args.horizon,
                delta=args.delta,
                eval_set_size=args.eval_set_size,
                base_seed=seed,
            )
            kwargs.update(overrides)
            cfg = ExperimentConfig(**kwargs)
            data = run_experiment(cfg, workers=args.workers)
    except ParamOutOfRangeError as exc:
        parser.exit(2, f"error: {exc}\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    _emit(data, args)
    # summary goes to stdout unless stdout already carries the data itself
    print(
        f"{data.experiment}: {len(data.rows)} rows"
        + (f" -> {args.out}" if args.out else ""),
        file=sys.stdout if args.out else sys.stderr,
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
