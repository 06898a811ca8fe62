"""Command-line front end: `klmskit run <config> [--out DIR] [--runs N]
[--seed S]`.

Runs the configured Monte Carlo experiment, optionally builds the
analytical model alongside it, and writes two CSV artifacts into the
output directory:

  curves.csv   n, mse_db_mc, mse_db_model, dict_size_mean — one row per
               iteration (the model column is empty when the model is
               disabled or unstable for that segment)
  summary.csv  J_min_db, J_ms_inf_db, J_ex_inf_db, n_eps, eta_max — final
               segment; steady-state fields read "unstable" when the
               recursion has no fixed point at the configured step size

Exit codes: 0 success (including a model reported unstable), 2
configuration error, 3 runtime numerical error. The KLMSKIT_WORKERS
environment variable sets the Monte Carlo worker count (default 1);
results are identical for any worker count.

The reported n_eps counts iterations from the start of the stream: the
final segment's convergence iteration (threshold 1e-3 relative to the
steady-state correlation norm) plus the segment's start index.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .model import SegmentAnalysis, ensemble_moments, segment_analysis, to_db
from .moments import DictionaryStatistics
from .simulate import SystemModel, monte_carlo

__all__ = ["main", "run_experiment"]

_PROCESS_SHAPE = np.array([[1.25, 0.5], [0.5, 1.0]])


def _input_shape(system: str) -> np.ndarray:
    """Unit-variance shape of the input covariance (sigma^2 times this)."""
    return _PROCESS_SHAPE.copy() if system == "example2" else np.eye(1)


def _segment_stats(cfg: ExperimentConfig, k: int) -> DictionaryStatistics:
    """Ensemble dictionary statistics for segment k: matched elements share
    the segment's input covariance, the rest use the (single) mismatched
    block's scale on the same shape."""
    blocks = cfg.dictionary_spec[k]
    sigma = cfg.segments[k][1]
    shape = _input_shape(cfg.system)
    q = shape.shape[0]
    M = sum(count for count, _ in blocks)
    matched = sum(count for count, s in blocks if math.isclose(s, sigma, rel_tol=1e-9))
    mismatched = [s for _, s in blocks if not math.isclose(s, sigma, rel_tol=1e-9)]
    L = cfg.model_L[k] if cfg.model_L is not None else matched
    R_uu = sigma * sigma * shape
    R_tilde = (mismatched[0] ** 2) * shape if mismatched else R_uu.copy()
    return DictionaryStatistics(q=q, M=M, L=L, R_uu=R_uu, R_uu_tilde=R_tilde)


def _analyze_segments(cfg: ExperimentConfig):
    """Per-segment model analyses (moment estimation + transient model)."""
    system = SystemModel(cfg.system, cfg.noise_variance)
    analyses = []
    for k, (length, sigma) in enumerate(cfg.segments):
        stats = _segment_stats(cfg, k)
        d2, p_kd = ensemble_moments(
            system, sigma, stats, cfg.xi, cfg.moment_samples, cfg.mc_seed
        )
        analyses.append(segment_analysis(stats, cfg.xi, cfg.eta, d2, p_kd, length))
    return analyses


def _fmt(x: float, digits: int = 6) -> str:
    return f"{x:.{digits}f}"


def _write_curves(path: Path, mc, model_cols) -> None:
    n_total = mc.mse_db.shape[0]
    stride = math.ceil(n_total / 100_000) if n_total > 100_000 else 1
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("n,mse_db_mc,mse_db_model,dict_size_mean\n")
        for i in range(0, n_total, stride):
            model_val = "" if model_cols is None or model_cols[i] is None else _fmt(model_cols[i])
            handle.write(
                f"{i + 1},{_fmt(mc.mse_db[i])},{model_val},{_fmt(mc.dict_size[i], 4)}\n"
            )


def _write_summary(path: Path, final: SegmentAnalysis, final_start: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("J_min_db,J_ms_inf_db,J_ex_inf_db,n_eps,eta_max\n")
        if final is None:
            handle.write(",,,,\n")
            return
        j_min_db = _fmt(float(to_db(final.J_min)))
        eta_max = _fmt(final.eta_max)
        if final.unstable:
            handle.write(f"{j_min_db},unstable,unstable,unstable,{eta_max}\n")
            return
        n_eps = "not_reached" if final.n_eps is None else str(final_start + final.n_eps)
        handle.write(
            f"{j_min_db},{_fmt(float(to_db(final.J_ms_inf)))},"
            f"{_fmt(float(to_db(final.J_ex_inf)))},{n_eps},{eta_max}\n"
        )


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers: int = 1) -> dict:
    """Run the Monte Carlo (and, when enabled, the model) and write
    curves.csv + summary.csv. Returns the artifact paths, the analyses, and
    the Monte Carlo result."""
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    mc = monte_carlo(cfg, workers=workers)
    analyses = None
    model_cols = None
    final_start = 0
    if cfg.model_enabled:
        analyses = _analyze_segments(cfg)
        model_cols = []
        for analysis, (length, _) in zip(analyses, cfg.segments):
            if analysis.unstable:
                model_cols.extend([None] * length)
            else:
                model_cols.extend(analysis.curve_db.tolist())
        final_start = sum(length for length, _ in cfg.segments[:-1])
    curves_path = out / "curves.csv"
    summary_path = out / "summary.csv"
    _write_curves(curves_path, mc, model_cols)
    _write_summary(summary_path, analyses[-1] if analyses else None, final_start)
    return {
        "curves": curves_path,
        "summary": summary_path,
        "mc": mc,
        "analyses": analyses,
    }


def _workers_from_env():
    raw = os.environ.get("KLMSKIT_WORKERS", "").strip()
    if not raw:
        return 1, None
    try:
        workers = int(raw)
    except ValueError:
        return None, f"KLMSKIT_WORKERS must be an integer, got {raw!r}"
    if workers < 1:
        return None, "KLMSKIT_WORKERS must be at least 1"
    return workers, None


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        for message in exc.errors:
            print(f"config error: {message}", file=sys.stderr)
        return 2
    if args.runs is not None:
        if args.runs < 1:
            print("config error: --runs must be at least 1", file=sys.stderr)
            return 2
        cfg.mc_runs = args.runs
    if args.seed is not None:
        cfg.mc_seed = args.seed
    workers, problem = _workers_from_env()
    if problem:
        print(f"config error: {problem}", file=sys.stderr)
        return 2
    try:
        result = run_experiment(cfg, out_dir=args.out, workers=workers)
    except Exception as exc:  # numerical/runtime failure, not a config problem
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {result['curves']} and {result['summary']} "
          f"(runs={cfg.mc_runs}, seed={cfg.mc_seed})")
    analyses = result["analyses"]
    if analyses and analyses[-1].unstable:
        print("model unstable at this step size; summary records 'unstable'")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="klmskit",
        description="Kernel LMS experiments: Monte Carlo learning curves and "
        "the analytical transient model, driven by a config file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", help="run one experiment config")
    run_parser.add_argument("config", help="path to the experiment config file")
    run_parser.add_argument("--out", help="output directory (overrides output.path)")
    run_parser.add_argument("--runs", type=int, help="override mc.runs")
    run_parser.add_argument("--seed", type=int, help="override mc.seed")
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
