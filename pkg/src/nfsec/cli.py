"""Experiment driver: scheme-by-sweep grids with figure-ready CSV output.

For every (sweep value, scheme) pair the driver synthesizes a beamformer,
evaluates it, and appends one row to ``results.csv``. Per-iteration
objective trajectories go to ``trajectory.csv``; a beam-pattern grid per
scheme (at the first sweep point) goes to ``beampattern_<scheme>.csv``; and
the fully resolved configuration is echoed to ``config_echo.json``.

Numeric CSV content is deterministic for a fixed config and seed (fixed
9-significant-digit formatting, deterministic solver); the trailing wall
time column is the one diagnostic that varies between runs.

Exit codes: 0 on success, 1 on a configuration error, 2 when the solver
failed on every point.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    ScenarioConfig,
    apply_sweep_value,
    config_to_dict,
    load_config,
    to_scenario,
)
from .evaluation import beam_pattern, evaluate
from .optimizer import Scheme, SolveOptions, SolverFailure, solve_scheme

_FMT = "{:.8e}"  # 9 significant digits


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return _FMT.format(float(x))


@dataclass
class PointResult:
    sweep_value: float | None
    scheme: str
    status: str
    iterations: int
    sum_rate: float
    bob_rates: list[float]
    eve_leakage: list[float]  # per eve: max over users of worst-case |a^H w|^2
    secure_probability: float
    secure_probability_disc: float
    trajectory: list[float]
    wall_time: float
    pattern: np.ndarray | None = None


def _solve_options(cfg: ScenarioConfig) -> SolveOptions:
    return SolveOptions(
        sampling_points=cfg.sampling_points,
        bound_grid=cfg.grid_resolution,
        cell_bound_grid=max(50, cfg.grid_resolution // 4),
    )


def run_point(
    cfg: ScenarioConfig, scheme: str, sweep_value: float | None, with_pattern: bool
) -> PointResult:
    """Solve and evaluate one (config, scheme) point."""
    scenario = to_scenario(cfg)
    try:
        report = solve_scheme(scenario, Scheme(scheme), _solve_options(cfg))
    except SolverFailure:
        return PointResult(
            sweep_value=sweep_value, scheme=scheme, status="solver_error",
            iterations=0, sum_rate=float("nan"), bob_rates=[float("nan")] * scenario.n_bobs,
            eve_leakage=[float("nan")] * scenario.n_eves, secure_probability=float("nan"),
            secure_probability_disc=float("nan"), trajectory=[], wall_time=0.0,
        )
    ev = evaluate(
        report.beamformers, scenario,
        trials=cfg.trials, seed=cfg.seed, resolution=cfg.grid_resolution,
    )
    pattern = None
    if with_pattern:
        spec = cfg.beampattern
        pattern = beam_pattern(
            report.beamformers, tuple(spec.x), tuple(spec.y), spec.resolution,
            scenario.geometry,
        )
    return PointResult(
        sweep_value=sweep_value,
        scheme=scheme,
        status=report.status,
        iterations=report.iterations,
        sum_rate=ev.sum_rate,
        bob_rates=ev.bob_rates,
        eve_leakage=[float(ev.worst_leakage[m].max()) for m in range(scenario.n_eves)],
        secure_probability=ev.secure_probability,
        secure_probability_disc=ev.secure_probability_disc,
        trajectory=report.trajectory,
        wall_time=report.wall_time,
        pattern=pattern,
    )


def _run_point_task(args: tuple) -> PointResult:
    cfg_dict, scheme, sweep_value, with_pattern = args
    from .config import config_from_dict

    return run_point(config_from_dict(cfg_dict), scheme, sweep_value, with_pattern)


def _write_results_csv(path: Path, results: list[PointResult], cfg: ScenarioConfig) -> None:
    k = len(cfg.bob_locations)
    m = len(cfg.eve_locations)
    sweep_name = cfg.sweep.parameter if cfg.sweep else "none"
    header = (
        ["sweep_parameter", "sweep_value", "scheme", "status", "iterations", "sum_rate_bps_hz"]
        + [f"bob{i}_rate_bps_hz" for i in range(k)]
        + [f"eve{j}_worst_leakage" for j in range(m)]
        + ["secure_probability", "secure_probability_disc", "wall_time_s"]
    )
    lines = [",".join(header)]
    for r in results:
        row = [
            sweep_name,
            _num(r.sweep_value) if r.sweep_value is not None else "none",
            r.scheme,
            r.status,
            str(r.iterations),
            _num(r.sum_rate),
            *[_num(v) for v in r.bob_rates],
            *[_num(v) for v in r.eve_leakage],
            _num(r.secure_probability),
            _num(r.secure_probability_disc),
            _num(r.wall_time),
        ]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _write_trajectory_csv(path: Path, results: list[PointResult], cfg: ScenarioConfig) -> None:
    sweep_name = cfg.sweep.parameter if cfg.sweep else "none"
    lines = ["sweep_parameter,sweep_value,scheme,iteration,sum_rate_bps_hz"]
    for r in results:
        for i, v in enumerate(r.trajectory):
            sv = _num(r.sweep_value) if r.sweep_value is not None else "none"
            lines.append(f"{sweep_name},{sv},{r.scheme},{i},{_num(v)}")
    path.write_text("\n".join(lines) + "\n")


def _write_pattern_csv(path: Path, pattern: np.ndarray, cfg: ScenarioConfig) -> None:
    spec = cfg.beampattern
    xs = np.linspace(spec.x[0], spec.x[1], spec.resolution)
    ys = np.linspace(spec.y[0], spec.y[1], spec.resolution)
    lines = ["x_m,y_m,gain"]
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            lines.append(f"{_num(x)},{_num(y)},{_num(pattern[i, j])}")
    path.write_text("\n".join(lines) + "\n")


def run(cfg: ScenarioConfig, out_dir: str | Path, jobs: int = 1) -> int:
    """Execute the full scheme-by-sweep grid; returns the process exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    schemes = [s.value for s in Scheme] if cfg.scheme == "all" else [cfg.scheme]
    sweep_values: list[float | None] = list(cfg.sweep.values) if cfg.sweep else [None]

    tasks = []
    for vi, value in enumerate(sweep_values):
        point_cfg = apply_sweep_value(cfg, cfg.sweep.parameter, value) if value is not None else cfg
        for scheme in schemes:
            tasks.append((config_to_dict(point_cfg), scheme, value, vi == 0))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point_task, tasks))
    else:
        results = [_run_point_task(t) for t in tasks]

    _write_results_csv(out / "results.csv", results, cfg)
    _write_trajectory_csv(out / "trajectory.csv", results, cfg)
    for r in results:
        if r.pattern is not None:
            _write_pattern_csv(out / f"beampattern_{r.scheme}.csv", r.pattern, cfg)
    echo = {"config": config_to_dict(cfg), "solver_options": _solve_options(cfg).as_dict()}
    (out / "config_echo.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")

    failed = sum(1 for r in results if r.status == "solver_error")
    return 2 if failed == len(results) else 0


def apply_ci_preset(cfg: ScenarioConfig) -> ScenarioConfig:
    """Desk-scale preset: 64 elements, 2000 trials, 200-point grids."""
    return replace(cfg, n_elements=64, trials=2000, grid_resolution=200)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfsec",
        description="Robust near-field secure beamforming experiments",
    )
    parser.add_argument("--config", required=True, help="path to a JSON scenario config")
    parser.add_argument("--scheme", default=None,
                        help="scheme name or 'all' (overrides the config)")
    parser.add_argument("--seed", type=int, default=None, help="Monte-Carlo seed override")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials override")
    parser.add_argument("--grid", type=int, default=None,
                        help="evaluation grid resolution override")
    parser.add_argument("--preset", choices=["ci"], default=None,
                        help="'ci' shrinks the run to desk scale (N=64)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.preset == "ci":
            cfg = apply_ci_preset(cfg)
        overrides: dict = {}
        if args.scheme is not None:
            valid = [s.value for s in Scheme] + ["all"]
            if args.scheme not in valid:
                raise ConfigError("scheme", f"must be one of {valid}")
            overrides["scheme"] = args.scheme
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.grid is not None:
            overrides["grid_resolution"] = args.grid
        if overrides:
            cfg = replace(cfg, **overrides)
        from .config import validate_config

        validate_config(cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return run(cfg, args.out, jobs=args.jobs)


if __name__ == "__main__":
    sys.exit(main())
