"""Seeded trial grids and their CSV/JSON outputs.

Reproducibility contract: every trial's seed is derived as
mix64(base_seed, sweep_index, trial_index), and each estimator folds its own
name into that seed. Adding an estimator to the roster or rerunning a subset
of trials therefore never changes anyone else's draws. Output row order is
canonical (sweep point, then roster order, then trial) no matter how the
worker pool schedules things, so equal configs give byte-equal CSV files.

Every CSV ends with a lone `# end` line; a file without it was cut short.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, PointSpec
from .contamination import apply_contamination
from .errors import ParameterError
from .pipeline import EstimateReport, evaluate, run_estimator
from .rng import mix64, mix64_str
from .sampling import SampleMatrix, sample_inliers

RESULTS_SCHEMA = "sparsemom-results-v1"
TRACE_SCHEMA = "sparsemom-trace-v1"
BENCH_SCHEMA = "sparsemom-bench-v1"
END_MARKER = "# end"

RESULTS_HEADER = (
    "sweep_param",
    "sweep_value",
    "estimator",
    "trial",
    "seed",
    "n",
    "d",
    "l2_error",
    "linf_error",
    "success_rate",
    "support_size",
)

_DATA_STREAM = 0xDA7A
_CORRUPT_STREAM = 0xC0DE


@dataclass(frozen=True)
class ResultRow:
    sweep_param: str
    sweep_value: object  # int or float depending on the axis
    estimator: str
    trial: int
    seed: int
    n: int
    d: int
    l2_error: float
    linf_error: float
    success_rate: float
    support_size: int

    def csv_fields(self) -> list[str]:
        return [
            self.sweep_param,
            _fmt(self.sweep_value),
            self.estimator,
            str(self.trial),
            str(self.seed),
            str(self.n),
            str(self.d),
            _fmt(self.l2_error),
            _fmt(self.linf_error),
            _fmt(self.success_rate),
            str(self.support_size),
        ]


def _fmt(value) -> str:
    """Canonical number text: ints bare, floats via shortest round-trip repr."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def trial_seed(base_seed: int, sweep_idx: int, trial_idx: int) -> int:
    return mix64(base_seed, sweep_idx, trial_idx)


def make_trial_data(cfg: ExperimentConfig, point: PointSpec, seed: int) -> SampleMatrix:
    samples = sample_inliers(
        point.distribution, point.mean, point.n, mix64(seed, _DATA_STREAM)
    )
    if point.contamination is not None:
        samples = apply_contamination(samples, point.contamination, mix64(seed, _CORRUPT_STREAM))
    return samples


def run_trial(
    cfg: ExperimentConfig,
    point: PointSpec,
    sweep_idx: int,
    trial_idx: int,
    trace_every: int | None = None,
) -> list[tuple[str, int, EstimateReport]]:
    """All roster estimators on one seeded dataset: [(name, seed, report), ...]."""
    seed = trial_seed(cfg.base_seed, sweep_idx, trial_idx)
    samples = make_trial_data(cfg, point, seed)
    sigma2 = cfg.point_sigma2(point)
    out = []
    for name in cfg.estimators:
        est_seed = mix64_str(seed, name)
        started = time.perf_counter()
        estimate, support, trace = run_estimator(
            samples,
            cfg.kind_for(name),
            cfg.subgroup_rule,
            cfg.subgm_for(name, trace_every=trace_every),
            point.epsilon,
            est_seed,
            sigma2=sigma2,
        )
        elapsed = time.perf_counter() - started
        report = evaluate(estimate, support, point.mean)
        report.wall_time = elapsed
        report.trace = trace
        out.append((name, seed, report))
    return out


def _write_csv_line(handle, fields):
    handle.write(",".join(fields) + "\n")


def run_experiment(cfg: ExperimentConfig, out_dir: str, threads: int = 1) -> list[ResultRow]:
    """Execute the full grid; writes results.csv and manifest.json under out_dir."""
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    points = [(value, cfg.resolve_point(value)) for value in cfg.sweep_points()]

    rows: list[ResultRow] = []
    path = out / "results.csv"
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# {RESULTS_SCHEMA}\n")
        _write_csv_line(handle, RESULTS_HEADER)

        def emit_point(sweep_idx: int, value, point: PointSpec, per_trial):
            # per_trial[t] holds roster-ordered reports; write sorted by
            # (estimator roster position, trial) for a canonical file.
            for est_idx, name in enumerate(cfg.estimators):
                for t_idx in range(cfg.trials):
                    est_name, seed, report = per_trial[t_idx][est_idx]
                    row = ResultRow(
                        sweep_param=cfg.sweep,
                        sweep_value=value,
                        estimator=est_name,
                        trial=t_idx,
                        seed=seed,
                        n=point.n,
                        d=point.mean.dimension,
                        l2_error=report.l2_error,
                        linf_error=report.linf_error,
                        success_rate=report.success_rate,
                        support_size=int(report.support.size),
                    )
                    rows.append(row)
                    _write_csv_line(handle, row.csv_fields())
            handle.flush()

        if threads == 1:
            for sweep_idx, (value, point) in enumerate(points):
                per_trial = [
                    run_trial(cfg, point, sweep_idx, t) for t in range(cfg.trials)
                ]
                emit_point(sweep_idx, value, point, per_trial)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [
                    [
                        pool.submit(run_trial, cfg, point, sweep_idx, t)
                        for t in range(cfg.trials)
                    ]
                    for sweep_idx, (value, point) in enumerate(points)
                ]
                for sweep_idx, (value, point) in enumerate(points):
                    per_trial = [f.result() for f in futures[sweep_idx]]
                    emit_point(sweep_idx, value, point, per_trial)
        handle.write(END_MARKER + "\n")

    _write_manifest(cfg, out, command="run", threads=threads)
    return rows


def run_trace(cfg: ExperimentConfig, coordinates, out_dir: str) -> int:
    """Per-iteration trajectories at a single sweep point; returns rows written.

    Only estimators that iterate (stage1, full, convex) contribute rows.
    """
    values = cfg.sweep_points()
    if len(values) != 1:
        raise ParameterError("trace needs a single sweep point, got a sweep")
    point = cfg.resolve_point(values[0])
    d = point.mean.dimension
    if coordinates is None:
        coords = np.arange(d, dtype=np.intp)
    else:
        coords = np.asarray(sorted(int(c) for c in coordinates), dtype=np.intp)
        if coords.size == 0:
            raise ParameterError("empty coordinate list")
        if coords[0] < 0 or coords[-1] >= d:
            raise ParameterError(f"trace coordinate out of range for d={d}")

    reports = run_trial(cfg, point, 0, 0, trace_every=1)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    with open(out / "trace.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# {TRACE_SCHEMA}\n")
        _write_csv_line(handle, ("method", "t", "coordinate", "value", "beta"))
        for name, _seed, report in reports:
            if report.trace is None:
                continue
            trace = report.trace
            for t, estimate, beta in zip(trace.times, trace.estimates, trace.betas):
                for c in coords:
                    _write_csv_line(
                        handle,
                        (name, str(t), str(int(c)), _fmt(estimate[c]), _fmt(beta[c])),
                    )
                    written += 1
        handle.write(END_MARKER + "\n")
    _write_manifest(cfg, out, command="trace", threads=1)
    return written


def run_bench(cfg: ExperimentConfig, out_dir: str, repeats: int = 3) -> list[tuple]:
    """Wall time of stage1 and full across the config's d sweep (best of repeats)."""
    if cfg.sweep != "d":
        raise ParameterError("bench needs sweep = d with ascending sweep_values")
    dims = list(cfg.sweep_values)
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ParameterError("bench dimensions must be strictly ascending")
    if repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {repeats}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timed = []
    for sweep_idx, value in enumerate(dims):
        point = cfg.resolve_point(value)
        seed = trial_seed(cfg.base_seed, sweep_idx, 0)
        samples = make_trial_data(cfg, point, seed)
        sigma2 = cfg.point_sigma2(point)
        for name in ("stage1", "full"):
            est_seed = mix64_str(seed, name)
            best = float("inf")
            for _ in range(repeats):
                started = time.perf_counter()
                run_estimator(
                    samples,
                    cfg.kind_for(name),
                    cfg.subgroup_rule,
                    cfg.subgm_for(name),
                    point.epsilon,
                    est_seed,
                    sigma2=sigma2,
                )
                best = min(best, time.perf_counter() - started)
            timed.append((int(value), point.n, name, best * 1e3))
    with open(out / "bench.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# {BENCH_SCHEMA}\n")
        _write_csv_line(handle, ("d", "n", "estimator", "wall_time_ms"))
        for d, n, name, ms in timed:
            _write_csv_line(handle, (str(d), str(n), name, _fmt(ms)))
        handle.write(END_MARKER + "\n")
    _write_manifest(cfg, out, command="bench", threads=1)
    return timed


def _manifest_dict(cfg: ExperimentConfig) -> dict:
    rule = {"kind": cfg.subgroup_rule.kind}
    if cfg.subgroup_rule.kind == "fixed":
        rule["fixed_j"] = cfg.subgroup_rule.fixed_j
    return {
        "distribution": {"family": cfg.distribution.family, "param": cfg.distribution.param},
        "mean": {
            "dimension": cfg.mean.dimension,
            "entries": [[int(i), float(v)] for i, v in cfg.mean.entries],
        },
        "n": cfg.n,
        "n_per_k": cfg.n_per_k,
        "epsilon": cfg.epsilon,
        "contamination": cfg.contamination,
        "bias_shift": cfg.bias_shift,
        "outlier_location": cfg.outlier_location,
        "outlier_scale": cfg.outlier_scale,
        "point_mass_value": cfg.point_mass_value,
        "estimators": list(cfg.estimators),
        "alpha": cfg.alpha,
        "eta": cfg.eta,
        "iterations": cfg.iterations,
        "support_multiplier": cfg.support_multiplier,
        "subgroup_rule": rule,
        "stage2": cfg.stage2,
        "filter_max_rounds": cfg.filter_max_rounds,
        "filter_quantile": cfg.filter_quantile,
        "sigma2": cfg.sigma2,
        "convex_eta": cfg.convex_eta,
        "convex_iterations": cfg.convex_iterations,
        "sweep": cfg.sweep,
        "sweep_values": list(cfg.sweep_values),
        "mean_fill": cfg.mean_fill,
        "trials": cfg.trials,
        "base_seed": cfg.base_seed,
    }


def _write_manifest(cfg: ExperimentConfig, out: Path, command: str, threads: int):
    manifest = {
        "schema": "sparsemom-manifest-v1",
        "version": __version__,
        "command": command,
        "threads": threads,
        "planned_runs": cfg.planned_runs(),
        "config": _manifest_dict(cfg),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
