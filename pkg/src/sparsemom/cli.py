"""Command-line entry point.

Subcommands::

    sparsemom run      --config exp.cfg [--out DIR] [--threads N] [--seed U64]
    sparsemom trace    --config exp.cfg [--out DIR] [--seed U64] [--coords 0,1,2]
    sparsemom bench    --config exp.cfg [--out DIR] [--seed U64] [--repeats N]
    sparsemom validate --config exp.cfg

Exit codes: 0 success; 2 the config file (or a flag) failed to parse or
validate; 3 an error during execution.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import load_config
from .errors import ConfigError
from .runner import run_bench, run_experiment, run_trace


def _u64(text: str) -> int:
    value = int(text)
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _coords(text: str) -> list[int]:
    try:
        return [int(piece) for piece in text.split(",") if piece.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated integer list") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsemom",
        description="Robust sparse mean estimation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=None, help="output directory (default: config out_dir)")
        p.add_argument("--seed", type=_u64, default=None, help="override base_seed")

    run_p = sub.add_parser("run", help="execute the trial grid, write results.csv")
    common(run_p)
    run_p.add_argument("--threads", type=_positive, default=1, help="worker threads")

    trace_p = sub.add_parser("trace", help="per-iteration trajectories, write trace.csv")
    common(trace_p)
    trace_p.add_argument(
        "--coords", type=_coords, default=None, help="coordinates to record (default: all)"
    )

    bench_p = sub.add_parser("bench", help="time stage1/full across a d sweep")
    common(bench_p)
    bench_p.add_argument("--repeats", type=_positive, default=3, help="timing repeats, best kept")

    val_p = sub.add_parser("validate", help="parse and check the config, run nothing")
    val_p.add_argument("--config", required=True, help="experiment config file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        sweep = "none" if cfg.sweep == "none" else f"{cfg.sweep} x{len(cfg.sweep_values)}"
        print(
            f"config ok: d={cfg.mean.dimension} k={cfg.mean.k} sweep={sweep} "
            f"estimators={','.join(cfg.estimators)} trials={cfg.trials} "
            f"planned_runs={cfg.planned_runs()}"
        )
        return 0

    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    out_dir = args.out if args.out is not None else cfg.out_dir

    try:
        if args.command == "run":
            rows = run_experiment(cfg, out_dir, threads=args.threads)
            print(f"wrote {len(rows)} rows to {out_dir}/results.csv")
        elif args.command == "trace":
            written = run_trace(cfg, args.coords, out_dir)
            print(f"wrote {written} rows to {out_dir}/trace.csv")
        elif args.command == "bench":
            timed = run_bench(cfg, out_dir, repeats=args.repeats)
            print(f"wrote {len(timed)} timings to {out_dir}/bench.csv")
    except Exception as exc:  # noqa: BLE001 - boundary: map anything to exit 3
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
