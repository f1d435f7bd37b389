"""Script front ends: plot_trajectories and plot_sweep.

Both read one CSV table, render one figure, and write one image file.
Exit codes: 0 on success, 2 on a bad argument or a malformed input
table (the error names the file, line, and problem).
"""

from __future__ import annotations

import argparse
import sys

from .figures import (
    FigureSpec,
    render_heatmap,
    render_sweep,
    render_trajectories,
    save_figure,
)
from .io import SchemaError, load_table, load_trace


def _parse_coords(text: str):
    items = [part.strip() for part in text.split(",")]
    try:
        return tuple(int(part) for part in items if part)
    except ValueError:
        raise SchemaError(f"--coords expects integers, got {text!r}", "<args>") from None


def _image_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--png", action="store_true", help="write PNG instead of SVG")
    parser.add_argument("--xlabel", default=None, help="x axis label override")
    parser.add_argument("--ylabel", default=None, help="y axis label override")


def main_trajectories(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_trajectories",
        description="Per-coordinate estimate paths from a trace table.",
    )
    parser.add_argument("trace_csv", help="input trace.csv")
    parser.add_argument("output", help="output image path")
    parser.add_argument(
        "--coords",
        default=None,
        help="comma-separated coordinate subset; empty selects none (axes only)",
    )
    parser.add_argument("--method", default=None, help="restrict to one method's rows")
    _image_flags(parser)
    args = parser.parse_args(argv)

    try:
        frame = load_trace(args.trace_csv)
        if args.method is not None:
            present = sorted(frame["method"].unique())
            if args.method not in present:
                raise SchemaError(
                    f"method {args.method!r} not in file, has: {', '.join(present)}",
                    args.trace_csv,
                )
            frame = frame[frame["method"] == args.method]
        coords = None if args.coords is None else _parse_coords(args.coords)
        spec = FigureSpec(
            kind="trajectory",
            input_csv=args.trace_csv,
            output_path=args.output,
            x_label=args.xlabel,
            y_label=args.ylabel,
        )
        fig, _ = render_trajectories(frame, spec, coordinates=coords)
        save_figure(fig, args.output, png=args.png)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output}")
    return 0


def main_sweep(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_sweep",
        description="Aggregated series per estimator across a sweep column.",
    )
    parser.add_argument("results_csv", help="input results.csv or bench.csv")
    parser.add_argument("output", help="output image path")
    parser.add_argument("--x", required=True, help="sweep column for the x axis")
    parser.add_argument("--y", required=True, help="metric column to aggregate")
    parser.add_argument(
        "--group-by", default="estimator", help="one series per value of this column"
    )
    parser.add_argument(
        "--median",
        action="store_true",
        help="median center with interquartile bars (default: mean with std bars)",
    )
    parser.add_argument(
        "--kind",
        choices=("line", "heatmap", "runtime"),
        default="line",
        help="line chart, cell matrix, or log-log line chart",
    )
    _image_flags(parser)
    args = parser.parse_args(argv)

    kind = {"line": "sweep_line", "heatmap": "heatmap", "runtime": "runtime"}[args.kind]
    try:
        _, frame = load_table(args.results_csv)
        spec = FigureSpec(
            kind=kind,
            input_csv=args.results_csv,
            output_path=args.output,
            x_label=args.xlabel,
            y_label=args.ylabel,
            group_by=args.group_by,
        )
        if kind == "heatmap":
            fig, _ = render_heatmap(frame, spec, args.x, args.y, median=args.median)
        else:
            fig, _ = render_sweep(frame, spec, args.x, args.y, median=args.median)
        save_figure(fig, args.output, png=args.png)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output}")
    return 0
