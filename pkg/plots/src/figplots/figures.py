"""Figure builders over the experiment tables.

Rendering is pinned for reproducibility: Agg backend, glyphs drawn as
paths, a fixed hash salt for SVG element ids, and no date stamp in the
output, so the same table always renders to the same bytes. Each
builder returns the matplotlib figure and axes so callers (and tests)
can inspect them before saving.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

from .io import SchemaError

KINDS = ("trajectory", "sweep_line", "heatmap", "runtime")

_STYLE = {
    "svg.hashsalt": "figplots",
    "svg.fonttype": "path",
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

_PALETTE = matplotlib.colormaps["tab10"].colors
_LINESTYLES = ("-", "--", "-.", ":")

# Legends stop being legible past a dozen entries; a full-dimension
# trajectory dump stays readable as unlabeled lines.
_LEGEND_CAP = 12


@dataclass(frozen=True)
class FigureSpec:
    """What to draw and where to put it."""

    kind: str
    input_csv: str
    output_path: str
    x_label: str | None = None
    y_label: str | None = None
    group_by: str = "estimator"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def _color(i: int):
    return _PALETTE[i % len(_PALETTE)]


def _new_axes():
    plt.rcParams.update(_STYLE)
    return plt.subplots()


def _require_columns(frame: pd.DataFrame, needed, path):
    missing = [c for c in needed if c not in frame.columns]
    if missing:
        have = ", ".join(frame.columns)
        raise SchemaError(f"missing column(s) {missing}, file has: {have}", path)


def _require_numeric(frame: pd.DataFrame, column: str, path):
    if len(frame) and not pd.api.types.is_numeric_dtype(frame[column]):
        raise SchemaError(f"column {column!r} is not numeric", path)


def _tick(value) -> str:
    return f"{value:g}" if isinstance(value, float) else str(value)


def render_trajectories(
    frame: pd.DataFrame, spec: FigureSpec, coordinates=None
) -> tuple[plt.Figure, plt.Axes]:
    """One line per (method, coordinate) pair, iteration on the x axis.

    coordinates None means every coordinate present in the table; an
    explicit empty selection yields an axes-only figure.
    """
    _require_columns(frame, ("method", "t", "coordinate", "value"), spec.input_csv)
    if coordinates is None:
        coords = sorted(frame["coordinate"].unique())
    else:
        coords = sorted(set(int(c) for c in coordinates))
    methods = sorted(frame["method"].unique())

    fig, ax = _new_axes()
    for mi, method in enumerate(methods):
        by_method = frame[frame["method"] == method]
        for ci, coord in enumerate(coords):
            sub = by_method[by_method["coordinate"] == coord].sort_values("t")
            if sub.empty:
                continue
            label = f"{method} c{coord}" if len(methods) > 1 else f"c{coord}"
            ax.plot(
                sub["t"],
                sub["value"],
                color=_color(ci),
                linestyle=_LINESTYLES[mi % len(_LINESTYLES)],
                label=label,
            )
    ax.set_xlabel(spec.x_label or "iteration")
    ax.set_ylabel(spec.y_label or "estimate")
    if 0 < len(ax.lines) <= _LEGEND_CAP:
        ax.legend()
    return fig, ax


def aggregate_sweep(
    frame: pd.DataFrame, x: str, y: str, group_by: str, median: bool = False
) -> pd.DataFrame:
    """Per-group center and bar extents of y along x.

    Default center is the mean with symmetric sample-standard-deviation
    bars (a single trial gives a zero-height bar, not a missing one).
    median=True centers on the median with interquartile bars.
    Returns a tidy frame: group, x, center, lo, hi, sorted by group then x.
    """
    rows = []
    for key, sub in frame.groupby(group_by, sort=True):
        grouped = sub.groupby(x, sort=True)[y]
        if median:
            center = grouped.median()
            lo = (center - grouped.quantile(0.25)).clip(lower=0.0)
            hi = (grouped.quantile(0.75) - center).clip(lower=0.0)
        else:
            center = grouped.mean()
            spread = grouped.std(ddof=1).fillna(0.0)
            lo = hi = spread
        for xv in center.index:
            rows.append((key, xv, center[xv], lo[xv], hi[xv]))
    return pd.DataFrame(rows, columns=[group_by, x, "center", "lo", "hi"])


def render_sweep(
    frame: pd.DataFrame, spec: FigureSpec, x: str, y: str, median: bool = False
) -> tuple[plt.Figure, plt.Axes]:
    """One error-barred series per group across the x column.

    kind "runtime" draws the same layout on log-log axes.
    """
    _require_columns(frame, (x, y, spec.group_by), spec.input_csv)
    _require_numeric(frame, x, spec.input_csv)
    _require_numeric(frame, y, spec.input_csv)

    agg = aggregate_sweep(frame, x, y, spec.group_by, median=median)
    fig, ax = _new_axes()
    for gi, (key, sub) in enumerate(agg.groupby(spec.group_by, sort=True)):
        ax.errorbar(
            sub[x],
            sub["center"],
            yerr=[sub["lo"], sub["hi"]],
            color=_color(gi),
            marker="o",
            capsize=3,
            label=str(key),
        )
    if spec.kind == "runtime":
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label or x)
    ax.set_ylabel(spec.y_label or y)
    if len(ax.containers):
        ax.legend()
    return fig, ax


def render_heatmap(
    frame: pd.DataFrame, spec: FigureSpec, x: str, y: str, median: bool = False
) -> tuple[plt.Figure, plt.Axes]:
    """Matrix of aggregated y over (group_by row, x column) cells."""
    _require_columns(frame, (x, y, spec.group_by), spec.input_csv)
    _require_numeric(frame, y, spec.input_csv)

    grouped = frame.groupby([spec.group_by, x], sort=True)[y]
    cells = grouped.median() if median else grouped.mean()
    matrix = cells.unstack(x)  # missing cells stay NaN and render blank

    fig, ax = _new_axes()
    ax.grid(False)
    image = ax.imshow(matrix.to_numpy(), origin="lower", aspect="auto")
    ax.set_xticks(range(matrix.shape[1]), [_tick(v) for v in matrix.columns])
    ax.set_yticks(range(matrix.shape[0]), [_tick(v) for v in matrix.index])
    ax.set_xlabel(spec.x_label or x)
    ax.set_ylabel(spec.y_label or spec.group_by)
    fig.colorbar(image, ax=ax, label=y)
    return fig, ax


def save_figure(fig: plt.Figure, path, png: bool = False) -> None:
    """Write SVG by default, PNG on request, then release the figure.

    The SVG carries no date stamp, so rerendering identical input gives
    identical bytes.
    """
    if png:
        fig.savefig(path, format="png")
    else:
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
