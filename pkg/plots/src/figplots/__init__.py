"""Figure rendering for the experiment CSV tables.

Consumes results.csv, trace.csv, and bench.csv files through their
declared schemas and renders trajectory, sweep, heatmap, and runtime
figures deterministically. This package never imports the estimation
library; the CSV files are the entire interface.
"""

__version__ = "0.1.0"

from .figures import (
    KINDS,
    FigureSpec,
    aggregate_sweep,
    render_heatmap,
    render_sweep,
    render_trajectories,
    save_figure,
)
from .io import (
    BENCH,
    END_MARKER,
    RESULTS,
    SCHEMAS,
    TRACE,
    Column,
    SchemaError,
    TableSchema,
    load_table,
    load_trace,
)

__all__ = [
    "__version__",
    "KINDS",
    "FigureSpec",
    "aggregate_sweep",
    "render_heatmap",
    "render_sweep",
    "render_trajectories",
    "save_figure",
    "BENCH",
    "END_MARKER",
    "RESULTS",
    "SCHEMAS",
    "TRACE",
    "Column",
    "SchemaError",
    "TableSchema",
    "load_table",
    "load_trace",
]
