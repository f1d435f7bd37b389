"""Shared fixtures: small CSV tables generated through the experiment CLI.

The plotting package treats the CSV files as its entire interface, so
fixtures produce them the same way users do, by invoking the installed
experiment CLI in a subprocess. Session scope keeps it to one
generation per table kind.
"""

import subprocess
import sys

import pytest


def run_primary(*argv, cwd, timeout=300):
    proc = subprocess.run(
        [sys.executable, "-m", "sparsemom.cli", *argv],
        capture_output=True,
        text=True,
        cwd=cwd,
        timeout=timeout,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def results_csv(tmp_path_factory):
    """Epsilon sweep, two estimators, three trials per point."""
    root = tmp_path_factory.mktemp("results")
    cfg = root / "sweep.cfg"
    cfg.write_text(
        "d = 20\n"
        "mean_entries = 0:10, 1:-5\n"
        "n = 200\n"
        "estimators = stage1, coord_mom\n"
        "iterations = 50\n"
        "sweep = epsilon\n"
        "sweep_values = 0.05, 0.1\n"
        "trials = 3\n"
        "base_seed = 5\n"
    )
    run_primary("run", "--config", str(cfg), "--out", str(root / "out"), cwd=root)
    return root / "out" / "results.csv"


@pytest.fixture(scope="session")
def trace_csv(tmp_path_factory):
    """No-sweep trace with two iterating methods and two coordinates."""
    root = tmp_path_factory.mktemp("trace")
    cfg = root / "trace.cfg"
    cfg.write_text(
        "d = 10\n"
        "mean_entries = 0:8, 1:4\n"
        "n = 100\n"
        "estimators = stage1, convex\n"
        "iterations = 30\n"
        "trials = 1\n"
        "base_seed = 9\n"
    )
    run_primary(
        "trace", "--config", str(cfg), "--out", str(root / "out"), "--coords", "0,1",
        cwd=root,
    )
    return root / "out" / "trace.csv"


@pytest.fixture(scope="session")
def bench_csv(tmp_path_factory):
    """Two-dimension timing table."""
    root = tmp_path_factory.mktemp("bench")
    cfg = root / "bench.cfg"
    cfg.write_text(
        "d = 50\n"
        "mean_entries = 0:8\n"
        "n = 200\n"
        "estimators = stage1, full\n"
        "iterations = 50\n"
        "sweep = d\n"
        "sweep_values = 50, 100\n"
        "trials = 1\n"
        "base_seed = 3\n"
    )
    run_primary(
        "bench", "--config", str(cfg), "--out", str(root / "out"), "--repeats", "1",
        cwd=root,
    )
    return root / "out" / "bench.csv"
