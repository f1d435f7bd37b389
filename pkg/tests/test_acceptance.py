"""Acceptance gate: one end-to-end check per shipped guarantee.

Every test drives the public API (or the installed CLI) on a pinned
instance and records a single [PASS]/[FAIL] line through the
criterion_report fixture in conftest. The tolerance constants below are
the contract for this suite; loosening them to make a red line green
defeats the point.

Criterion 03's half-crossing clause is a known failure on this instance:
the heavy-tailed noise floor saturates the subgroup sign statistic for
all four spikes at once, so their growth rates carry no magnitude
information and the crossing times land in noise order. The test reports
that honestly instead of widening the window.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import sparsemom as sm
from sparsemom.config import load_config
from sparsemom.densefilter import IterativeFilter
from sparsemom.pipeline import Full, Stage1Only, evaluate, run_estimator
from sparsemom.rng import mix64
from sparsemom.runner import run_bench
from sparsemom.subgm import FactoredIterate, SubgmConfig, subgm_step

CONFIG_DIR = Path(__file__).resolve().parent.parent / "scripts" / "configs"

# Fallback mean used by most experiment instances: four spikes in d=100.
DEFAULT_MEAN = sm.SparseMeanSpec(
    dimension=100, entries=((0, 10.0), (1, -5.0), (2, -4.0), (3, 2.0))
)

# 01: exact agreement over random small instances
MOM_INSTANCES = 1000
MOM_LIMIT_S = 5.0

# 02: central differences against the actual update step
FD_ITERATES = 100
FD_STEP = 1e-6
FD_REL_TOL = 1e-4
FD_KINK_GAP = 1e-3
FD_LIMIT_S = 10.0

# 03/04: heavy-tailed trajectory instance, ten seeds
SPIKE_VALUES = np.array([5.0, 2.0, 2.0, 1.5])
TRAJ_SEEDS = 10
TRAJ_SIGNAL_TOL = 1.0
TRAJ_RESIDUAL_TOL = 1e-4
TRAJ_SEEDS_NEEDED = 9
TRAJ_LIMIT_S = 60.0
CONVEX_RESIDUAL_FLOOR = 1e-2
CONVEX_COORDS_NEEDED = 50
CONVEX_LIMIT_S = 60.0

# 05: support recovery across contamination levels
SUCCESS_EPS_GRID = (0.05, 0.1, 0.2, 0.3)
SUCCESS_TRIALS = 50
SUCCESS_LIMIT_S = 300.0

# 06: error growth in the support size
SPARSITY_KS = (4, 8, 16)
SPARSITY_TRIALS = 10
STAGE1_RATIO_MIN = 1.5
FULL_RATIO_MAX = 1.3
SPARSITY_LIMIT_S = 300.0

# 07: one-dimensional deviation bound
MOM_BOUND_TRIALS = 200
MOM_BOUND_FRACTION = 0.9
MOM_BOUND_LIMIT_S = 120.0

# 08: sign-statistic windows at two evaluation offsets
SIGN_TRIALS = 100
SIGN_N = 1_000_000
SIGN_HI_WINDOW = (0.6, 1.0)
SIGN_LO_BAND = 0.08
SIGN_LIMIT_S = 180.0

# 09: support recovery without a variance
INF_VAR_TRIALS = 10
INF_VAR_SUCCESS = 0.9
INF_VAR_LIMIT_S = 120.0

# 10: thread-count determinism on the shipped sweep config
DETERMINISM_LIMIT_S = 300.0

# 11: wall-time growth from d=500 to d=2000
BENCH_RATIO_WINDOW = (2.0, 6.0)
BENCH_LIMIT_S = 120.0


def _sort_select(values) -> float:
    """Reference median: sort a Python list, pick the middle element(s)."""
    ordered = sorted(float(x) for x in values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def test_mom_matches_sort_select_reference(criterion_report):
    start = time.perf_counter()
    rng = np.random.default_rng(mix64(55))
    mismatches = 0
    for _ in range(MOM_INSTANCES):
        n = int(rng.integers(1, 31))
        j = int(rng.integers(1, min(7, n) + 1))
        d = int(rng.integers(1, 5))
        data = rng.normal(0.0, 3.0, size=(n, d))
        plan = sm.make_plan(n, sm.SubgroupRule.fixed(j))
        means = sm.subgroup_means(sm.SampleMatrix(data=data), plan)
        # the grouping layout itself, re-derived with plain Python sums
        base, extra = divmod(n, j)
        sizes = [base + 1] * extra + [base] * (j - extra)
        start_row = 0
        for g, size in enumerate(sizes):
            block = data[start_row : start_row + size]
            for c in range(d):
                avg = sum(float(x) for x in block[:, c]) / size
                if abs(avg - means.means[g, c]) > 1e-12:
                    mismatches += 1
            start_row += size
        vec = sm.mom_coordinatewise(means)
        for c in range(d):
            expected = _sort_select(means.means[:, c])
            if sm.mom_1d(means.means[:, c]) != expected or vec[c] != expected:
                mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < MOM_LIMIT_S
    criterion_report(
        1,
        ok,
        f"median-of-means vs sort-select reference on {MOM_INSTANCES} instances: "
        f"{mismatches} mismatches (need 0); {elapsed:.1f}s of {MOM_LIMIT_S:.0f}s",
    )


def test_update_direction_matches_finite_differences(criterion_report):
    start = time.perf_counter()
    rng = np.random.default_rng(mix64(56))
    eta = 0.05
    worst = 0.0
    for _ in range(FD_ITERATES):
        while True:
            rows = rng.normal(0.0, 2.0, size=(7, 5))
            u = rng.uniform(0.5, 1.5, size=5)
            v = rng.uniform(0.5, 1.5, size=5)
            # keep every group mean clear of the |.| kink at u^2 - v^2
            gap = np.abs(rows - (u * u - v * v)[None, :]).min()
            if gap > FD_KINK_GAP:
                break
        plan = sm.make_plan(7, sm.SubgroupRule.fixed(7))
        means = sm.subgroup_means(sm.SampleMatrix(data=rows), plan)
        stepped = subgm_step(FactoredIterate(u=u.copy(), v=v.copy()), means, eta)
        delta_u = stepped.u - u
        delta_v = stepped.v - v
        fd_u = np.empty(5)
        fd_v = np.empty(5)
        for i in range(5):
            up, um = u.copy(), u.copy()
            up[i] += FD_STEP
            um[i] -= FD_STEP
            fd_u[i] = (
                sm.factored_l1_loss(up, v, means) - sm.factored_l1_loss(um, v, means)
            ) / (2 * FD_STEP)
            vp, vm = v.copy(), v.copy()
            vp[i] += FD_STEP
            vm[i] -= FD_STEP
            fd_v[i] = (
                sm.factored_l1_loss(u, vp, means) - sm.factored_l1_loss(u, vm, means)
            ) / (2 * FD_STEP)
        rel_u = np.abs(delta_u + eta * fd_u) / np.abs(delta_u)
        rel_v = np.abs(delta_v + eta * fd_v) / np.abs(delta_v)
        worst = max(worst, float(rel_u.max()), float(rel_v.max()))
    elapsed = time.perf_counter() - start
    ok = worst <= FD_REL_TOL and elapsed < FD_LIMIT_S
    criterion_report(
        2,
        ok,
        f"update step vs central differences on {FD_ITERATES} iterates: "
        f"worst relative deviation {worst:.2e} (need <= {FD_REL_TOL:.0e}); "
        f"{elapsed:.1f}s of {FD_LIMIT_S:.0f}s",
    )


@pytest.fixture(scope="module")
def heavy_tail_means():
    """Ten contaminated lognormal instances reduced to subgroup means.

    The incremental-learning and convex-contrast checks are pinned to the
    same data, so both consume this fixture; each test charges the shared
    setup time against its own budget.
    """
    dist = sm.InlierDistribution("lognormal", 3.3)
    mean = sm.SparseMeanSpec(
        dimension=500, entries=tuple((i, float(SPIKE_VALUES[i])) for i in range(4))
    )
    spec = sm.ContaminationSpec(epsilon=0.05, strategy=sm.HeavyTailOutliers())
    start = time.perf_counter()
    instances = []
    for s in range(TRAJ_SEEDS):
        samples = sm.sample_inliers(dist, mean, 2000, seed=1000 + s)
        corrupted = sm.apply_contamination(samples, spec, seed=2000 + s)
        plan = sm.make_plan(2000, sm.SubgroupRule.practical(), 0.05)
        instances.append(sm.subgroup_means(corrupted, plan))
    return instances, time.perf_counter() - start


def test_spikes_emerge_incrementally_on_heavy_tails(heavy_tail_means, criterion_report):
    instances, setup_s = heavy_tail_means
    start = time.perf_counter()
    cfg = SubgmConfig(alpha=1e-10, eta=0.07, iterations=600, trace_every=1)
    signal_ok = residual_ok = order_ok = all_ok = 0
    for means in instances:
        final, trace = sm.subgm_run(means, cfg)
        estimate = final.estimate
        paths = np.abs(trace.estimate_matrix())
        s_ok = bool(np.all(np.abs(estimate[:4] - SPIKE_VALUES) <= TRAJ_SIGNAL_TOL))
        r_ok = bool(np.abs(estimate[4:]).max() <= TRAJ_RESIDUAL_TOL)
        crossings = []
        for i in range(4):
            hits = np.flatnonzero(paths[:, i] >= SPIKE_VALUES[i] / 2)
            crossings.append(int(hits[0]) if hits.size else paths.shape[0])
        # the two equal spikes are unordered between themselves
        o_ok = crossings[0] < min(crossings[1], crossings[2]) and max(
            crossings[1], crossings[2]
        ) <= crossings[3]
        signal_ok += s_ok
        residual_ok += r_ok
        order_ok += o_ok
        all_ok += s_ok and r_ok and o_ok
    elapsed = setup_s + time.perf_counter() - start
    ok = all_ok >= TRAJ_SEEDS_NEEDED and elapsed < TRAJ_LIMIT_S
    criterion_report(
        3,
        ok,
        f"signal accuracy {signal_ok}/{TRAJ_SEEDS}, residual floor {residual_ok}/{TRAJ_SEEDS}, "
        f"half-crossing order {order_ok}/{TRAJ_SEEDS}, all clauses {all_ok}/{TRAJ_SEEDS} "
        f"(need >= {TRAJ_SEEDS_NEEDED}); {elapsed:.1f}s of {TRAJ_LIMIT_S:.0f}s",
    )


def test_unfactored_baseline_spreads_error_across_coordinates(
    heavy_tail_means, criterion_report
):
    instances, setup_s = heavy_tail_means
    start = time.perf_counter()
    counts = []
    for means in instances:
        estimate, _ = sm.convex_baseline_run(means, 0.07, 600)
        residuals = np.delete(np.abs(estimate), [0, 1, 2, 3])
        counts.append(int((residuals > CONVEX_RESIDUAL_FLOOR).sum()))
    elapsed = setup_s + time.perf_counter() - start
    ok = min(counts) >= CONVEX_COORDS_NEEDED and elapsed < CONVEX_LIMIT_S
    criterion_report(
        4,
        ok,
        f"residual coords over {CONVEX_RESIDUAL_FLOOR:g}: min {min(counts)}, "
        f"max {max(counts)} of 496 (need >= {CONVEX_COORDS_NEEDED}); "
        f"{elapsed:.1f}s of {CONVEX_LIMIT_S:.0f}s",
    )


def test_support_recovery_across_contamination_levels(criterion_report):
    start = time.perf_counter()
    shipped = load_config(str(CONFIG_DIR / "success_rate.cfg"))
    # keep the shipped sweep config in lockstep with this measured grid
    assert shipped.sweep == "epsilon"
    assert shipped.sweep_values == SUCCESS_EPS_GRID
    assert shipped.trials == SUCCESS_TRIALS
    assert shipped.estimators == ("stage1",)
    assert shipped.n == 600
    assert shipped.mean.entries == DEFAULT_MEAN.entries
    assert (shipped.distribution.family, shipped.distribution.param) == ("fisk", 3.1)
    assert shipped.iterations == 200 and shipped.base_seed == 7

    dist = sm.InlierDistribution("fisk", 3.1)
    truth = DEFAULT_MEAN.dense()
    rule = sm.SubgroupRule.practical()
    cfg = SubgmConfig(iterations=200)
    rates = {}
    for eps in SUCCESS_EPS_GRID:
        spec = sm.ContaminationSpec(
            epsilon=eps, strategy=sm.ConstantBias(shift=2.0, mean=truth)
        )
        run_rates = []
        for t in range(SUCCESS_TRIALS):
            samples = sm.sample_inliers(
                dist, DEFAULT_MEAN, 600, seed=mix64(7, int(eps * 100), t)
            )
            corrupted = sm.apply_contamination(samples, spec, seed=mix64(8, int(eps * 100), t))
            estimate, support, _ = run_estimator(
                corrupted, Stage1Only(), rule, cfg, eps, seed=mix64(9, int(eps * 100), t)
            )
            run_rates.append(evaluate(estimate, support, DEFAULT_MEAN).success_rate)
        rates[eps] = float(np.mean(run_rates))
    elapsed = time.perf_counter() - start
    ok = (
        rates[0.05] == 1.0
        and rates[0.1] == 1.0
        and rates[0.3] >= 0.9
        and elapsed < SUCCESS_LIMIT_S
    )
    shown = " ".join(f"{eps:.2f}->{rates[eps]:.2f}" for eps in SUCCESS_EPS_GRID)
    criterion_report(
        5,
        ok,
        f"mean success rate by contamination: {shown} "
        f"(need 1.00 at <= 0.10 and >= 0.90 at 0.30); {elapsed:.0f}s of {SUCCESS_LIMIT_S:.0f}s",
    )


def test_dense_stage_flattens_error_growth_in_k(criterion_report):
    start = time.perf_counter()
    dist = sm.InlierDistribution("fisk", 3.1)
    rule = sm.SubgroupRule.practical()
    eps = 0.1
    medians = {}
    for k in SPARSITY_KS:
        mean = sm.SparseMeanSpec(
            dimension=100, entries=tuple((i, 10.0) for i in range(k))
        )
        truth = mean.dense()
        n = 100 * k
        spec = sm.ContaminationSpec(epsilon=eps, strategy=sm.ConstantBias(shift=2.0, mean=truth))
        for name, kind, iters in (
            ("stage1", Stage1Only(), 600),
            ("full", Full(IterativeFilter()), 200),
        ):
            cfg = SubgmConfig(iterations=iters)
            errors = []
            for t in range(SPARSITY_TRIALS):
                samples = sm.sample_inliers(dist, mean, n, seed=mix64(21, k, t))
                corrupted = sm.apply_contamination(samples, spec, seed=mix64(22, k, t))
                estimate, support, _ = run_estimator(
                    corrupted, kind, rule, cfg, eps, seed=mix64(23, k, t)
                )
                errors.append(evaluate(estimate, support, mean).l2_error)
            medians[(name, k)] = float(np.median(errors))
    ratio_stage1 = medians[("stage1", 16)] / medians[("stage1", 4)]
    ratio_full = medians[("full", 16)] / medians[("full", 4)]
    elapsed = time.perf_counter() - start
    ok = (
        ratio_stage1 >= STAGE1_RATIO_MIN
        and ratio_full <= FULL_RATIO_MAX
        and elapsed < SPARSITY_LIMIT_S
    )
    criterion_report(
        6,
        ok,
        f"median l2 growth k=4 -> k=16: stage1 x{ratio_stage1:.2f} "
        f"(need >= {STAGE1_RATIO_MIN}), full x{ratio_full:.2f} (need <= {FULL_RATIO_MAX}); "
        f"{elapsed:.0f}s of {SPARSITY_LIMIT_S:.0f}s",
    )


def test_one_dimensional_deviation_bound_holds(criterion_report):
    start = time.perf_counter()
    eps, n, delta = 0.02, 5000, 0.1
    j = math.ceil(3 * math.ceil(eps * n) + 32 * math.log(1 / delta))
    assert j == 374
    bound = 2 * math.sqrt(6 * eps) + 64 * math.sqrt(6 * math.log(1 / delta) / n)
    dist = sm.InlierDistribution("gaussian", 1.0)
    mean = sm.SparseMeanSpec(dimension=1, entries=((0, 3.0),))
    spec = sm.ContaminationSpec(epsilon=eps, strategy=sm.PointMass(100.0))
    hits = 0
    worst = 0.0
    for t in range(MOM_BOUND_TRIALS):
        samples = sm.sample_inliers(dist, mean, n, seed=mix64(41, 0, t))
        corrupted = sm.apply_contamination(samples, spec, seed=mix64(42, 0, t))
        plan = sm.make_plan(n, sm.SubgroupRule.fixed(j), eps)
        means = sm.subgroup_means(corrupted, plan)
        deviation = abs(sm.mom_1d(means.means[:, 0]) - 3.0)
        worst = max(worst, deviation)
        hits += deviation <= bound
    fraction = hits / MOM_BOUND_TRIALS
    elapsed = time.perf_counter() - start
    ok = fraction >= MOM_BOUND_FRACTION and elapsed < MOM_BOUND_LIMIT_S
    criterion_report(
        7,
        ok,
        f"J={j}, bound {bound:.3f}: within-bound fraction {fraction:.3f} "
        f"(need >= {MOM_BOUND_FRACTION}), worst deviation {worst:.3f}; "
        f"{elapsed:.0f}s of {MOM_BOUND_LIMIT_S:.0f}s",
    )


def test_sign_statistic_concentrates_at_both_offsets(criterion_report):
    start = time.perf_counter()
    sigma, eps = 1.0, 0.05
    a_hi = 20 * sigma * math.sqrt(eps)
    a_lo = 0.001 * sigma * math.sqrt(eps)
    dist = sm.InlierDistribution("gaussian", 1.0)
    zero_mean = sm.SparseMeanSpec(dimension=2, entries=())
    adversary = sm.make_lower_bound_adversary(sigma, eps, support_index=0, dimension=2)
    hi_values = []
    lo_values = []
    for t in range(SIGN_TRIALS):
        samples = sm.sample_inliers(dist, zero_mean, SIGN_N, seed=mix64(51, 0, t))
        corrupted = sm.apply_contamination(samples, adversary, seed=mix64(52, 0, t))
        plan = sm.make_plan(SIGN_N, sm.SubgroupRule.theory(), eps)
        means = sm.subgroup_means(corrupted, plan)
        hi_values.append(sm.sign_statistic(means, np.full(2, -a_hi)))
        lo_values.append(sm.sign_statistic(means, np.full(2, -a_lo)))
    hi = np.array(hi_values)
    lo = np.array(lo_values)
    elapsed = time.perf_counter() - start
    ok = (
        hi.min() >= SIGN_HI_WINDOW[0]
        and hi.max() <= SIGN_HI_WINDOW[1]
        and np.abs(lo).max() <= SIGN_LO_BAND
        and elapsed < SIGN_LIMIT_S
    )
    criterion_report(
        8,
        ok,
        f"statistic at large offset in [{hi.min():.5f}, {hi.max():.5f}] "
        f"(need within [{SIGN_HI_WINDOW[0]}, {SIGN_HI_WINDOW[1]}]); at tiny offset "
        f"max |value| {np.abs(lo).max():.4f} (need <= {SIGN_LO_BAND}); "
        f"{elapsed:.0f}s of {SIGN_LIMIT_S:.0f}s",
    )


def test_support_recovery_without_a_variance(criterion_report):
    start = time.perf_counter()
    dist = sm.InlierDistribution("student_t", 1.5)
    truth = DEFAULT_MEAN.dense()
    rule = sm.SubgroupRule.practical()
    cfg = SubgmConfig(iterations=200)
    eps = 0.1
    spec = sm.ContaminationSpec(epsilon=eps, strategy=sm.ConstantBias(shift=2.0, mean=truth))
    rates = []
    for t in range(INF_VAR_TRIALS):
        samples = sm.sample_inliers(dist, DEFAULT_MEAN, 600, seed=mix64(31, 0, t))
        corrupted = sm.apply_contamination(samples, spec, seed=mix64(32, 0, t))
        estimate, support, _ = run_estimator(
            corrupted, Stage1Only(), rule, cfg, eps, seed=mix64(33, 0, t)
        )
        rates.append(evaluate(estimate, support, DEFAULT_MEAN).success_rate)
    mean_rate = float(np.mean(rates))
    elapsed = time.perf_counter() - start
    ok = mean_rate >= INF_VAR_SUCCESS and elapsed < INF_VAR_LIMIT_S
    criterion_report(
        9,
        ok,
        f"mean support overlap {mean_rate:.2f} over {INF_VAR_TRIALS} trials "
        f"(need >= {INF_VAR_SUCCESS}); {elapsed:.0f}s of {INF_VAR_LIMIT_S:.0f}s",
    )


def test_results_identical_across_thread_counts(tmp_path, criterion_report):
    start = time.perf_counter()
    cfg_path = CONFIG_DIR / "success_rate.cfg"
    bodies = []
    for threads in (1, 8):
        workdir = tmp_path / f"threads{threads}"
        workdir.mkdir()
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "sparsemom.cli",
                "run",
                "--config",
                str(cfg_path),
                "--threads",
                str(threads),
            ],
            cwd=workdir,
            capture_output=True,
            text=True,
            timeout=280,
        )
        assert proc.returncode == 0, proc.stderr
        bodies.append((workdir / "results" / "success_rate" / "results.csv").read_bytes())
    identical = bodies[0] == bodies[1]
    elapsed = time.perf_counter() - start
    ok = identical and elapsed < DETERMINISM_LIMIT_S
    criterion_report(
        10,
        ok,
        f"results.csv byte-identical for --threads 1 vs 8 "
        f"({len(bodies[0])} bytes): {identical}; {elapsed:.0f}s of {DETERMINISM_LIMIT_S:.0f}s",
    )


def test_stage1_wall_time_grows_linearly_in_dimension(tmp_path, criterion_report):
    start = time.perf_counter()
    cfg = load_config(str(CONFIG_DIR / "runtime_bench.cfg"))
    assert cfg.sweep == "d" and 500 in cfg.sweep_values and 2000 in cfg.sweep_values
    rows = run_bench(cfg, out_dir=str(tmp_path / "bench"), repeats=3)
    timings = {(name, d): ms for d, _, name, ms in rows}
    ratio = timings[("stage1", 2000)] / timings[("stage1", 500)]
    elapsed = time.perf_counter() - start
    ok = BENCH_RATIO_WINDOW[0] <= ratio <= BENCH_RATIO_WINDOW[1] and elapsed < BENCH_LIMIT_S
    criterion_report(
        11,
        ok,
        f"stage1 best-of-3: d=500 {timings[('stage1', 500)]:.0f} ms, "
        f"d=2000 {timings[('stage1', 2000)]:.0f} ms, ratio {ratio:.2f} "
        f"(need within [{BENCH_RATIO_WINDOW[0]:.0f}, {BENCH_RATIO_WINDOW[1]:.0f}]); "
        f"{elapsed:.0f}s of {BENCH_LIMIT_S:.0f}s",
    )
