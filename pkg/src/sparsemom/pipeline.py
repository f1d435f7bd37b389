"""End-to-end estimators and evaluation metrics.

Composes the two stages (support identification, then dense robust estimation
on the projection) and the reference estimators they are compared against:
coordinate-wise median of means, plain convex subgradient descent, and an
oracle that sees which rows were replaced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densefilter import (
    DenseEstimator,
    assemble_full_estimate,
    dense_robust_mean,
    project_to_support,
)
from .errors import StateError
from .mom import SubgroupRule, make_plan, mom_coordinatewise, subgroup_means
from .rng import mix64
from .sampling import SampleMatrix, SparseMeanSpec
from .subgm import (
    SubgmConfig,
    Trace,
    convex_baseline_run,
    identify_support,
    subgm_run,
)


@dataclass(frozen=True)
class Stage1Only:
    """Factored subgradient method alone; its thresholded iterate is the answer."""


@dataclass(frozen=True)
class Full:
    """Stage 1 support, then a dense robust estimate on the projected columns."""

    dense: DenseEstimator


@dataclass(frozen=True)
class CoordMoMBaseline:
    rule: SubgroupRule


@dataclass(frozen=True)
class ConvexBaseline:
    """Subgradient descent on the unfactored loss; None fields inherit from SubgmConfig."""

    eta: float | None = None
    iterations: int | None = None


@dataclass(frozen=True)
class Oracle:
    """Coordinate-wise MoM on the rows that were not replaced. Simulation only."""


EstimatorKind = Stage1Only | Full | CoordMoMBaseline | ConvexBaseline | Oracle

ESTIMATOR_NAMES = {
    Stage1Only: "stage1",
    Full: "full",
    CoordMoMBaseline: "coord_mom",
    ConvexBaseline: "convex",
    Oracle: "oracle",
}


def estimator_name(kind: EstimatorKind) -> str:
    return ESTIMATOR_NAMES[type(kind)]


@dataclass
class EstimateReport:
    estimate: np.ndarray
    support: np.ndarray
    l2_error: float
    linf_error: float
    success_rate: float
    wall_time: float = 0.0
    trace: Trace | None = None


def support_jaccard(found, truth) -> float:
    """|found ∩ truth| / |found ∪ truth|, with both-empty counting as 1."""
    a = set(int(i) for i in found)
    b = set(int(i) for i in truth)
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def _dense_support(estimate: np.ndarray) -> np.ndarray:
    return np.flatnonzero(estimate != 0.0).astype(np.intp)


def run_estimator(
    samples: SampleMatrix,
    kind: EstimatorKind,
    mom_rule: SubgroupRule,
    subgm_cfg: SubgmConfig,
    epsilon: float,
    seed: int,
    sigma2: float | None = None,
) -> tuple[np.ndarray, np.ndarray, Trace | None]:
    """Run one estimator; returns (estimate, claimed support, optional trace)."""
    if isinstance(kind, (Stage1Only, Full)):
        plan = make_plan(samples.n, mom_rule, epsilon)
        means = subgroup_means(samples, plan)
        final, trace = subgm_run(means, subgm_cfg)
        estimate = final.estimate
        support = identify_support(estimate, subgm_cfg.alpha, subgm_cfg.support_multiplier)
        if isinstance(kind, Stage1Only):
            return estimate, support, trace
        if support.size == 0:
            # Nothing identified: the zero vector is the whole estimate.
            return np.zeros(samples.d), support, trace
        projected = project_to_support(samples, support)
        dense = dense_robust_mean(
            projected, epsilon, kind.dense, mix64(seed, 0xF117E2), sigma2=sigma2
        )
        return assemble_full_estimate(support, dense, samples.d), support, trace

    if isinstance(kind, CoordMoMBaseline):
        plan = make_plan(samples.n, kind.rule, epsilon)
        estimate = mom_coordinatewise(subgroup_means(samples, plan))
        return estimate, _dense_support(estimate), None

    if isinstance(kind, ConvexBaseline):
        plan = make_plan(samples.n, mom_rule, epsilon)
        means = subgroup_means(samples, plan)
        eta = kind.eta if kind.eta is not None else subgm_cfg.eta
        total = kind.iterations if kind.iterations is not None else subgm_cfg.resolved_iterations()
        estimate, trace = convex_baseline_run(means, eta, total, subgm_cfg.trace_every)
        support = np.flatnonzero(np.abs(estimate) >= subgm_cfg.alpha).astype(np.intp)
        return estimate, support, trace

    if isinstance(kind, Oracle):
        if epsilon > 0 and not samples.corrupted_rows:
            raise StateError("oracle requires corrupted_rows metadata on contaminated data")
        keep = np.setdiff1d(np.arange(samples.n), np.fromiter(samples.corrupted_rows, dtype=np.intp))
        clean = SampleMatrix(data=samples.data[keep], corrupted_rows=frozenset())
        plan = make_plan(clean.n, SubgroupRule.practical(), epsilon)
        estimate = mom_coordinatewise(subgroup_means(clean, plan))
        return estimate, _dense_support(estimate), None

    raise TypeError(f"unknown estimator kind: {kind!r}")


def evaluate(estimate: np.ndarray, support, truth: SparseMeanSpec) -> EstimateReport:
    target = truth.dense()
    diff = estimate - target
    return EstimateReport(
        estimate=estimate,
        support=np.asarray(list(support), dtype=np.intp),
        l2_error=float(np.linalg.norm(diff)),
        linf_error=float(np.max(np.abs(diff))) if diff.size else 0.0,
        success_rate=support_jaccard(support, truth.support),
    )
