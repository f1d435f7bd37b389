"""Stage 2: robust dense mean estimation on the support-projected data.

Once the support is known the problem is k-dimensional with k << d, so a
plain iterative filter is affordable: look at the top eigenvalue of the
survivor covariance, and while it is larger than the variance bound allows,
drop the rows with the largest squared projections onto the top eigenvector.
A coordinate-wise median-of-means variant is kept as the cheap alternative.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .mom import SubgroupRule, make_plan, mom_coordinatewise, subgroup_means
from .rng import uniform_grid
from .sampling import SampleMatrix

_POWER_ITERATIONS = 100
_POWER_STREAM = 11


def _as_index_set(support, d: int) -> np.ndarray:
    idx = np.asarray(list(support), dtype=np.intp).ravel()
    idx = np.sort(idx)
    if idx.size and (idx[0] < 0 or idx[-1] >= d):
        raise ShapeError(f"support index out of range for d={d}")
    if idx.size > 1 and np.any(np.diff(idx) == 0):
        raise ShapeError("support indices must be distinct")
    return idx


def project_to_support(samples: SampleMatrix, support) -> SampleMatrix:
    """Keep only the support columns; row order and corruption labels survive."""
    idx = _as_index_set(support, samples.d)
    return SampleMatrix(data=samples.data[:, idx], corrupted_rows=samples.corrupted_rows)


def assemble_full_estimate(support, dense_estimate: np.ndarray, d: int) -> np.ndarray:
    """Scatter the k-vector onto its support inside a zero d-vector."""
    idx = _as_index_set(support, d)
    est = np.asarray(dense_estimate, dtype=float).ravel()
    if est.shape[0] != idx.shape[0]:
        raise ShapeError(f"{idx.shape[0]} support indices but {est.shape[0]} estimate entries")
    full = np.zeros(d)
    full[idx] = est
    return full


@dataclass(frozen=True)
class CoordMoM:
    """Coordinate-wise median of subgroup means, one subgroup plan for all columns."""

    rule: SubgroupRule


@dataclass(frozen=True)
class IterativeFilter:
    """Spectral outlier filter.

    score_quantile = None picks min(max(1 - 2*eps, 0.9), 0.995) at call time.
    threshold_inflation scales the contamination term of the stopping rule and
    finite_sample_slack the sqrt(k/n) term; both are engineering constants,
    not statements about optimal constants.
    """

    max_rounds: int = 50
    score_quantile: float | None = None
    threshold_inflation: float = 9.0
    finite_sample_slack: float = 3.0

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ParameterError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if self.score_quantile is not None and not (0.5 < self.score_quantile < 1):
            raise ParameterError(
                f"score_quantile must lie in (0.5, 1), got {self.score_quantile}"
            )
        if self.threshold_inflation < 0 or self.finite_sample_slack < 0:
            raise ParameterError("filter threshold constants must be >= 0")

    def resolved_quantile(self, epsilon: float) -> float:
        if self.score_quantile is not None:
            return self.score_quantile
        return min(max(1.0 - 2.0 * epsilon, 0.9), 0.995)


DenseEstimator = CoordMoM | IterativeFilter


def _top_eigen(cov: np.ndarray, seed: int) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and eigenvector by fixed-length power iteration."""
    k = cov.shape[0]
    v = uniform_grid(seed, 1, k, stream=_POWER_STREAM)[0] - 0.5
    norm = np.linalg.norm(v)
    if norm == 0:  # unreachable with open-interval uniforms, kept as a guard
        v = np.zeros(k)
        v[0] = 1.0
    else:
        v = v / norm
    for _ in range(_POWER_ITERATIONS):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0, v
        v = w / norm
    return float(v @ cov @ v), v


def robust_variance_bound(samples_k: SampleMatrix, epsilon: float) -> float:
    """Heuristic sigma^2 when the config does not provide one.

    Coordinate-wise MoM of squared deviations around the coordinate-wise MoM
    center, maxed over coordinates. Biased on heavy tails; the experiments
    normally pass the known variance instead.
    """
    plan = make_plan(samples_k.n, SubgroupRule.practical(), epsilon)
    center = mom_coordinatewise(subgroup_means(samples_k, plan))
    squared = SampleMatrix(
        data=(samples_k.data - center[None, :]) ** 2,
        corrupted_rows=samples_k.corrupted_rows,
    )
    per_coord = mom_coordinatewise(subgroup_means(squared, plan))
    return float(np.max(per_coord))


def _run_filter(
    data: np.ndarray,
    epsilon: float,
    est: IterativeFilter,
    seed: int,
    sigma2: float,
) -> np.ndarray:
    n, k = data.shape
    quantile = est.resolved_quantile(epsilon)
    alive = np.ones(n, dtype=bool)
    removed_total = 0
    for _ in range(est.max_rounds):
        live = data[alive]
        mu = live.mean(axis=0)
        centered = live - mu[None, :]
        cov = (centered.T @ centered) / live.shape[0]
        lam, vec = _top_eigen(cov, seed)
        slack = est.finite_sample_slack * math.sqrt(k / live.shape[0])
        if lam <= sigma2 * (1.0 + est.threshold_inflation * epsilon + slack):
            break
        scores = (centered @ vec) ** 2
        cut = np.quantile(scores, quantile)
        drop = scores > cut  # strictly above, so score ties are kept together
        if not drop.any():
            break
        alive[np.flatnonzero(alive)[drop]] = False
        removed_total += int(drop.sum())
        if alive.sum() < 2:
            break
    budget = 2.0 * epsilon * n + 16.0 * math.log(n + 1)
    if removed_total > budget:
        warnings.warn(
            f"filter removed {removed_total} of {n} rows, over the 2*eps*n + O(log n) budget",
            RuntimeWarning,
            stacklevel=3,
        )
    return data[alive].mean(axis=0)


def dense_robust_mean(
    samples_k: SampleMatrix,
    epsilon: float,
    est: DenseEstimator,
    seed: int,
    sigma2: float | None = None,
) -> np.ndarray:
    if not (0 <= epsilon < 0.5):
        raise ParameterError(f"epsilon must lie in [0, 0.5), got {epsilon}")
    if samples_k.d == 0:
        return np.zeros(0)
    if isinstance(est, CoordMoM):
        plan = make_plan(samples_k.n, est.rule, epsilon)
        return mom_coordinatewise(subgroup_means(samples_k, plan))
    if sigma2 is None:
        sigma2 = robust_variance_bound(samples_k, epsilon)
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be > 0, got {sigma2}")
    return _run_filter(samples_k.data, epsilon, est, seed, sigma2)
