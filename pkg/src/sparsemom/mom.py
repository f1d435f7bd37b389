"""Median-of-means subgrouping and the subgroup sign statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .sampling import SampleMatrix


def _ceil_count(epsilon: float, n: int) -> int:
    # guard: 0.1 * 600 must ceil to 60, not 61
    return int(math.ceil(epsilon * n - 1e-9))


@dataclass(frozen=True)
class SubgroupRule:
    """How the number of subgroups J is chosen from (n, eps).

    theory:    J = 100 * ceil(eps * n)        (the analysis constant)
    practical: J = floor(1.5 * ceil(eps * n) + 150)
    fixed:     J given explicitly
    """

    kind: str
    fixed_j: int | None = None

    def __post_init__(self):
        if self.kind not in ("theory", "practical", "fixed"):
            raise ParameterError(f"unknown subgroup rule {self.kind!r}")
        if (self.kind == "fixed") != (self.fixed_j is not None):
            raise ParameterError("fixed_j must be set exactly when kind == 'fixed'")
        if self.fixed_j is not None and self.fixed_j < 1:
            raise ParameterError(f"fixed J must be >= 1, got {self.fixed_j}")

    @staticmethod
    def theory() -> "SubgroupRule":
        return SubgroupRule("theory")

    @staticmethod
    def practical() -> "SubgroupRule":
        return SubgroupRule("practical")

    @staticmethod
    def fixed(j: int) -> "SubgroupRule":
        return SubgroupRule("fixed", fixed_j=int(j))

    def raw_count(self, n: int, epsilon: float) -> int:
        if self.kind == "theory":
            return 100 * _ceil_count(epsilon, n)
        if self.kind == "practical":
            return int(math.floor(1.5 * _ceil_count(epsilon, n) + 150 + 1e-9))
        return int(self.fixed_j)


@dataclass(frozen=True)
class SubgroupPlan:
    """Assignment of n rows to J contiguous subgroups.

    clamped is set when the rule's raw J fell outside [1, n] and was pulled
    back to the boundary (degenerate regime worth surfacing to the caller).
    """

    n: int
    j: int
    assignment: np.ndarray
    clamped: bool = False

    def __post_init__(self):
        if not 1 <= self.j <= self.n:
            raise ParameterError(f"need 1 <= J <= n, got J={self.j}, n={self.n}")
        if self.assignment.shape != (self.n,):
            raise ShapeError("assignment length must equal n")

    @property
    def block_size(self) -> int:
        """Smallest subgroup size, floor(n / J)."""
        return self.n // self.j

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.j)


def make_plan(n: int, rule: SubgroupRule, epsilon: float = 0.0) -> SubgroupPlan:
    """Contiguous plan: the first n mod J groups get the extra row."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if epsilon < 0:
        raise ParameterError(f"epsilon must be >= 0, got {epsilon}")
    raw = rule.raw_count(n, epsilon)
    j = min(max(raw, 1), n)
    big = n % j
    base = n // j
    sizes = np.full(j, base, dtype=np.intp)
    sizes[:big] += 1
    assignment = np.repeat(np.arange(j, dtype=np.intp), sizes)
    return SubgroupPlan(n=n, j=j, assignment=assignment, clamped=(raw != j))


@dataclass(frozen=True)
class SubgroupMeans:
    """J x d matrix of exact subgroup averages."""

    means: np.ndarray
    plan: SubgroupPlan

    @property
    def j(self) -> int:
        return self.means.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]


def subgroup_means(samples: SampleMatrix, plan: SubgroupPlan) -> SubgroupMeans:
    if samples.n != plan.n:
        raise ShapeError(f"plan built for n={plan.n}, samples have n={samples.n}")
    sizes = plan.sizes()
    starts = np.zeros(plan.j, dtype=np.intp)
    np.cumsum(sizes[:-1], out=starts[1:])
    # contiguous assignment: reduceat sums each block in one pass
    sums = np.add.reduceat(samples.data, starts, axis=0)
    return SubgroupMeans(means=sums / sizes[:, None], plan=plan)


def mom_1d(values) -> float:
    """Median with the even-count midpoint convention."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ShapeError("mom_1d needs at least one value")
    return float(np.median(arr))


def mom_coordinatewise(means: SubgroupMeans) -> np.ndarray:
    """Per-coordinate median of the subgroup means."""
    return np.median(means.means, axis=0)


def sign_statistic(means: SubgroupMeans, a: np.ndarray) -> np.ndarray:
    """Average over subgroups of sign(mean_j - a), coordinatewise.

    sign(0) counts as 0. Values lie in [-1, 1]; the statistic is +1 when
    every subgroup mean sits strictly above a and -1 when strictly below.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (means.d,):
        raise ShapeError(f"evaluation point has shape {a.shape}, expected ({means.d},)")
    return np.mean(np.sign(means.means - a[None, :]), axis=0)
