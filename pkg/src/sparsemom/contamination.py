"""Strong-contamination adversaries.

Each strategy replaces floor(eps * n) rows, chosen uniformly at random from
the clean rows, and records which rows were touched. Untouched rows are
preserved bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError, StateError
from .rng import mix64, uniform_grid
from .sampling import SampleMatrix


@dataclass(frozen=True)
class NoContamination:
    pass


@dataclass(frozen=True)
class ConstantBias:
    """Replacement row = true mean + shift.

    shift is a d-vector (a scalar c is promoted to c * ones). mean is the
    dense true mean; when omitted it is taken as zero, i.e. the replacement
    row is the shift itself.
    """

    shift: np.ndarray
    mean: np.ndarray | None = None


@dataclass(frozen=True)
class HeavyTailOutliers:
    """Replacement rows drawn i.i.d. per coordinate from a Cauchy."""

    location: float = 20.0
    scale: float = math.sqrt(50.0)

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class PointMass:
    """Every replacement row equals the same fixed vector."""

    value: np.ndarray


Strategy = NoContamination | ConstantBias | HeavyTailOutliers | PointMass


@dataclass(frozen=True)
class ContaminationSpec:
    epsilon: float
    strategy: Strategy = field(default_factory=NoContamination)

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 0.5):
            raise ParameterError(f"epsilon must satisfy 0 <= eps < 0.5, got {self.epsilon}")


def corrupted_count(epsilon: float, n: int) -> int:
    """floor(eps * n), guarded against float noise in the product."""
    return int(math.floor(epsilon * n + 1e-9))


def _as_vector(x, d: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        return np.full(d, float(v))
    if v.shape != (d,):
        raise ShapeError(f"{name} has shape {v.shape}, expected ({d},)")
    return v


def _replacement_rows(strategy: Strategy, m: int, d: int, seed: int) -> np.ndarray:
    if isinstance(strategy, ConstantBias):
        shift = _as_vector(strategy.shift, d, "shift")
        base = np.zeros(d) if strategy.mean is None else _as_vector(strategy.mean, d, "mean")
        return np.tile(base + shift, (m, 1))
    if isinstance(strategy, HeavyTailOutliers):
        u = uniform_grid(seed, m, d, stream=7)
        return strategy.location + strategy.scale * np.tan(np.pi * (u - 0.5))
    if isinstance(strategy, PointMass):
        return np.tile(_as_vector(strategy.value, d, "value"), (m, 1))
    raise ParameterError(f"unsupported strategy {strategy!r}")


def apply_contamination(samples: SampleMatrix, spec: ContaminationSpec, seed: int) -> SampleMatrix:
    """Replace floor(eps * n) uniformly chosen rows per the strategy.

    The input must be clean (empty corrupted set); contaminating twice is a
    state error. Rows that are not replaced are copied unchanged.
    """
    if samples.corrupted_rows:
        raise StateError("samples already contaminated")
    n, d = samples.n, samples.d
    m = corrupted_count(spec.epsilon, n)
    if m == 0 or isinstance(spec.strategy, NoContamination):
        return SampleMatrix(data=samples.data.copy(), corrupted_rows=frozenset())

    picker = np.random.default_rng(np.random.PCG64(mix64(seed, 0x5E1EC7)))
    rows = np.sort(picker.choice(n, size=m, replace=False))
    data = samples.data.copy()
    data[rows] = _replacement_rows(spec.strategy, m, d, mix64(seed, 0xF111))
    return SampleMatrix(data=data, corrupted_rows=frozenset(int(r) for r in rows))


def outlier_magnitude(sigma: float, epsilon: float) -> float:
    """Placement sigma / sqrt(eps) used by the one-coordinate adversary."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    return sigma / math.sqrt(epsilon)


def make_lower_bound_adversary(
    sigma: float, epsilon: float, support_index: int, dimension: int
) -> ContaminationSpec:
    """Point mass of magnitude sigma / sqrt(eps) on one support coordinate.

    This is the placement that makes the corrupted mixture statistically
    indistinguishable from a clean shifted distribution, so no estimator can
    beat sigma * sqrt(eps) error against it.
    """
    value = outlier_magnitude(sigma, epsilon)
    if not 0 <= support_index < dimension:
        raise ShapeError(f"support index {support_index} out of range for dimension {dimension}")
    vec = np.zeros(dimension)
    vec[support_index] = value
    return ContaminationSpec(epsilon=epsilon, strategy=PointMass(value=vec))
