"""Inlier distributions and sparse-mean sample generation.

The heavy-tailed families are defined through a symmetric density on the real
line; sampling draws the magnitude by inverting the magnitude CDF and attaches
an independent fair sign. The lognormal family is the one asymmetric member:
it is centered to mean zero (not symmetrized) so that the sparse mean below is
the population mean of every coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, ndtri
from scipy.stats import t as _student_t

from .errors import ParameterError, ShapeError
from .rng import sign_grid, uniform_grid

FAMILIES = ("fisk", "pareto", "student_t", "lognormal", "gaussian")

# Parameter meaning per family: fisk -> shape c, pareto -> tail index b,
# student_t -> degrees of freedom, lognormal -> variance of the (centered)
# variable, gaussian -> variance.


@dataclass(frozen=True)
class InlierDistribution:
    family: str
    param: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if not (self.param > 0 and math.isfinite(self.param)):
            raise ParameterError(f"{self.family} parameter must be finite and > 0, got {self.param}")

    def variance(self) -> float:
        """Population variance; inf when the family's tail is too heavy."""
        p = self.param
        if self.family == "fisk":
            if p <= 2:
                return math.inf
            r = 2 * math.pi / p
            return r / math.sin(r)
        if self.family == "pareto":
            return p / (p - 2) if p > 2 else math.inf
        if self.family == "student_t":
            return p / (p - 2) if p > 2 else math.inf
        return p  # lognormal and gaussian are parameterized by variance

    def third_abs_moment(self) -> float:
        """E|X|^3 about zero; inf when undefined."""
        p = self.param
        if self.family == "fisk":
            if p <= 3:
                return math.inf
            r = 3 * math.pi / p
            return r / math.sin(r)
        if self.family == "pareto":
            return p / (p - 3) if p > 3 else math.inf
        if self.family == "student_t":
            if p <= 3:
                return math.inf
            return p**1.5 * math.exp(gammaln((p - 3) / 2) - gammaln(p / 2)) / math.sqrt(math.pi)
        if self.family == "gaussian":
            return p**1.5 * 2 * math.sqrt(2 / math.pi)
        # centered lognormal: no tidy closed form; integrate the density
        from scipy.integrate import quad

        lo = -_lognormal_mean_shift(p)
        val, _ = quad(lambda x: abs(x) ** 3 * _lognormal_density(np.array([x]), p)[0],
                      lo, np.inf, limit=200)
        return val


def _lognormal_sigma(variance: float) -> float:
    # solve (w - 1) * w = variance for w = exp(s^2)
    w = (1.0 + math.sqrt(1.0 + 4.0 * variance)) / 2.0
    return math.sqrt(math.log(w))

def _lognormal_mean_shift(variance: float) -> float:
    s = _lognormal_sigma(variance)
    return math.exp(s * s / 2.0)


def _lognormal_density(x: np.ndarray, variance: float) -> np.ndarray:
    s = _lognormal_sigma(variance)
    m = _lognormal_mean_shift(variance)
    y = x + m
    out = np.zeros_like(y, dtype=float)
    pos = y > 0
    yp = y[pos]
    out[pos] = np.exp(-(np.log(yp) ** 2) / (2 * s * s)) / (yp * s * math.sqrt(2 * math.pi))
    return out


def density(dist: InlierDistribution, x) -> np.ndarray | float:
    """Density of `dist` at x (scalar or array), centered at zero."""
    arr = np.asarray(x, dtype=float)
    p = dist.param
    if dist.family == "fisk":
        a = np.abs(arr)
        out = p * a ** (p - 1) / (2.0 * (1.0 + a**p) ** 2)
    elif dist.family == "pareto":
        a = np.abs(arr)
        out = np.where(a >= 1.0, p / (2.0 * np.maximum(a, 1.0) ** (p + 1)), 0.0)
    elif dist.family == "student_t":
        lognorm = gammaln((p + 1) / 2) - gammaln(p / 2) - 0.5 * math.log(p * math.pi)
        out = np.exp(lognorm) * (1.0 + arr**2 / p) ** (-(p + 1) / 2)
    elif dist.family == "lognormal":
        out = _lognormal_density(arr, p)
    else:
        out = np.exp(-(arr**2) / (2 * p)) / math.sqrt(2 * math.pi * p)
    return out if out.shape else float(out)


@dataclass(frozen=True)
class SparseMeanSpec:
    """A d-dimensional mean with k nonzero entries.

    entries maps coordinate index -> nonzero value; indices must be distinct
    and in range.
    """

    dimension: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if self.dimension < 1:
            raise ParameterError(f"dimension must be >= 1, got {self.dimension}")
        object.__setattr__(self, "entries", tuple((int(i), float(v)) for i, v in self.entries))
        idx = [i for i, _ in self.entries]
        if len(set(idx)) != len(idx):
            raise ParameterError("duplicate indices in sparse mean entries")
        for i, v in self.entries:
            if not 0 <= i < self.dimension:
                raise ShapeError(f"mean index {i} out of range for dimension {self.dimension}")
            if v == 0.0:
                raise ParameterError(f"explicit zero entry at index {i}; omit it instead")
        if len(self.entries) > self.dimension:
            raise ShapeError("more nonzero entries than coordinates")

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def support(self) -> np.ndarray:
        return np.array(sorted(i for i, _ in self.entries), dtype=np.intp)

    @property
    def signal_max(self) -> float:
        return max((abs(v) for _, v in self.entries), default=0.0)

    @property
    def signal_min(self) -> float:
        return min((abs(v) for _, v in self.entries), default=0.0)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        for i, v in self.entries:
            out[i] = v
        return out


def dense_mean(mean: SparseMeanSpec) -> np.ndarray:
    """Materialize the sparse mean as a length-d vector."""
    return mean.dense()


@dataclass(frozen=True)
class SampleMatrix:
    """n x d data matrix plus the indices of adversarially replaced rows."""

    data: np.ndarray
    corrupted_rows: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ShapeError(f"data must be 2-d, got shape {self.data.shape}")
        object.__setattr__(self, "corrupted_rows", frozenset(int(r) for r in self.corrupted_rows))
        for r in self.corrupted_rows:
            if not 0 <= r < self.data.shape[0]:
                raise ShapeError(f"corrupted row {r} out of range")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def _noise_grid(dist: InlierDistribution, n: int, d: int, seed: int) -> np.ndarray:
    p = dist.param
    if dist.family == "fisk":
        u = uniform_grid(seed, n, d, stream=0)
        mag = (u / (1.0 - u)) ** (1.0 / p)
        return mag * sign_grid(seed, n, d, stream=1)
    if dist.family == "pareto":
        u = uniform_grid(seed, n, d, stream=0)
        mag = u ** (-1.0 / p)
        return mag * sign_grid(seed, n, d, stream=1)
    if dist.family == "student_t":
        # already symmetric; symmetrization is a no-op
        u = uniform_grid(seed, n, d, stream=0)
        return _student_t.ppf(u, df=p)
    if dist.family == "lognormal":
        s = _lognormal_sigma(p)
        u = uniform_grid(seed, n, d, stream=0)
        return np.exp(s * ndtri(u)) - _lognormal_mean_shift(p)
    u = uniform_grid(seed, n, d, stream=0)
    return math.sqrt(p) * ndtri(u)


def sample_inliers(dist: InlierDistribution, mean: SparseMeanSpec, n: int, seed: int) -> SampleMatrix:
    """Draw n i.i.d. rows with the given population mean.

    Parameters
    ----------
    dist : InlierDistribution
        Noise family; applied i.i.d. per coordinate.
    mean : SparseMeanSpec
        Population mean added to every row.
    n : int
        Number of rows, >= 1.
    seed : int
        Stream key. Cell (i, j) of the noise depends only on
        (seed, i, j), so equal arguments give bit-identical output no
        matter how generation is chunked or threaded.

    Returns
    -------
    SampleMatrix with an empty corrupted set.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    noise = _noise_grid(dist, n, mean.dimension, seed)
    return SampleMatrix(data=noise + mean.dense()[None, :])
