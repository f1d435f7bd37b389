"""Subgradient method on the factored nonconvex l1 loss.

The estimate is parameterized as mu = u*u - v*v. Each iteration computes the
per-coordinate sign statistic of the subgroup means at the current estimate
and rescales the factors multiplicatively:

    u <- (1 + eta * s) * u,    v <- (1 - eta * s) * v.

Starting both factors at a tiny alpha > 0 makes the dynamics incremental:
coordinates with a decisive sign statistic grow exponentially while the rest
stay at the alpha scale, and thresholding |mu| at alpha reads off the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ParameterError, ShapeError
from .mom import SubgroupMeans, sign_statistic


@dataclass(frozen=True)
class SubgmConfig:
    alpha: float = 1e-5
    eta: float = 0.05
    iterations: int | None = None  # None: ceil((2/eta) * log(1/alpha))
    trace_every: int = 1
    support_multiplier: float = 1.0

    def __post_init__(self):
        if not (0 < self.alpha < 1):
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (0 < self.eta <= 1):
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if self.iterations is not None and self.iterations < 0:
            raise ParameterError(f"iterations must be >= 0, got {self.iterations}")
        if self.trace_every < 1:
            raise ParameterError(f"trace_every must be >= 1, got {self.trace_every}")
        if self.support_multiplier < 1:
            raise ParameterError(f"support multiplier must be >= 1, got {self.support_multiplier}")

    def resolved_iterations(self) -> int:
        if self.iterations is not None:
            return self.iterations
        return math.ceil((2.0 / self.eta) * math.log(1.0 / self.alpha))


@dataclass
class FactoredIterate:
    u: np.ndarray
    v: np.ndarray
    t: int = 0

    @property
    def estimate(self) -> np.ndarray:
        return self.u * self.u - self.v * self.v


@dataclass
class Trace:
    """Snapshots (t, estimate, sign statistic) at a fixed stride.

    t = 0 and the final iterate are always present. coordinates is None when
    snapshots cover every coordinate, else the recorded column subset.
    """

    times: list[int] = field(default_factory=list)
    estimates: list[np.ndarray] = field(default_factory=list)
    betas: list[np.ndarray] = field(default_factory=list)
    coordinates: np.ndarray | None = None

    def record(self, t: int, estimate: np.ndarray, beta: np.ndarray):
        cols = slice(None) if self.coordinates is None else self.coordinates
        self.times.append(t)
        self.estimates.append(estimate[cols].copy())
        self.betas.append(beta[cols].copy())

    def estimate_matrix(self) -> np.ndarray:
        return np.stack(self.estimates)


def _check_finite(arr: np.ndarray, what: str, t: int):
    if np.all(np.isfinite(arr)):
        return
    bad = int(np.flatnonzero(~np.isfinite(arr))[0])
    raise NumericError(
        f"{what} became non-finite at coordinate {bad}, iteration {t}",
        coordinate=bad,
        iteration=t,
    )


def subgm_step(iterate: FactoredIterate, means: SubgroupMeans, eta: float) -> FactoredIterate:
    """One multiplicative subgradient step; returns a new iterate."""
    if iterate.u.shape != (means.d,) or iterate.v.shape != (means.d,):
        raise ShapeError("iterate dimension does not match subgroup means")
    s = sign_statistic(means, iterate.u * iterate.u - iterate.v * iterate.v)
    u = (1.0 + eta * s) * iterate.u
    v = (1.0 - eta * s) * iterate.v
    t = iterate.t + 1
    _check_finite(u, "u", t)
    _check_finite(v, "v", t)
    return FactoredIterate(u=u, v=v, t=t)


def subgm_run(means: SubgroupMeans, cfg: SubgmConfig) -> tuple[FactoredIterate, Trace]:
    """Run T steps from u = v = alpha * ones; trace every cfg.trace_every."""
    d = means.d
    total = cfg.resolved_iterations()
    it = FactoredIterate(u=np.full(d, cfg.alpha), v=np.full(d, cfg.alpha), t=0)
    trace = Trace()
    trace.record(0, it.estimate, sign_statistic(means, it.estimate))
    for t in range(1, total + 1):
        it = subgm_step(it, means, cfg.eta)
        if t % cfg.trace_every == 0 or t == total:
            trace.record(t, it.estimate, sign_statistic(means, it.estimate))
    return it, trace


def identify_support(estimate: np.ndarray, alpha: float, multiplier: float = 1.0) -> np.ndarray:
    """Sorted indices with |estimate| >= multiplier * alpha (inclusive)."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    if multiplier < 1:
        raise ParameterError(f"multiplier must be >= 1, got {multiplier}")
    return np.flatnonzero(np.abs(estimate) >= multiplier * alpha).astype(np.intp)


def convex_baseline_run(
    means: SubgroupMeans, eta: float, iterations: int, trace_every: int = 1
) -> tuple[np.ndarray, Trace]:
    """Plain subgradient descent on the unfactored l1 loss, from zero.

    Update: mu <- mu + eta * sign_statistic(means, mu). There is no
    initialization-scale separation here, which is exactly the contrast the
    factored run is measured against.
    """
    if iterations < 0:
        raise ParameterError(f"iterations must be >= 0, got {iterations}")
    mu = np.zeros(means.d)
    trace = Trace()
    trace.record(0, mu, sign_statistic(means, mu))
    for t in range(1, iterations + 1):
        s = sign_statistic(means, mu)
        mu = mu + eta * s
        _check_finite(mu, "mu", t)
        if t % trace_every == 0 or t == iterations:
            trace.record(t, mu, sign_statistic(means, mu))
    return mu, trace


def factored_l1_loss(u: np.ndarray, v: np.ndarray, means: SubgroupMeans) -> float:
    """(1 / 2J) * sum_j || mean_j - (u*u - v*v) ||_1."""
    mu = u * u - v * v
    return float(np.abs(means.means - mu[None, :]).sum() / (2 * means.j))


def convex_l1_loss(mu: np.ndarray, means: SubgroupMeans) -> float:
    """(1 / J) * sum_j || mean_j - mu ||_1."""
    return float(np.abs(means.means - mu[None, :]).sum() / means.j)
