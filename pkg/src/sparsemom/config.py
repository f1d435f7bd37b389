"""Experiment configs: a flat key = value text format and its resolution.

The format is deliberately dumb. One `key = value` per line, `#` starts a
comment, blank lines ignored, no sections, no nesting. Every key is listed in
_CONVERTERS below; anything else is rejected with its line number. A config
describes one experiment: a data point (distribution, mean, n, epsilon,
contamination), an estimator roster with hyperparameters, and an optional
sweep axis replicated over seeded trials.

Example::

    distribution  = fisk
    tail_param    = 3.1
    d             = 100
    mean_entries  = 0:10, 1:-5, 2:-4, 3:2
    n             = 600
    epsilon       = 0.1
    contamination = constant_bias
    estimators    = stage1, full, oracle
    sweep         = epsilon
    sweep_values  = 0.05, 0.1, 0.2, 0.3
    trials        = 50
    base_seed     = 7
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .contamination import (
    ConstantBias,
    ContaminationSpec,
    HeavyTailOutliers,
    NoContamination,
    PointMass,
)
from .densefilter import CoordMoM, IterativeFilter
from .errors import ConfigError
from .mom import SubgroupRule
from .pipeline import (
    ConvexBaseline,
    CoordMoMBaseline,
    EstimatorKind,
    Full,
    Oracle,
    Stage1Only,
)
from .sampling import FAMILIES, InlierDistribution, SparseMeanSpec
from .subgm import SubgmConfig

SWEEP_AXES = ("none", "epsilon", "k", "tail_param", "n", "d")
CONTAMINATION_KINDS = ("none", "constant_bias", "heavy_tail", "point_mass")
STAGE2_KINDS = ("filter", "coord_mom")
ESTIMATORS = ("stage1", "full", "coord_mom", "convex", "oracle")

# Appendix-scale defaults; iterations stay None so each estimator kind can
# pick its own (600 for the bare subgradient stage, 200 for the full pipeline).
DEFAULT_ALPHA = 1e-5
DEFAULT_ETA = 0.05
DEFAULT_ITERATIONS = {"stage1": 600, "full": 200, "convex": 600}


@dataclass(frozen=True)
class PointSpec:
    """One fully resolved sweep point."""

    distribution: InlierDistribution
    mean: SparseMeanSpec
    n: int
    epsilon: float
    contamination: ContaminationSpec | None  # None: leave the data clean


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: InlierDistribution
    mean: SparseMeanSpec
    n: int | None
    n_per_k: int | None
    epsilon: float
    contamination: str
    bias_shift: float
    outlier_location: float
    outlier_scale: float
    point_mass_value: float
    estimators: tuple[str, ...]
    alpha: float
    eta: float
    iterations: int | None
    support_multiplier: float
    subgroup_rule: SubgroupRule
    stage2: str
    filter_max_rounds: int
    filter_quantile: float | None
    sigma2: float | None
    convex_eta: float | None
    convex_iterations: int | None
    sweep: str
    sweep_values: tuple
    mean_fill: float | None
    trials: int
    base_seed: int
    out_dir: str

    def sweep_points(self) -> list:
        """Sweep values in config order; a no-sweep config has the single value 0."""
        if self.sweep == "none":
            return [0]
        return list(self.sweep_values)

    def resolve_point(self, value) -> PointSpec:
        dist = self.distribution
        mean = self.mean
        n = self.n
        epsilon = self.epsilon
        if self.sweep == "epsilon":
            epsilon = float(value)
        elif self.sweep == "tail_param":
            dist = InlierDistribution(dist.family, float(value))
        elif self.sweep == "n":
            n = int(value)
        elif self.sweep == "d":
            mean = SparseMeanSpec(dimension=int(value), entries=mean.entries)
        elif self.sweep == "k":
            k = int(value)
            fill = self.mean_fill if self.mean_fill is not None else 10.0
            mean = SparseMeanSpec(
                dimension=mean.dimension,
                entries=tuple((i, fill) for i in range(k)),
            )
        if self.n_per_k is not None:
            n = self.n_per_k * mean.k
        if n is None:
            n = 600
        strategy = None
        if self.contamination == "constant_bias":
            strategy = ConstantBias(shift=self.bias_shift, mean=mean.dense())
        elif self.contamination == "heavy_tail":
            strategy = HeavyTailOutliers(location=self.outlier_location, scale=self.outlier_scale)
        elif self.contamination == "point_mass":
            strategy = PointMass(value=self.point_mass_value)
        contamination = None
        if strategy is not None and epsilon > 0:
            contamination = ContaminationSpec(epsilon=epsilon, strategy=strategy)
        return PointSpec(
            distribution=dist, mean=mean, n=n, epsilon=epsilon, contamination=contamination
        )

    def subgm_for(self, name: str, trace_every: int | None = None) -> SubgmConfig:
        total = self.iterations
        if total is None:
            total = DEFAULT_ITERATIONS.get(name, 600)
        stride = trace_every if trace_every is not None else max(1, total)
        return SubgmConfig(
            alpha=self.alpha,
            eta=self.eta,
            iterations=total,
            trace_every=stride,
            support_multiplier=self.support_multiplier,
        )

    def kind_for(self, name: str) -> EstimatorKind:
        if name == "stage1":
            return Stage1Only()
        if name == "full":
            if self.stage2 == "coord_mom":
                return Full(dense=CoordMoM(rule=self.subgroup_rule))
            return Full(
                dense=IterativeFilter(
                    max_rounds=self.filter_max_rounds, score_quantile=self.filter_quantile
                )
            )
        if name == "coord_mom":
            return CoordMoMBaseline(rule=self.subgroup_rule)
        if name == "convex":
            return ConvexBaseline(eta=self.convex_eta, iterations=self.convex_iterations)
        if name == "oracle":
            return Oracle()
        raise ConfigError(f"unknown estimator {name!r}", key="estimators")

    def planned_runs(self) -> int:
        return len(self.sweep_points()) * len(self.estimators) * self.trials

    def point_sigma2(self, point: PointSpec) -> float | None:
        """Variance passed to the stage-2 filter: config wins, else the family's."""
        if self.sigma2 is not None:
            return self.sigma2
        variance = point.distribution.variance()
        if not math.isfinite(variance):
            return None  # infinite variance: let the filter estimate a bound
        return variance


_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_N_RULE_RE = re.compile(r"^(\d+)\s*\*\s*k$")


def _to_float(raw: str) -> float:
    if not _FLOAT_RE.match(raw):
        raise ValueError
    return float(raw)


def _to_int(raw: str) -> int:
    if not re.match(r"^[+-]?\d+$", raw):
        raise ValueError
    return int(raw)


def _to_list(raw: str) -> list[str]:
    items = [piece.strip() for piece in raw.split(",")]
    return [piece for piece in items if piece]


def _to_mean_entries(raw: str) -> tuple:
    entries = []
    for piece in _to_list(raw):
        idx, _, val = piece.partition(":")
        entries.append((_to_int(idx.strip()), _to_float(val.strip())))
    if not entries:
        raise ValueError
    return tuple(entries)


# key -> (converter, human-readable type used in error messages)
_CONVERTERS = {
    "distribution": (str, "distribution family"),
    "tail_param": (_to_float, "positive real"),
    "d": (_to_int, "positive integer"),
    "mean_entries": (_to_mean_entries, "index:value list"),
    "k": (_to_int, "positive integer"),
    "mean_fill": (_to_float, "real"),
    "n": (_to_int, "positive integer"),
    "n_rule": (str, "INT*k"),
    "epsilon": (_to_float, "real in [0, 0.5)"),
    "contamination": (str, "contamination kind"),
    "bias_shift": (_to_float, "real"),
    "outlier_location": (_to_float, "real"),
    "outlier_scale": (_to_float, "positive real"),
    "point_mass_value": (_to_float, "real"),
    "estimators": (_to_list, "estimator list"),
    "alpha": (_to_float, "real in (0, 1)"),
    "eta": (_to_float, "real in (0, 1]"),
    "iterations": (_to_int, "nonnegative integer"),
    "support_multiplier": (_to_float, "real >= 1"),
    "subgroup_rule": (str, "theory | practical | fixed"),
    "subgroup_fixed_j": (_to_int, "positive integer"),
    "stage2": (str, "filter | coord_mom"),
    "filter_max_rounds": (_to_int, "positive integer"),
    "filter_quantile": (_to_float, "real in (0.5, 1)"),
    "sigma2": (_to_float, "positive real"),
    "convex_eta": (_to_float, "real in (0, 1]"),
    "convex_iterations": (_to_int, "nonnegative integer"),
    "sweep": (str, "sweep axis"),
    "sweep_values": (_to_list, "number list"),
    "trials": (_to_int, "positive integer"),
    "base_seed": (_to_int, "unsigned 64-bit integer"),
    "out_dir": (str, "path"),
}


def _parse_lines(text: str) -> dict[str, tuple]:
    """Raw key -> (value string, line number), with syntax checks."""
    seen: dict[str, tuple] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key = value", line=lineno, key=line.split()[0])
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if key in seen:
            raise ConfigError(f"duplicate key (first on line {seen[key][1]})", line=lineno, key=key)
        if not value:
            raise ConfigError("empty value", line=lineno, key=key)
        seen[key] = (value, lineno)
    return seen


class _Fields:
    """Typed view over the raw key/value map, tracking line numbers for errors."""

    def __init__(self, raw: dict[str, tuple]):
        self.raw = raw

    def line(self, key: str) -> int:
        return self.raw[key][1] if key in self.raw else 0

    def get(self, key: str, default=None):
        if key not in self.raw:
            return default
        value, lineno = self.raw[key]
        converter, type_name = _CONVERTERS[key]
        try:
            return converter(value)
        except ValueError:
            raise ConfigError(f"expected {type_name}, got {value!r}", line=lineno, key=key) from None

    def fail(self, key: str, message: str):
        raise ConfigError(message, line=self.line(key), key=key)


def _build_mean(fields: _Fields) -> SparseMeanSpec:
    d = fields.get("d", 100)
    if d < 1:
        fields.fail("d", f"d must be >= 1, got {d}")
    entries = fields.get("mean_entries")
    k = fields.get("k")
    fill = fields.get("mean_fill")
    if entries is not None and fill is not None:
        fields.fail("mean_fill", "mean_fill conflicts with mean_entries")
    if entries is None:
        if k is None and fill is None:
            entries = ((0, 10.0), (1, -5.0), (2, -4.0), (3, 2.0))  # simulation default
        else:
            kk = k if k is not None else 4
            if kk < 0:
                fields.fail("k", f"k must be >= 0, got {kk}")
            entries = tuple((i, fill if fill is not None else 10.0) for i in range(kk))
    elif k is not None and k != len(entries):
        fields.fail("k", f"k={k} but mean_entries has {len(entries)} entries")
    try:
        return SparseMeanSpec(dimension=d, entries=entries)
    except ValueError as exc:
        for key in ("mean_entries", "mean_fill", "k", "d"):
            if key in fields.raw:
                fields.fail(key, str(exc))
        fields.fail("d", str(exc))


def _build_sweep(fields: _Fields, mean_fill) -> tuple[str, tuple]:
    sweep = fields.get("sweep", "none")
    if sweep not in SWEEP_AXES:
        fields.fail("sweep", f"sweep must be one of {', '.join(SWEEP_AXES)}, got {sweep!r}")
    raw_values = fields.get("sweep_values")
    if sweep == "none":
        if raw_values is not None:
            fields.fail("sweep_values", "sweep_values given but sweep = none")
        return sweep, ()
    if raw_values is None:
        fields.fail("sweep_values", f"sweep = {sweep} requires sweep_values")
    integer_axis = sweep in ("k", "n", "d")
    values = []
    for piece in raw_values:
        try:
            values.append(_to_int(piece) if integer_axis else _to_float(piece))
        except ValueError:
            kind = "integer" if integer_axis else "number"
            fields.fail("sweep_values", f"expected {kind} list, got {piece!r}")
    if not values:
        fields.fail("sweep_values", "sweep_values must be nonempty")
    if sweep == "epsilon" and not all(0 <= v < 0.5 for v in values):
        fields.fail("sweep_values", "epsilon sweep values must lie in [0, 0.5)")
    if integer_axis and not all(v >= 1 for v in values):
        fields.fail("sweep_values", f"{sweep} sweep values must be >= 1")
    if sweep == "tail_param" and not all(v > 0 for v in values):
        fields.fail("sweep_values", "tail_param sweep values must be > 0")
    if sweep == "k" and mean_fill is None and "mean_entries" in fields.raw:
        fields.fail("mean_entries", "a k sweep needs mean_fill, not mean_entries")
    return sweep, tuple(values)


def parse_config(text: str) -> ExperimentConfig:
    fields = _Fields(_parse_lines(text))

    family = fields.get("distribution", "fisk")
    if family not in FAMILIES:
        fields.fail("distribution", f"must be one of {', '.join(FAMILIES)}, got {family!r}")
    tail_param = fields.get("tail_param", 3.1)
    try:
        distribution = InlierDistribution(family=family, param=tail_param)
    except ValueError as exc:
        fields.fail("tail_param", str(exc))

    mean = _build_mean(fields)

    n = fields.get("n")
    n_rule = fields.get("n_rule")
    n_per_k = None
    if n_rule is not None:
        if n is not None:
            fields.fail("n_rule", "n_rule conflicts with an explicit n")
        match = _N_RULE_RE.match(n_rule)
        if not match:
            fields.fail("n_rule", f"expected INT*k, got {n_rule!r}")
        n_per_k = int(match.group(1))
        if n_per_k < 1:
            fields.fail("n_rule", "multiplier must be >= 1")
    if n is not None and n < 1:
        fields.fail("n", f"n must be >= 1, got {n}")

    epsilon = fields.get("epsilon", 0.1)
    if not (0 <= epsilon < 0.5):
        fields.fail("epsilon", f"epsilon must lie in [0, 0.5), got {epsilon}")

    contamination = fields.get("contamination", "constant_bias")
    if contamination not in CONTAMINATION_KINDS:
        fields.fail(
            "contamination",
            f"must be one of {', '.join(CONTAMINATION_KINDS)}, got {contamination!r}",
        )
    outlier_scale = fields.get("outlier_scale", math.sqrt(50.0))
    if not outlier_scale > 0:
        fields.fail("outlier_scale", f"scale must be > 0, got {outlier_scale}")

    names = fields.get("estimators", ["stage1", "full"])
    if not names:
        fields.fail("estimators", "estimator list must be nonempty")
    for name in names:
        if name not in ESTIMATORS:
            fields.fail("estimators", f"unknown estimator {name!r} (know {', '.join(ESTIMATORS)})")
    if len(set(names)) != len(names):
        fields.fail("estimators", "estimator list has duplicates")

    alpha = fields.get("alpha", DEFAULT_ALPHA)
    eta = fields.get("eta", DEFAULT_ETA)
    iterations = fields.get("iterations")
    if iterations is not None and iterations < 0:
        fields.fail("iterations", f"iterations must be >= 0, got {iterations}")
    support_multiplier = fields.get("support_multiplier", 1.0)

    rule_kind = fields.get("subgroup_rule", "practical")
    fixed_j = fields.get("subgroup_fixed_j")
    if rule_kind == "theory":
        rule = SubgroupRule.theory()
    elif rule_kind == "practical":
        rule = SubgroupRule.practical()
    elif rule_kind == "fixed":
        if fixed_j is None:
            fields.fail("subgroup_rule", "fixed rule requires subgroup_fixed_j")
        if fixed_j < 1:
            fields.fail("subgroup_fixed_j", f"must be >= 1, got {fixed_j}")
        rule = SubgroupRule.fixed(fixed_j)
    else:
        fields.fail("subgroup_rule", f"must be theory, practical or fixed, got {rule_kind!r}")
    if rule_kind != "fixed" and fixed_j is not None:
        fields.fail("subgroup_fixed_j", "only meaningful with subgroup_rule = fixed")

    stage2 = fields.get("stage2", "filter")
    if stage2 not in STAGE2_KINDS:
        fields.fail("stage2", f"must be one of {', '.join(STAGE2_KINDS)}, got {stage2!r}")
    filter_max_rounds = fields.get("filter_max_rounds", 50)
    if filter_max_rounds < 1:
        fields.fail("filter_max_rounds", f"must be >= 1, got {filter_max_rounds}")
    filter_quantile = fields.get("filter_quantile")
    if filter_quantile is not None and not (0.5 < filter_quantile < 1):
        fields.fail("filter_quantile", f"must lie in (0.5, 1), got {filter_quantile}")
    sigma2 = fields.get("sigma2")
    if sigma2 is not None and not sigma2 > 0:
        fields.fail("sigma2", f"must be > 0, got {sigma2}")

    convex_eta = fields.get("convex_eta")
    convex_iterations = fields.get("convex_iterations")
    if convex_iterations is not None and convex_iterations < 0:
        fields.fail("convex_iterations", f"must be >= 0, got {convex_iterations}")

    mean_fill = fields.get("mean_fill")
    sweep, sweep_values = _build_sweep(fields, mean_fill)

    trials = fields.get("trials", 10)
    if trials < 1:
        fields.fail("trials", f"trials must be >= 1, got {trials}")
    base_seed = fields.get("base_seed", 1)
    if not (0 <= base_seed < 2**64):
        fields.fail("base_seed", "base_seed must fit in 64 unsigned bits")

    cfg = ExperimentConfig(
        distribution=distribution,
        mean=mean,
        n=n,
        n_per_k=n_per_k,
        epsilon=epsilon,
        contamination=contamination,
        bias_shift=fields.get("bias_shift", 2.0),
        outlier_location=fields.get("outlier_location", 20.0),
        outlier_scale=outlier_scale,
        point_mass_value=fields.get("point_mass_value", 0.0),
        estimators=tuple(names),
        alpha=alpha,
        eta=eta,
        iterations=iterations,
        support_multiplier=support_multiplier,
        subgroup_rule=rule,
        stage2=stage2,
        filter_max_rounds=filter_max_rounds,
        filter_quantile=filter_quantile,
        sigma2=sigma2,
        convex_eta=convex_eta,
        convex_iterations=convex_iterations,
        sweep=sweep,
        sweep_values=sweep_values,
        mean_fill=mean_fill,
        trials=trials,
        base_seed=base_seed,
        out_dir=fields.get("out_dir", "results"),
    )
    # Fail fast on invalid hyperparameters instead of inside the first trial.
    try:
        SubgmConfig(alpha=alpha, eta=eta, support_multiplier=support_multiplier)
        if convex_eta is not None:
            SubgmConfig(alpha=alpha, eta=convex_eta)
    except ValueError as exc:
        message = str(exc)
        key = "alpha" if "alpha" in message else "support_multiplier" if "multiplier" in message else "eta"
        fields.fail(key, message)
    if cfg.n_per_k is not None and cfg.mean.k == 0 and cfg.sweep != "k":
        fields.fail("n_rule", "n_rule = INT*k needs a nonempty mean")
    for value in cfg.sweep_points():
        try:
            cfg.resolve_point(value)
        except ValueError as exc:
            fields.fail("sweep_values", f"value {value}: {exc}")
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())
