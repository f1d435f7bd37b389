"""Two-stage robust sparse mean estimation under strong contamination.

Stage 1 finds the support of a sparse mean from heavy-tailed, partially
corrupted samples by running a multiplicative subgradient method on subgroup
means. Stage 2 re-estimates the mean densely on the recovered support with a
spectral outlier filter. The rest of the package is a seeded simulation
harness around those two stages.
"""

__version__ = "0.1.0"

from .config import (
    ExperimentConfig,
    PointSpec,
    load_config,
    parse_config,
)
from .contamination import (
    ConstantBias,
    ContaminationSpec,
    HeavyTailOutliers,
    NoContamination,
    PointMass,
    apply_contamination,
    make_lower_bound_adversary,
    outlier_magnitude,
)
from .densefilter import (
    CoordMoM,
    IterativeFilter,
    assemble_full_estimate,
    dense_robust_mean,
    project_to_support,
    robust_variance_bound,
)
from .errors import (
    ConfigError,
    NumericError,
    ParameterError,
    ShapeError,
    StateError,
)
from .mom import (
    SubgroupMeans,
    SubgroupPlan,
    SubgroupRule,
    make_plan,
    mom_1d,
    mom_coordinatewise,
    sign_statistic,
    subgroup_means,
)
from .pipeline import (
    ESTIMATOR_NAMES,
    ConvexBaseline,
    CoordMoMBaseline,
    EstimateReport,
    Full,
    Oracle,
    Stage1Only,
    estimator_name,
    evaluate,
    run_estimator,
    support_jaccard,
)
from .sampling import (
    InlierDistribution,
    SampleMatrix,
    SparseMeanSpec,
    density,
    sample_inliers,
)
from .runner import (
    ResultRow,
    run_bench,
    run_experiment,
    run_trace,
    trial_seed,
)
from .subgm import (
    FactoredIterate,
    SubgmConfig,
    Trace,
    convex_baseline_run,
    convex_l1_loss,
    factored_l1_loss,
    identify_support,
    subgm_run,
    subgm_step,
)

__all__ = [
    "__version__",
    "ExperimentConfig",
    "PointSpec",
    "load_config",
    "parse_config",
    "ConstantBias",
    "ContaminationSpec",
    "HeavyTailOutliers",
    "NoContamination",
    "PointMass",
    "apply_contamination",
    "make_lower_bound_adversary",
    "outlier_magnitude",
    "CoordMoM",
    "IterativeFilter",
    "assemble_full_estimate",
    "dense_robust_mean",
    "project_to_support",
    "robust_variance_bound",
    "ConfigError",
    "NumericError",
    "ParameterError",
    "ShapeError",
    "StateError",
    "SubgroupMeans",
    "SubgroupPlan",
    "SubgroupRule",
    "make_plan",
    "mom_1d",
    "mom_coordinatewise",
    "sign_statistic",
    "subgroup_means",
    "ESTIMATOR_NAMES",
    "ConvexBaseline",
    "CoordMoMBaseline",
    "EstimateReport",
    "Full",
    "Oracle",
    "Stage1Only",
    "estimator_name",
    "evaluate",
    "run_estimator",
    "support_jaccard",
    "InlierDistribution",
    "SampleMatrix",
    "SparseMeanSpec",
    "density",
    "sample_inliers",
    "ResultRow",
    "run_bench",
    "run_experiment",
    "run_trace",
    "trial_seed",
    "FactoredIterate",
    "SubgmConfig",
    "Trace",
    "convex_baseline_run",
    "convex_l1_loss",
    "factored_l1_loss",
    "identify_support",
    "subgm_run",
    "subgm_step",
]
