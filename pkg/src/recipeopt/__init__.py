"""Mixed-variable Bayesian optimization with an expert-knowledge simulation
harness and an SVR surrogate objective."""

from .acquisition import (
    AcquisitionConfig,
    AveragedAcquisition,
    averaged_acquisition,
    expected_improvement,
    maximize_acquisition,
)
from .expert import (
    Benchmark,
    Dataset,
    ExpertRule,
    QualityDistribution,
    QualityModel,
    cesar_benchmark,
    generate_dataset,
    hotdog_benchmark,
    jury_mean,
    load_benchmark,
    load_real_dataset,
    sample_quality,
)
from .gp import (
    GPPosterior,
    HyperparamBounds,
    KernelHyperparams,
    gp_fit,
    gp_predict,
    log_marginal_likelihood,
    log_marginal_likelihood_gradient,
    matern52,
    optimize_hyperparams,
    sample_hyperparams,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    export_report,
    histogram,
    most_voted_recipe,
    run_experiment,
)
from .optimizer import (
    OptimizationConfig,
    Trace,
    bo_run,
    random_search_run,
    recommend,
)
from .space import (
    CategoricalVar,
    IntegerVar,
    RealVar,
    SearchSpace,
    SpaceError,
    load_space,
)
from .svr import (
    SVRHyperparams,
    SVRModel,
    grid_search_cv,
    kfold_split,
    svr_fit,
    svr_predict,
)

__version__ = "0.1.0"
