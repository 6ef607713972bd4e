"""
Gibbs posterior inference on Youden index cutoffs for ordered diagnostic
classes, with or without a continuous covariate
"""
__version__ = "0.1.0"

from youden_gibbs.core import (ClassProbs, ClassWeights, CredibleInterval, CutoffVector, Dataset,
                               Observation, PosteriorChain, estimate_class_probs,
                               known_class_probs, validate)
from youden_gibbs.objective import (BSplineBasis, SplineModel, age_study_knots, covariate_risk,
                                    multiclass_risk, uniform_knots, youden_index_at)
from youden_gibbs.mestimator import (bootstrap_intervals, minimize_covariate, minimize_multiclass,
                                     prior_from_split)
from youden_gibbs.prior import BetaPriorSpec, OrderedNormalSpec
from youden_gibbs.sampler import (GibbsPosteriorSpec, SamplerConfig, posterior_curve, run_chain,
                                  summarize)
from youden_gibbs.calibration import GpcConfig, calibrate

__all__ = [
    "__version__",
    "ClassProbs", "ClassWeights", "CredibleInterval", "CutoffVector", "Dataset", "Observation",
    "PosteriorChain", "estimate_class_probs", "known_class_probs", "validate",
    "BSplineBasis", "SplineModel", "covariate_risk", "multiclass_risk", "age_study_knots",
    "uniform_knots", "youden_index_at",
    "bootstrap_intervals", "minimize_covariate", "minimize_multiclass", "prior_from_split",
    "BetaPriorSpec", "OrderedNormalSpec",
    "GibbsPosteriorSpec", "SamplerConfig", "posterior_curve", "run_chain", "summarize",
    "GpcConfig", "calibrate",
]
