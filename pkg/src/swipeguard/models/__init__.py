from .shrunk import ShrunkModel, train_shrunk, score_shrunk
from .bayes_gauss import (
    NIWParams,
    NIWPosterior,
    build_prior,
    cold_start_prior,
    posterior_update,
    posterior_downdate,
    posterior_predictive,
    score_bayes,
)
from .dp_mixture import (
    DPHyperParams,
    MixtureState,
    train_dpgmm,
    gibbs_sweep,
    score_dpgmm,
    component_count,
)

MODEL_TYPES = ("shrunk", "bayes_gauss", "dp_mixture")

__all__ = [
    "MODEL_TYPES",
    "ShrunkModel",
    "train_shrunk",
    "score_shrunk",
    "NIWParams",
    "NIWPosterior",
    "build_prior",
    "cold_start_prior",
    "posterior_update",
    "posterior_downdate",
    "posterior_predictive",
    "score_bayes",
    "DPHyperParams",
    "MixtureState",
    "train_dpgmm",
    "gibbs_sweep",
    "score_dpgmm",
    "component_count",
]
