"""Single-Gaussian novelty detector with a diagonally shrunk covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import PopulationStats
from ..stat_core import (
    GaussianParams,
    ShrinkageConfig,
    SingularModelError,
    gaussian_logpdf,
    mle_cov,
    select_alpha,
    shrink_cov,
)


@dataclass
class ShrunkModel:
    gaussian: GaussianParams
    alpha: float
    train_loglik: list[float]
    feature_stats: PopulationStats | None = None

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "model_type": "shrunk",
            "alpha": self.alpha,
            "mean": self.gaussian.mean.tolist(),
            "cov": self.gaussian.cov.flatten().tolist(),
            "train_loglik": list(self.train_loglik),
            "feature_stats": self.feature_stats.to_dict() if self.feature_stats else None,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ShrunkModel":
        if obj.get("model_type") != "shrunk":
            raise ValueError("not a shrunk-covariance model document")
        mean = np.asarray(obj["mean"], float)
        d = mean.shape[0]
        return cls(
            gaussian=GaussianParams(mean=mean, cov=np.asarray(obj["cov"], float).reshape(d, d)),
            alpha=float(obj["alpha"]),
            train_loglik=[float(v) for v in obj["train_loglik"]],
            feature_stats=PopulationStats.from_dict(obj["feature_stats"])
            if obj.get("feature_stats")
            else None,
        )


def train_shrunk(
    features: list[np.ndarray],
    alpha: float | None = None,
    shrinkage: ShrinkageConfig = ShrinkageConfig(),
    feature_stats: PopulationStats | None = None,
) -> ShrunkModel:
    """Fit mean and shrunk covariance; alpha=None selects the strength by
    cross-validation. Falls back to the fully diagonal estimate (alpha=0)
    when the requested shrinkage leaves the covariance singular."""
    mat = np.asarray(features, dtype=float)
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise ValueError("need at least 2 training samples")
    base = mle_cov(mat)
    if alpha is None:
        try:
            alpha = select_alpha([mat], shrinkage, scoring="per_profile")
        except SingularModelError:
            alpha = 0.0
    for candidate in dict.fromkeys([float(alpha), 0.0]):
        params = GaussianParams(mean=base.mean, cov=shrink_cov(base.cov, candidate))
        try:
            params.chol()
        except SingularModelError:
            continue
        loglik = [gaussian_logpdf(params, x) for x in mat]
        return ShrunkModel(
            gaussian=params, alpha=candidate, train_loglik=loglik, feature_stats=feature_stats
        )
    raise SingularModelError("covariance singular even at alpha=0")


def score_shrunk(model: ShrunkModel, x: np.ndarray) -> float:
    """Model log-likelihood of a test sample; higher means more genuine."""
    return gaussian_logpdf(model.gaussian, x)
