"""Model-agnostic enrollment and decision layer.

A profile collects feature vectors until its enrollment target, trains the
configured model, calibrates an accept threshold from training-sample
likelihoods, and then answers accept/reject per attempt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import PopulationStats, standardize
from .models import bayes_gauss, dp_mixture, shrunk
from .stat_core import ShrinkageConfig, SingularModelError

DEFAULT_ENROLLMENT_TARGET = 10
DEFAULT_QUANTILE = 5.0

ENROLLING = "enrolling"
TRAINED = "trained"
FAILED = "failed_enrollment"


class NotReadyError(RuntimeError):
    """Authentication requested before the profile finished enrolling."""


@dataclass(frozen=True)
class Decision:
    score: float
    threshold: float
    accept: bool
    model_type: str


@dataclass
class TrainedModel:
    """A scoreable model plus the feature statistics it was trained under."""

    model_type: str
    payload: object
    feature_stats: PopulationStats

    def score(self, feature: np.ndarray) -> float:
        z = (np.asarray(feature, float) - self.feature_stats.mean) / self.feature_stats.std
        if self.model_type == "shrunk":
            return shrunk.score_shrunk(self.payload, z)
        if self.model_type == "bayes_gauss":
            return bayes_gauss.score_bayes(self.payload, z)
        if self.model_type == "dp_mixture":
            return dp_mixture.score_dpgmm(self.payload, z)
        raise ValueError(f"unknown model type {self.model_type!r}")

    def to_dict(self) -> dict:
        doc = self.payload.to_dict()
        doc["feature_stats"] = self.feature_stats.to_dict()
        return doc

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainedModel":
        model_type = obj.get("model_type")
        loader = {
            "shrunk": shrunk.ShrunkModel.from_dict,
            "bayes_gauss": bayes_gauss.NIWPosterior.from_dict,
            "dp_mixture": dp_mixture.MixtureState.from_dict,
        }.get(model_type)
        if loader is None:
            raise ValueError(f"unknown model type {model_type!r}")
        stats = PopulationStats.from_dict(obj["feature_stats"])
        return cls(model_type=model_type, payload=loader(obj), feature_stats=stats)


@dataclass(frozen=True)
class TrainingConfig:
    model_type: str = "shrunk"
    quantile_q: float = DEFAULT_QUANTILE
    shrinkage: ShrinkageConfig = ShrinkageConfig()
    prior: bayes_gauss.NIWParams | None = None   # bayes_gauss; None = cold start
    grid: int | None = None                      # cold-start position channels
    dp_hyper: dp_mixture.DPHyperParams = dp_mixture.DPHyperParams()
    dp_seed: int = 0
    feature_stats: PopulationStats | None = None  # None = fit from enrollment data


@dataclass
class Profile:
    profile_id: str
    config: TrainingConfig = field(default_factory=TrainingConfig)
    enrollment_target: int = DEFAULT_ENROLLMENT_TARGET
    state: str = ENROLLING
    enrolled_features: list[np.ndarray] = field(default_factory=list)
    model: TrainedModel | None = None
    threshold: float | None = None
    failure_reason: str | None = None

    @property
    def model_type(self) -> str:
        return self.config.model_type


def train_model(
    features: list[np.ndarray], config: TrainingConfig
) -> tuple[TrainedModel, list[float]]:
    """Train the configured model on raw feature vectors; returns the model
    and its calibration scores (leave-one-out where cheap)."""
    stats = config.feature_stats
    if stats is None and config.prior is not None:
        raise ValueError("a population prior requires the population's feature stats")
    if stats is None and config.model_type == "bayes_gauss":
        # cold-start prior beliefs are expressed in normalized screen units,
        # so the features must not be rescaled
        stats = PopulationStats.identity(len(features[0]))
    z, stats = standardize(features, stats)

    if config.model_type == "shrunk":
        model = shrunk.train_shrunk(z, alpha=config.shrinkage.alpha, shrinkage=config.shrinkage)
        trained = TrainedModel("shrunk", model, stats)
        cal = _loo_scores_shrunk(z, model.alpha, stats)
        return trained, cal if cal is not None else list(model.train_loglik)

    if config.model_type == "bayes_gauss":
        prior = config.prior
        if prior is None:
            prior = bayes_gauss.cold_start_prior(len(z[0]), grid=config.grid)
        post = bayes_gauss.posterior_update(prior, z)
        post.feature_stats = stats
        trained = TrainedModel("bayes_gauss", post, stats)
        cal = [
            bayes_gauss.score_bayes(bayes_gauss.posterior_downdate(post, x), x) for x in z
        ]
        return trained, cal

    if config.model_type == "dp_mixture":
        state = dp_mixture.train_dpgmm(
            z, config.dp_hyper, seed=config.dp_seed, feature_stats=stats
        )
        trained = TrainedModel("dp_mixture", state, stats)
        # LOO retraining of a Gibbs chain per fold is disproportionate;
        # in-sample scores carry a documented optimistic bias
        cal = [dp_mixture.score_dpgmm(state, x) for x in z]
        return trained, cal

    raise ValueError(f"unknown model type {config.model_type!r}")


def _loo_scores_shrunk(z, alpha, stats) -> list[float] | None:
    scores = []
    n = len(z)
    for i in range(n):
        rest = [z[j] for j in range(n) if j != i]
        try:
            model = shrunk.train_shrunk(rest, alpha=alpha)
        except (SingularModelError, ValueError):
            return None
        scores.append(shrunk.score_shrunk(model, z[i]))
    return scores


def calibrate(calibration_scores: list[float], quantile_q: float = DEFAULT_QUANTILE) -> float:
    """Threshold = q-th percentile (linear interpolation) of the calibration
    scores."""
    scores = np.asarray(calibration_scores, dtype=float)
    if scores.size < 2:
        raise ValueError("need at least 2 calibration scores")
    if not np.all(np.isfinite(scores)):
        raise ValueError("non-finite calibration scores")
    return float(np.percentile(scores, quantile_q))


def enroll(profile: Profile, feature: np.ndarray) -> Profile:
    """Append one quality-gated feature vector; trains and calibrates when
    the enrollment target is reached. Mutates and returns the profile."""
    if profile.state != ENROLLING:
        raise ValueError(f"profile {profile.profile_id} is {profile.state}, not enrolling")
    profile.enrolled_features.append(np.asarray(feature, dtype=float))
    if len(profile.enrolled_features) < profile.enrollment_target:
        return profile
    try:
        model, cal_scores = train_model(profile.enrolled_features, profile.config)
        profile.threshold = calibrate(cal_scores, profile.config.quantile_q)
        profile.model = model
        profile.state = TRAINED
    except (SingularModelError, ValueError) as exc:
        profile.state = FAILED
        profile.failure_reason = str(exc)
    return profile


def authenticate(profile: Profile, feature: np.ndarray) -> Decision:
    """Score one attempt against a trained profile; accept iff the score
    reaches the calibrated threshold. Never mutates the profile."""
    if profile.state != TRAINED or profile.model is None or profile.threshold is None:
        raise NotReadyError(f"profile {profile.profile_id} is not trained")
    score = profile.model.score(feature)
    return Decision(
        score=score,
        threshold=profile.threshold,
        accept=bool(score >= profile.threshold),
        model_type=profile.model_type,
    )


def profile_to_dict(profile: Profile) -> dict:
    return {
        "version": 1,
        "profile_id": profile.profile_id,
        "state": profile.state,
        "model_type": profile.model_type,
        "enrollment_target": profile.enrollment_target,
        "enrolled_features": [f.tolist() for f in profile.enrolled_features],
        "model": profile.model.to_dict() if profile.model else None,
        "threshold": profile.threshold,
        "quantile_q": profile.config.quantile_q,
        "failure_reason": profile.failure_reason,
    }


def profile_from_dict(obj: dict, config: TrainingConfig | None = None) -> Profile:
    config = config or TrainingConfig(model_type=obj.get("model_type", "shrunk"))
    profile = Profile(
        profile_id=obj["profile_id"],
        config=config,
        enrollment_target=int(obj["enrollment_target"]),
        state=obj["state"],
        enrolled_features=[np.asarray(f, float) for f in obj["enrolled_features"]],
        threshold=obj.get("threshold"),
        failure_reason=obj.get("failure_reason"),
    )
    if obj.get("model"):
        profile.model = TrainedModel.from_dict(obj["model"])
    return profile
