"""Aggregated run configuration: every tunable across the pipeline in one
validated, JSON-loadable document. Precedence is flags > config file >
defaults; the effective values are echoed into every report."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .authenticator import DEFAULT_ENROLLMENT_TARGET, DEFAULT_QUANTILE
from .eval_harness import HarnessConfig
from .models.dp_mixture import DPHyperParams
from .stat_core import ShrinkageConfig
from .traces import QualityPolicy


@dataclass(frozen=True)
class RunConfig:
    model_types: tuple[str, ...] = ("shrunk", "bayes_gauss", "dp_mixture")
    grid: int = 10
    min_points: int = 8
    min_duration_ms: float = 50.0
    min_path_frac: float = 0.2
    alpha: float | None = None          # None = cross-validated
    k0: float = 0.01
    nu0: float | None = None            # None = d + 2
    dp_alpha: float = 1.0
    sigma0_sq: float = 1.0
    sigma_y_sq: float = 0.25
    dp_noise_from_population: bool = True
    quantile_q: float = DEFAULT_QUANTILE
    enrollment_target: int = DEFAULT_ENROLLMENT_TARGET
    n_train: int = 10
    seed: int = 0
    fidelity: float = 0.9
    prior_source: str = "population"    # population | cold_start

    def __post_init__(self):
        if self.prior_source not in ("population", "cold_start"):
            raise ValueError(f"unknown prior_source {self.prior_source!r}")
        if self.grid < 2:
            raise ValueError("grid must be at least 2")
        for m in self.model_types:
            if m not in ("shrunk", "bayes_gauss", "dp_mixture"):
                raise ValueError(f"unknown model type {m!r}")

    def quality_policy(self) -> QualityPolicy:
        return QualityPolicy(
            min_points=self.min_points,
            min_duration_ms=self.min_duration_ms,
            min_path_frac=self.min_path_frac,
        )

    def shrinkage(self) -> ShrinkageConfig:
        return ShrinkageConfig(alpha=self.alpha)

    def dp_hyper(self) -> DPHyperParams:
        return DPHyperParams(
            alpha=self.dp_alpha, sigma0_sq=self.sigma0_sq, sigma_y_sq=self.sigma_y_sq
        )

    def harness(self, model_types: tuple[str, ...] | None = None) -> HarnessConfig:
        return HarnessConfig(
            model_types=model_types or self.model_types,
            n_train=self.n_train,
            grid=self.grid,
            quality=self.quality_policy(),
            shrinkage=self.shrinkage(),
            dp_hyper=self.dp_hyper(),
            dp_noise_from_population=self.dp_noise_from_population,
            prior_source=self.prior_source,
            k0=self.k0,
            seed=self.seed,
        )


def load_config(document: dict | None = None, **flag_overrides) -> RunConfig:
    """Merge a config-file document and CLI flag overrides onto the
    defaults; unknown keys are rejected."""
    known = {f.name for f in fields(RunConfig)}
    merged: dict = {}
    for source in (document or {}, {k: v for k, v in flag_overrides.items() if v is not None}):
        unknown = set(source) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(source)
    if "model_types" in merged:
        merged["model_types"] = tuple(merged["model_types"])
    return RunConfig(**merged)
