"""Bayesian multivariate Gaussian with a normal-inverse-Wishart prior.

The prior covariance matrix is built from the shrunk pooled covariance of a
user population when one is available; prediction uses the closed-form
Student-t posterior predictive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import PopulationStats, position_dims
from ..stat_core import (
    ShrinkageConfig,
    StudentTParams,
    grand_mean,
    pooled_cov,
    select_alpha,
    shrink_cov,
    student_t_logpdf,
)

DEFAULT_K0 = 0.01
DEFAULT_POSITION_VAR = 0.0225  # prior belief: position std 15% of screen
DEFAULT_CHANNEL_VAR = 1.0


@dataclass
class NIWParams:
    mu0: np.ndarray
    k0: float
    nu0: float
    psi0: np.ndarray

    def __post_init__(self):
        self.mu0 = np.asarray(self.mu0, dtype=float)
        self.psi0 = np.asarray(self.psi0, dtype=float)
        d = self.mu0.shape[0]
        if self.k0 <= 0:
            raise ValueError("k0 must be positive")
        if self.nu0 <= d - 1:
            raise ValueError("nu0 must exceed d - 1 for a proper prior")


@dataclass
class NIWPosterior:
    muN: np.ndarray
    kN: float
    nuN: float
    psiN: np.ndarray
    n_obs: int
    prior: "NIWParams | None" = None
    feature_stats: PopulationStats | None = None

    def to_dict(self) -> dict:
        doc = {
            "version": 1,
            "model_type": "bayes_gauss",
            "muN": self.muN.tolist(),
            "kN": self.kN,
            "nuN": self.nuN,
            "psiN": self.psiN.flatten().tolist(),
            "n_obs": self.n_obs,
            "feature_stats": self.feature_stats.to_dict() if self.feature_stats else None,
        }
        if self.prior is not None:
            doc.update(
                mu0=self.prior.mu0.tolist(),
                k0=self.prior.k0,
                nu0=self.prior.nu0,
                psi0=self.prior.psi0.flatten().tolist(),
            )
        return doc

    @classmethod
    def from_dict(cls, obj: dict) -> "NIWPosterior":
        if obj.get("model_type") != "bayes_gauss":
            raise ValueError("not a Bayesian-Gaussian model document")
        muN = np.asarray(obj["muN"], float)
        d = muN.shape[0]
        prior = None
        if obj.get("mu0") is not None:
            prior = NIWParams(
                mu0=np.asarray(obj["mu0"], float),
                k0=float(obj["k0"]),
                nu0=float(obj["nu0"]),
                psi0=np.asarray(obj["psi0"], float).reshape(d, d),
            )
        return cls(
            muN=muN,
            kN=float(obj["kN"]),
            nuN=float(obj["nuN"]),
            psiN=np.asarray(obj["psiN"], float).reshape(d, d),
            n_obs=int(obj["n_obs"]),
            prior=prior,
            feature_stats=PopulationStats.from_dict(obj["feature_stats"])
            if obj.get("feature_stats")
            else None,
        )


def cold_start_prior(
    d: int,
    grid: int | None = None,
    k0: float = DEFAULT_K0,
    nu0: float | None = None,
    position_var: float = DEFAULT_POSITION_VAR,
    channel_var: float = DEFAULT_CHANNEL_VAR,
) -> NIWParams:
    """Default-belief prior for enrollment without a population: zero mean,
    tighter variance on the position channels, unit variance elsewhere."""
    nu0 = float(d + 2) if nu0 is None else float(nu0)
    variances = np.full(d, channel_var)
    if grid is not None:
        variances[position_dims(grid)] = position_var
    psi0 = (nu0 - d - 1) * np.diag(variances)
    return NIWParams(mu0=np.zeros(d), k0=k0, nu0=nu0, psi0=psi0)


def build_prior(
    population: list[np.ndarray] | None,
    d: int,
    grid: int | None = None,
    k0: float = DEFAULT_K0,
    nu0: float | None = None,
    shrinkage: ShrinkageConfig = ShrinkageConfig(),
) -> NIWParams:
    """Population-informed prior: psi0 scaled so that the prior covariance
    mean equals the cross-validated shrunk pooled covariance."""
    if population is None:
        return cold_start_prior(d, grid=grid, k0=k0, nu0=nu0)
    nu0 = float(d + 2) if nu0 is None else float(nu0)
    alpha = shrinkage.alpha
    if alpha is None:
        alpha = select_alpha(population, shrinkage, scoring="pooled")
    shrunk_pooled = shrink_cov(pooled_cov(population), alpha)
    if not np.any(np.diag(shrunk_pooled) > 0):
        raise ValueError("degenerate population: pooled covariance is zero")
    psi0 = (nu0 - d - 1) * shrunk_pooled
    return NIWParams(mu0=grand_mean(population), k0=k0, nu0=nu0, psi0=psi0)


def posterior_update(prior: NIWParams, features: list[np.ndarray]) -> NIWPosterior:
    """Conjugate update absorbing a batch of samples; an empty batch returns
    the prior unchanged."""
    n = len(features)
    if n == 0:
        return NIWPosterior(
            muN=prior.mu0.copy(), kN=prior.k0, nuN=prior.nu0, psiN=prior.psi0.copy(),
            n_obs=0, prior=prior,
        )
    mat = np.asarray(features, dtype=float).reshape(n, -1)
    if mat.shape[1] != prior.mu0.shape[0]:
        raise ValueError("dimension mismatch")
    xbar = mat.mean(axis=0)
    centered = mat - xbar
    scatter = centered.T @ centered
    kN = prior.k0 + n
    dev = (xbar - prior.mu0).reshape(-1, 1)
    psiN = prior.psi0 + scatter + (prior.k0 * n / kN) * (dev @ dev.T)
    muN = (prior.k0 * prior.mu0 + n * xbar) / kN
    return NIWPosterior(muN=muN, kN=kN, nuN=prior.nu0 + n, psiN=psiN, n_obs=n, prior=prior)


def absorb(post: NIWPosterior, features: list[np.ndarray]) -> NIWPosterior:
    """Sequential update: treat an existing posterior as the prior."""
    step_prior = NIWParams(mu0=post.muN, k0=post.kN, nu0=post.nuN, psi0=post.psiN)
    updated = posterior_update(step_prior, features)
    updated.n_obs += post.n_obs
    updated.prior = post.prior
    updated.feature_stats = post.feature_stats
    return updated


def posterior_downdate(post: NIWPosterior, x: np.ndarray) -> NIWPosterior:
    """Exactly remove one absorbed sample (inverse of a single-sample
    update); used for cheap leave-one-out calibration."""
    if post.n_obs < 1:
        raise ValueError("no observations to remove")
    x = np.asarray(x, dtype=float)
    kA = post.kN - 1.0
    muA = (post.kN * post.muN - x) / kA
    dev = (x - muA).reshape(-1, 1)
    psiA = post.psiN - (kA / post.kN) * (dev @ dev.T)
    return NIWPosterior(
        muN=muA,
        kN=kA,
        nuN=post.nuN - 1.0,
        psiN=psiA,
        n_obs=post.n_obs - 1,
        prior=post.prior,
        feature_stats=post.feature_stats,
    )


def posterior_predictive(post: NIWPosterior) -> StudentTParams:
    """Closed-form Student-t predictive with dof nuN - d + 1 and scale
    psiN * (kN + 1) / (kN * (nuN - d + 1))."""
    d = post.muN.shape[0]
    dof = post.nuN - d + 1.0
    if dof <= 0:
        raise ValueError("posterior predictive undefined: nuN - d + 1 <= 0")
    scale = post.psiN * (post.kN + 1.0) / (post.kN * dof)
    return StudentTParams(dof=dof, loc=post.muN, scale=scale)


def score_bayes(post: NIWPosterior, x: np.ndarray) -> float:
    """Posterior predictive log-density; higher means more genuine."""
    return student_t_logpdf(posterior_predictive(post), x)
