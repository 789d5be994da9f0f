"""Shared statistical kernel: covariance estimators, Gaussian / Student-t
log-densities via triangular factorization, and cross-validated selection of
the covariance shrinkage strength."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

_LOG_2PI = float(np.log(2.0 * np.pi))
_SYM_TOL = 1e-10


class SingularModelError(ValueError):
    """Covariance not factorizable within the jitter budget."""


def _check_symmetric(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(cov, cov.T, atol=_SYM_TOL, rtol=0):
        raise ValueError("covariance not symmetric")
    return (cov + cov.T) / 2.0


def chol_with_jitter(cov: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of cov, adding eps*I escalating x10 from 1e-12
    up to 1e-6 * trace/d before giving up.

    Returns (L, eps_used). Raises SingularModelError when no eps in the
    ladder succeeds.
    """
    d = cov.shape[0]
    max_eps = 1e-6 * np.trace(cov) / d
    eps = 0.0
    while True:
        try:
            return np.linalg.cholesky(cov + eps * np.eye(d)), eps
        except np.linalg.LinAlgError:
            eps = 1e-12 if eps == 0.0 else eps * 10.0
            if eps > max_eps:
                raise SingularModelError(
                    f"covariance singular (jitter ladder exhausted at {eps:.1e})"
                ) from None


@dataclass
class GaussianParams:
    mean: np.ndarray
    cov: np.ndarray
    _chol: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = _check_symmetric(self.cov)

    def chol(self) -> np.ndarray:
        if self._chol is None:
            self._chol, _ = chol_with_jitter(self.cov)
        return self._chol


@dataclass
class StudentTParams:
    dof: float
    loc: np.ndarray
    scale: np.ndarray
    _chol: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.dof <= 0:
            raise ValueError("dof must be positive")
        self.loc = np.asarray(self.loc, dtype=float)
        self.scale = _check_symmetric(self.scale)

    def chol(self) -> np.ndarray:
        if self._chol is None:
            self._chol, _ = chol_with_jitter(self.scale)
        return self._chol


@dataclass(frozen=True)
class ShrinkageConfig:
    alpha: float | None = None  # None selects via cross-validation
    alpha_grid: tuple[float, ...] = tuple(np.round(np.arange(0.0, 1.01, 0.1), 2))
    cv_folds: int | str | None = None  # int >= 2, "loo", or None for auto

    def __post_init__(self):
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if len(set(self.alpha_grid)) != len(self.alpha_grid):
            raise ValueError("alpha_grid values must be distinct")
        for a in self.alpha_grid:
            if not 0.0 <= a <= 1.0:
                raise ValueError("alpha_grid values must lie in [0, 1]")


def mle_cov(samples: np.ndarray) -> GaussianParams:
    """Sample mean and maximum-likelihood covariance (divisor N)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / x.shape[0]
    return GaussianParams(mean=mean, cov=cov)


def shrink_cov(cov: np.ndarray, alpha: float) -> np.ndarray:
    """Convex combination alpha * cov + (1 - alpha) * diag(cov).

    The diagonal is unchanged for every alpha; PSD inputs stay PSD.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    cov = _check_symmetric(cov)
    return alpha * cov + (1.0 - alpha) * np.diag(np.diag(cov))


def pooled_cov(profiles: list[np.ndarray]) -> np.ndarray:
    """Unbiased covariance pooled across profiles, each centered on its own
    mean: sum of scatters divided by the summed degrees of freedom."""
    scatter = None
    dof = 0
    for samples in profiles:
        x = np.asarray(samples, dtype=float)
        if x.shape[0] < 2:
            continue
        centered = x - x.mean(axis=0)
        s = centered.T @ centered
        scatter = s if scatter is None else scatter + s
        dof += x.shape[0] - 1
    if scatter is None or dof < 1:
        raise ValueError("no profile has at least 2 samples")
    return scatter / dof


def grand_mean(profiles: list[np.ndarray]) -> np.ndarray:
    stacked = np.vstack([np.asarray(p, dtype=float) for p in profiles])
    return stacked.mean(axis=0)


def gaussian_logpdf(params: GaussianParams, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != params.mean.shape:
        raise ValueError("dimension mismatch")
    L = params.chol()
    z = solve_triangular(L, x - params.mean, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    d = params.mean.shape[0]
    return float(-0.5 * (d * _LOG_2PI + logdet + z @ z))


def mahalanobis_sq(params: GaussianParams, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != params.mean.shape:
        raise ValueError("dimension mismatch")
    z = solve_triangular(params.chol(), x - params.mean, lower=True)
    return float(z @ z)


def student_t_logpdf(params: StudentTParams, x: np.ndarray) -> float:
    """Multivariate Student-t log-density with dof nu, location mu and scale
    matrix V:

        log G((nu+d)/2) - log G(nu/2) - (d/2) log(nu*pi)
        - 0.5 log|V| - ((nu+d)/2) log(1 + m/nu)

    where m is the squared Mahalanobis distance under V.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != params.loc.shape:
        raise ValueError("dimension mismatch")
    d = params.loc.shape[0]
    nu = params.dof
    L = params.chol()
    z = solve_triangular(L, x - params.loc, lower=True)
    maha = z @ z
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return float(
        gammaln((nu + d) / 2.0)
        - gammaln(nu / 2.0)
        - 0.5 * d * np.log(nu * np.pi)
        - 0.5 * logdet
        - 0.5 * (nu + d) * np.log1p(maha / nu)
    )


def _fold_of(index: int, n_folds: int) -> int:
    return index % n_folds


def _resolve_folds(profiles: list[np.ndarray], cv_folds) -> int:
    sizes = [np.asarray(p).shape[0] for p in profiles]
    if cv_folds == "loo":
        return max(sizes)
    if cv_folds is not None:
        if int(cv_folds) < 2:
            raise ValueError("cv_folds must be >= 2")
        return int(cv_folds)
    # auto: leave-one-out when any profile is small, else 5-fold
    return max(sizes) if min(sizes) < 10 else 5


def select_alpha(
    profiles: list[np.ndarray],
    config: ShrinkageConfig = ShrinkageConfig(),
    scoring: str = "per_profile",
) -> float:
    """Pick the shrinkage strength maximizing mean held-out log-likelihood.

    scoring="per_profile" shrinks each profile's own MLE covariance;
    scoring="pooled" shrinks the covariance pooled across profiles and
    evaluates each profile's held-out samples at its own training mean.
    Folds are assigned round-robin by sample index; ties break toward the
    larger alpha.
    """
    if scoring not in ("per_profile", "pooled"):
        raise ValueError(f"unknown scoring mode {scoring!r}")
    grid = sorted(config.alpha_grid)
    if not grid:
        raise ValueError("empty alpha grid")
    mats = [np.asarray(p, dtype=float) for p in profiles]
    n_folds = _resolve_folds(mats, config.cv_folds)

    best_alpha, best_score = None, -np.inf
    for alpha in grid:
        total_ll, total_n = 0.0, 0
        try:
            for fold in range(n_folds):
                total = _heldout_ll(mats, alpha, fold, n_folds, scoring)
                if total is None:
                    continue
                total_ll += total[0]
                total_n += total[1]
        except SingularModelError:
            continue
        if total_n == 0:
            continue
        score = total_ll / total_n
        if best_alpha is None or score >= best_score:
            best_alpha, best_score = alpha, score
    if best_alpha is None:
        raise SingularModelError("every alpha candidate produced a singular model")
    return best_alpha


def _heldout_ll(mats, alpha, fold, n_folds, scoring):
    folds = [np.array([_fold_of(i, n_folds) for i in range(m.shape[0])]) for m in mats]
    trains = [m[f != fold] for m, f in zip(mats, folds)]
    helds = [m[f == fold] for m, f in zip(mats, folds)]

    if scoring == "pooled":
        contributing = [t for t in trains if t.shape[0] >= 2]
        if not contributing:
            return None
        cov = shrink_cov(pooled_cov(contributing), alpha)
        total_ll, total_n = 0.0, 0
        for train, held in zip(trains, helds):
            if train.shape[0] < 1 or held.shape[0] == 0:
                continue
            params = GaussianParams(mean=train.mean(axis=0), cov=cov)
            total_ll += sum(gaussian_logpdf(params, h) for h in held)
            total_n += held.shape[0]
        return (total_ll, total_n) if total_n else None

    total_ll, total_n = 0.0, 0
    for train, held in zip(trains, helds):
        if train.shape[0] < 2 or held.shape[0] == 0:
            continue
        base = mle_cov(train)
        params = GaussianParams(mean=base.mean, cov=shrink_cov(base.cov, alpha))
        total_ll += sum(gaussian_logpdf(params, h) for h in held)
        total_n += held.shape[0]
    return (total_ll, total_n) if total_n else None
