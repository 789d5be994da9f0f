"""Infinite Gaussian mixture trained by collapsed Gibbs sampling under a
Chinese Restaurant Process prior.

Component likelihoods are per-dimension normal-normal with known noise
precision, multiplied across dimensions (diagonal priors). The per-sweep
kernel is compiled when the extension built; a numpy fallback with identical
semantics is selected at import otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..features import PopulationStats
from .. import _crp_py

try:
    from .. import _crp as _crp_native
except ImportError:
    _crp_native = None

HAVE_NATIVE_KERNEL = _crp_native is not None
_kernel = _crp_native if HAVE_NATIVE_KERNEL else _crp_py

DEFAULT_SWEEPS = 200
DEFAULT_WINDOW = 10


def active_backend() -> str:
    return "compiled" if _kernel is _crp_native else "python"


@dataclass(frozen=True)
class DPHyperParams:
    """Concentration, prior component mean/variance and noise variance.

    sigma0_sq and sigma_y_sq are per-dimension (diagonal) and may be passed
    as scalars; sigma_x_sq optionally decouples the new-component noise term
    from sigma_y_sq and defaults to it.
    """

    alpha: float = 1.0
    mu0: float | np.ndarray = 0.0
    sigma0_sq: float | np.ndarray = 1.0
    sigma_y_sq: float | np.ndarray = 0.25
    sigma_x_sq: float | np.ndarray | None = None

    def resolved(self, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        mu0 = np.broadcast_to(np.asarray(self.mu0, float), (d,)).copy()
        s0 = np.broadcast_to(np.asarray(self.sigma0_sq, float), (d,)).copy()
        sy = np.broadcast_to(np.asarray(self.sigma_y_sq, float), (d,)).copy()
        sx = sy if self.sigma_x_sq is None else np.broadcast_to(
            np.asarray(self.sigma_x_sq, float), (d,)
        ).copy()
        if np.any(s0 <= 0) or np.any(sy <= 0) or np.any(sx <= 0):
            raise ValueError("variances must be strictly positive")
        return mu0, s0, sy, sx

    def to_dict(self) -> dict:
        def enc(v):
            if v is None:
                return None
            arr = np.asarray(v, float)
            return float(arr) if arr.ndim == 0 else arr.tolist()

        return {
            "alpha": self.alpha,
            "mu0": enc(self.mu0),
            "sigma0_sq": enc(self.sigma0_sq),
            "sigma_y_sq": enc(self.sigma_y_sq),
            "sigma_x_sq": enc(self.sigma_x_sq),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DPHyperParams":
        def dec(v):
            if v is None:
                return None
            return np.asarray(v, float) if isinstance(v, list) else float(v)

        return cls(
            alpha=float(obj["alpha"]),
            mu0=dec(obj["mu0"]),
            sigma0_sq=dec(obj["sigma0_sq"]),
            sigma_y_sq=dec(obj["sigma_y_sq"]),
            sigma_x_sq=dec(obj.get("sigma_x_sq")),
        )


@dataclass
class MixtureState:
    data: np.ndarray | None          # (n, d) training samples; None once persisted
    assignments: np.ndarray          # (n,) int64 component labels, canonical
    counts: np.ndarray               # (K,) samples per component
    sums: np.ndarray                 # (K, d) per-component feature sums
    hyper: DPHyperParams
    rng_seed: int
    sweep_count: int = 0
    converged: bool = False
    feature_stats: PopulationStats | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.assignments.shape[0]

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def dim(self) -> int:
        return self.sums.shape[1]

    def component_means(self) -> np.ndarray:
        return self.sums / self.counts[:, None]

    def tau_k(self) -> np.ndarray:
        """Per-component per-dimension precision (fixed at the noise
        precision under the known-variance model)."""
        _, _, sy, _ = self.hyper.resolved(self.dim)
        return np.tile(1.0 / sy, (self.k, 1))

    def check_consistency(self) -> None:
        if self.data is None:
            raise ValueError("training data not attached to this state")
        counts, sums = _stats_from_assignments(self.data, self.assignments, self.k)
        if not np.array_equal(counts, self.counts):
            raise AssertionError("component counts inconsistent with assignments")
        if not np.array_equal(sums, self.sums):
            raise AssertionError("component sums inconsistent with assignments")

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "model_type": "dp_mixture",
            "hyper": self.hyper.to_dict(),
            "assignments": self.assignments.tolist(),
            "component_stats": {
                "counts": self.counts.tolist(),
                "sums": [row.tolist() for row in self.sums],
            },
            "seed": self.rng_seed,
            "sweeps_run": self.sweep_count,
            "converged": self.converged,
            "feature_stats": self.feature_stats.to_dict() if self.feature_stats else None,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MixtureState":
        if obj.get("model_type") != "dp_mixture":
            raise ValueError("not a DP-mixture model document")
        return cls(
            data=None,
            assignments=np.asarray(obj["assignments"], np.int64),
            counts=np.asarray(obj["component_stats"]["counts"], np.int64),
            sums=np.asarray(obj["component_stats"]["sums"], float),
            hyper=DPHyperParams.from_dict(obj["hyper"]),
            rng_seed=int(obj["seed"]),
            sweep_count=int(obj["sweeps_run"]),
            converged=bool(obj["converged"]),
            feature_stats=PopulationStats.from_dict(obj["feature_stats"])
            if obj.get("feature_stats")
            else None,
        )


def _stats_from_assignments(data, assignments, k):
    n, d = data.shape
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros((k, d))
    for i in range(n):
        counts[assignments[i]] += 1
        sums[assignments[i]] += data[i]
    return counts, sums


def _canonicalize(assignments: np.ndarray) -> np.ndarray:
    """Relabel components by order of first occurrence."""
    mapping: dict[int, int] = {}
    out = np.empty_like(assignments)
    for i, label in enumerate(assignments):
        if int(label) not in mapping:
            mapping[int(label)] = len(mapping)
        out[i] = mapping[int(label)]
    return out


def _kernel_args(data, hyper: DPHyperParams):
    d = data.shape[1]
    mu0, s0, sy, sx = hyper.resolved(d)
    tau0 = 1.0 / s0
    tau = 1.0 / sy
    new_var = s0 + sx
    return {
        "log_alpha": float(np.log(hyper.alpha)),
        "mu0": mu0,
        "mu0_tau0": mu0 * tau0,
        "tau0": tau0,
        "tau": tau,
        "vary": sy,
        "new_logconst": float(-0.5 * np.sum(np.log(2.0 * np.pi * new_var))),
        "new_inv": 1.0 / new_var,
    }


def gibbs_sweep(
    state: MixtureState, rng: np.random.Generator, kernel=None
) -> MixtureState:
    """One collapsed Gibbs pass over all samples in index order. Consumes
    exactly n uniforms from rng; returns a new canonicalized state."""
    kernel = kernel or _kernel
    if state.data is None:
        raise ValueError("cannot sweep a state without attached training data")
    data = np.ascontiguousarray(state.data, dtype=np.float64)
    n, d = data.shape
    assign = state.assignments.astype(np.int64).copy()
    counts = np.zeros(n + 1, dtype=np.int64)
    sums = np.zeros((n + 1, d), dtype=np.float64)
    counts[: state.k] = state.counts
    sums[: state.k] = state.sums
    u = rng.random(n)

    k_active = kernel.crp_gibbs_sweep(
        data, assign, counts, sums, int(state.k), u=u, **_kernel_args(data, state.hyper)
    )

    assign = _canonicalize(assign)
    counts, sums = _stats_from_assignments(data, assign, int(assign.max()) + 1)
    if counts.shape[0] != k_active:
        raise AssertionError("component bookkeeping diverged from assignments")
    return MixtureState(
        data=state.data,
        assignments=assign,
        counts=counts,
        sums=sums,
        hyper=state.hyper,
        rng_seed=state.rng_seed,
        sweep_count=state.sweep_count + 1,
        converged=state.converged,
        feature_stats=state.feature_stats,
    )


def init_state(
    features: list[np.ndarray],
    hyper: DPHyperParams,
    seed: int,
    feature_stats: PopulationStats | None = None,
) -> MixtureState:
    data = np.ascontiguousarray(features, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("need at least 1 training sample")
    n = data.shape[0]
    assignments = np.zeros(n, dtype=np.int64)
    counts, sums = _stats_from_assignments(data, assignments, 1)
    return MixtureState(
        data=data,
        assignments=assignments,
        counts=counts,
        sums=sums,
        hyper=hyper,
        rng_seed=seed,
        feature_stats=feature_stats,
    )


def train_dpgmm(
    features: list[np.ndarray],
    hyper: DPHyperParams = DPHyperParams(),
    n_sweeps: int = DEFAULT_SWEEPS,
    convergence_window: int = DEFAULT_WINDOW,
    seed: int = 0,
    feature_stats: PopulationStats | None = None,
    kernel=None,
) -> MixtureState:
    """Run Gibbs sweeps from the all-in-one-component start until the
    assignment vector is stable for convergence_window consecutive sweeps or
    the sweep budget runs out (non-convergence is flagged, not fatal)."""
    state = init_state(features, hyper, seed, feature_stats)
    rng = np.random.default_rng(seed)
    stable = 0
    for _ in range(n_sweeps):
        new_state = gibbs_sweep(state, rng, kernel=kernel)
        stable = stable + 1 if np.array_equal(new_state.assignments, state.assignments) else 0
        state = new_state
        if stable >= convergence_window:
            state.converged = True
            break
    return state


def component_count(state: MixtureState) -> int:
    return int(state.k)


def score_dpgmm(state: MixtureState, x: np.ndarray) -> float:
    """Log posterior-predictive density of the converged mixture, including
    the new-component floor term weighted by alpha / (n + alpha)."""
    x = np.asarray(x, dtype=float)
    d = state.dim
    if x.shape != (d,):
        raise ValueError("dimension mismatch")
    mu0, s0, sy, sx = state.hyper.resolved(d)
    alpha = state.hyper.alpha
    tau0 = 1.0 / s0
    tau = 1.0 / sy
    n = state.n

    nk = state.counts.astype(float)[:, None]
    denom = nk * tau + tau0
    post_mean = (state.sums * tau + mu0 * tau0) / denom
    post_var = 1.0 / denom + sy
    diff = x - post_mean
    log_comp = np.log(state.counts) - 0.5 * np.sum(
        np.log(2.0 * np.pi * post_var) + diff * diff / post_var, axis=1
    )
    new_var = s0 + sx
    dx = x - mu0
    log_new = np.log(alpha) - 0.5 * np.sum(np.log(2.0 * np.pi * new_var) + dx * dx / new_var)
    return float(logsumexp(np.append(log_comp, log_new)) - np.log(n + alpha))
