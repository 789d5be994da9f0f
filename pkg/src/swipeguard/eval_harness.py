"""Per-user equal-error-rate evaluation: blind and over-the-shoulder
scenarios, learning curves over enrollment sizes, and report emission."""

from __future__ import annotations

import csv
import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .features import PopulationStats, extract_features, standardize
from .models import bayes_gauss, dp_mixture, shrunk
from .stat_core import ShrinkageConfig, SingularModelError, pooled_cov
from .traces import QualityPolicy, RawTrace, normalize, quality_gate

SCENARIOS = ("blind", "ots")
ROLE_TO_SCENARIO = {"blind_attacker": "blind", "ots_attacker": "ots"}
MODEL_DISPLAY = {
    "shrunk": "Shrunk Covariance",
    "bayes_gauss": "Bayesian Gaussian",
    "dp_mixture": "Infinite Mixture",
}


@dataclass
class ScoreSet:
    genuine: list[float]
    impostor: list[float]
    scenario: str
    profile_id: str
    model_type: str


def compute_eer(genuine, impostor) -> float:
    """Equal error rate in percent.

    Sweeps every distinct score plus infinite sentinels as the accept
    threshold (accept iff score >= t), takes the threshold minimizing
    |FAR - FRR| (ties toward the smaller threshold) and returns the average
    of the two rates there.
    """
    g = np.sort(np.asarray(genuine, dtype=float))
    i = np.sort(np.asarray(impostor, dtype=float))
    if g.size == 0 or i.size == 0:
        raise ValueError("both genuine and impostor scores are required")
    thresholds = np.concatenate([[-np.inf], np.unique(np.concatenate([g, i])), [np.inf]])
    n_rejected = np.searchsorted(g, thresholds, side="left")
    n_accepted = i.size - np.searchsorted(i, thresholds, side="left")
    # |FAR - FRR| compared on integer numerators so exact ties stay ties
    best = int(np.argmin(np.abs(n_accepted * g.size - n_rejected * i.size)))
    frr = n_rejected[best] / g.size
    far = n_accepted[best] / i.size
    return float((far + frr) / 2.0 * 100.0)


@dataclass
class ProfileData:
    profile_id: str
    genuine: list[np.ndarray] = field(default_factory=list)
    impostors: dict[str, list[np.ndarray]] = field(
        default_factory=lambda: {"blind": [], "ots": []}
    )
    rejected: Counter = field(default_factory=Counter)


def build_profile_data(
    traces: list[RawTrace],
    policy: QualityPolicy = QualityPolicy(),
    grid: int = 10,
) -> dict[str, ProfileData]:
    """Quality-gate traces and extract features, grouped per target profile
    with genuine samples in chronological order."""
    by_profile: dict[str, ProfileData] = {}
    for trace in sorted(traces, key=lambda t: (t.profile_id, t.role, t.attempt_index)):
        data = by_profile.setdefault(trace.profile_id, ProfileData(trace.profile_id))
        verdict = quality_gate(trace, policy)
        if not verdict.accepted:
            data.rejected[verdict.reason] += 1
            continue
        feature = extract_features(normalize(trace), grid)
        if trace.role == "victim":
            data.genuine.append(feature)
        else:
            data.impostors[ROLE_TO_SCENARIO[trace.role]].append(feature)
    return by_profile


@dataclass(frozen=True)
class HarnessConfig:
    model_types: tuple[str, ...] = ("shrunk", "bayes_gauss", "dp_mixture")
    scenarios: tuple[str, ...] = SCENARIOS
    n_train: int = 10
    grid: int = 10
    quality: QualityPolicy = QualityPolicy()
    shrinkage: ShrinkageConfig = ShrinkageConfig()
    dp_hyper: dp_mixture.DPHyperParams = dp_mixture.DPHyperParams()
    # estimate the mixture's noise prior from pooled within-profile variance
    # instead of the scalar default; only possible with a population
    dp_noise_from_population: bool = True
    prior_source: str = "population"  # population | cold_start
    k0: float = bayes_gauss.DEFAULT_K0
    seed: int = 0

    def echo(self) -> dict:
        return {
            "model_types": list(self.model_types),
            "scenarios": list(self.scenarios),
            "n_train": self.n_train,
            "grid": self.grid,
            "quality": {
                "min_points": self.quality.min_points,
                "min_duration_ms": self.quality.min_duration_ms,
                "min_path_frac": self.quality.min_path_frac,
            },
            "shrinkage": {
                "alpha": self.shrinkage.alpha,
                "alpha_grid": [float(a) for a in self.shrinkage.alpha_grid],
                "cv_folds": self.shrinkage.cv_folds,
            },
            "dp_hyper": self.dp_hyper.to_dict(),
            "dp_noise_from_population": self.dp_noise_from_population,
            "prior_source": self.prior_source,
            "k0": self.k0,
            "seed": self.seed,
            "gibbs_backend": dp_mixture.active_backend(),
        }


def _profile_seed(base_seed: int, profile_id: str) -> int:
    digest = hashlib.sha256(f"{base_seed}:{profile_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _train_and_score(model_type, train, holdout, impostors, cfg, inputs, seed):
    """Returns (genuine scores, {scenario: impostor scores}, diagnostics)."""
    stats = inputs.stats
    z_train, _ = standardize(train, stats)
    diag = {}
    if model_type == "shrunk":
        model = shrunk.train_shrunk(z_train, alpha=cfg.shrinkage.alpha, shrinkage=cfg.shrinkage)
        score = lambda z: shrunk.score_shrunk(model, z)
        diag["alpha"] = model.alpha
    elif model_type == "bayes_gauss":
        post = bayes_gauss.posterior_update(inputs.prior, z_train)
        score = lambda z: bayes_gauss.score_bayes(post, z)
    elif model_type == "dp_mixture":
        state = dp_mixture.train_dpgmm(z_train, inputs.dp_hyper, seed=seed)
        score = lambda z: dp_mixture.score_dpgmm(state, z)
        diag["component_count"] = dp_mixture.component_count(state)
        diag["converged"] = state.converged
    else:
        raise ValueError(f"unknown model type {model_type!r}")

    genuine_scores = [score(z) for z in _zscore(holdout, stats)]
    impostor_scores = {
        scen: [score(z) for z in _zscore(samples, stats)]
        for scen, samples in impostors.items()
    }
    return genuine_scores, impostor_scores, diag


def _zscore(vectors, stats):
    return standardize(vectors, stats)[0] if vectors else []


@dataclass
class PopulationInputs:
    stats: PopulationStats
    prior: bayes_gauss.NIWParams | None
    dp_hyper: dp_mixture.DPHyperParams


def _population_inputs(dataset, eligible, n_train, cfg) -> PopulationInputs:
    """Shared standardization stats, the population prior and the resolved
    mixture hyperparameters, all computed from training portions only
    (profile order independent)."""
    train_sets = [np.asarray(dataset[pid].genuine[:n_train]) for pid in sorted(eligible)]
    stacked = np.vstack(train_sets)
    stats = PopulationStats(mean=stacked.mean(axis=0), std=stacked.std(axis=0))
    d = stacked.shape[1]

    z_sets = None
    if cfg.prior_source == "population":
        z_sets = [np.asarray(standardize([r for r in s], stats)[0]) for s in train_sets]

    prior = None
    if "bayes_gauss" in cfg.model_types:
        if z_sets is not None:
            prior = bayes_gauss.build_prior(z_sets, d=d, k0=cfg.k0, shrinkage=cfg.shrinkage)
        else:
            prior = bayes_gauss.cold_start_prior(d, grid=cfg.grid, k0=cfg.k0)

    dp_hyper = cfg.dp_hyper
    if "dp_mixture" in cfg.model_types and cfg.dp_noise_from_population and z_sets is not None:
        within_var = np.maximum(np.diag(pooled_cov(z_sets)), 1e-6)
        dp_hyper = replace(dp_hyper, sigma_y_sq=within_var)
    return PopulationInputs(stats=stats, prior=prior, dp_hyper=dp_hyper)


def run_experiment(
    dataset: dict[str, ProfileData], cfg: HarnessConfig, n_train: int | None = None
) -> dict:
    """Per-user EERs for every configured model and scenario at one
    enrollment size. Profiles missing the sample preconditions are reported
    in failed_profiles rather than aborting the run."""
    n_train = cfg.n_train if n_train is None else n_train
    failed = []
    eligible = []
    for pid in sorted(dataset):
        data = dataset[pid]
        if len(data.genuine) < n_train + 1:
            failed.append({"profile_id": pid, "reason": "insufficient_genuine_samples"})
        elif all(not data.impostors[s] for s in cfg.scenarios):
            failed.append({"profile_id": pid, "reason": "no_impostor_samples"})
        else:
            eligible.append(pid)
    if not eligible:
        raise ValueError("no profile satisfies the evaluation preconditions")

    inputs = _population_inputs(dataset, eligible, n_train, cfg)

    per_user: dict[str, dict[str, dict[str, float]]] = {}
    diagnostics: dict[str, dict] = {}
    for pid in eligible:
        data = dataset[pid]
        train = data.genuine[:n_train]
        holdout = data.genuine[n_train:]
        impostors = {s: data.impostors[s] for s in cfg.scenarios if data.impostors[s]}
        per_user[pid] = {}
        for model_type in cfg.model_types:
            try:
                genuine_scores, impostor_scores, diag = _train_and_score(
                    model_type, train, holdout, impostors, cfg, inputs,
                    _profile_seed(cfg.seed, pid),
                )
            except SingularModelError as exc:
                failed.append(
                    {"profile_id": pid, "reason": f"training_failed[{model_type}]: {exc}"}
                )
                continue
            per_user[pid][model_type] = {
                scen: compute_eer(genuine_scores, scores)
                for scen, scores in impostor_scores.items()
            }
            if diag:
                diagnostics.setdefault(pid, {})[model_type] = diag

    return {
        "n_train": n_train,
        "per_user_eer": per_user,
        "aggregates": aggregate(per_user, cfg),
        "failed_profiles": failed,
        "diagnostics": diagnostics,
    }


def aggregate(per_user, cfg: HarnessConfig) -> dict:
    out: dict[str, dict[str, dict[str, float]]] = {}
    for model_type in cfg.model_types:
        out[model_type] = {}
        for scen in cfg.scenarios:
            values = [
                eers[model_type][scen]
                for eers in per_user.values()
                if model_type in eers and scen in eers[model_type]
            ]
            if values:
                out[model_type][scen] = {
                    "mean": float(np.mean(values)),
                    "median": float(np.median(values)),
                    "n_profiles": len(values),
                }
    return out


def learning_curve(
    dataset: dict[str, ProfileData], cfg: HarnessConfig, n_range: range | list[int]
) -> dict:
    """Mean/median EER per (model, scenario, n). The holdout is fixed to the
    genuine samples after the first max(n_range), so every point is
    evaluated on the identical test set."""
    ns = sorted(n_range)
    n_max = ns[-1]
    trimmed: dict[str, ProfileData] = {}
    for pid in sorted(dataset):
        data = dataset[pid]
        if len(data.genuine) < n_max + 1:
            continue
        trimmed[pid] = data
    if not trimmed:
        raise ValueError(f"no profile has more than {n_max} genuine samples")

    curves: dict[str, dict[str, dict[int, dict[str, float]]]] = {}
    for n in ns:
        clipped = {
            pid: ProfileData(
                pid,
                genuine=data.genuine[:n] + data.genuine[n_max:],
                impostors=data.impostors,
                rejected=data.rejected,
            )
            for pid, data in trimmed.items()
        }
        result = run_experiment(clipped, cfg, n_train=n)
        for model_type, scens in result["aggregates"].items():
            for scen, agg in scens.items():
                curves.setdefault(model_type, {}).setdefault(scen, {})[n] = {
                    "mean": agg["mean"],
                    "median": agg["median"],
                }
    return curves


# --- report emission ---

def build_report(cfg: HarnessConfig, experiment: dict, curves: dict | None = None) -> dict:
    report = {
        "report_version": 1,
        "config_echo": cfg.echo(),
        "n_train": experiment["n_train"],
        "per_user_eer": experiment["per_user_eer"],
        "aggregates": experiment["aggregates"],
        "failed_profiles": experiment["failed_profiles"],
        "diagnostics": experiment["diagnostics"],
    }
    if curves is not None:
        report["learning_curves"] = {
            model: {scen: {str(n): v for n, v in by_n.items()} for scen, by_n in scens.items()}
            for model, scens in curves.items()
        }
    return report


def render_table(aggregates: dict, model_types=None) -> str:
    """Fixed-width summary table: one row per model, Blind/OTS EER columns
    with Mean and Median subcolumns."""
    model_types = model_types or list(aggregates)
    name_width = max(
        [len(MODEL_DISPLAY.get(m, m)) for m in model_types] + [len("Model")]
    )
    lines = [
        f"{'Model':<{name_width}}  {'Blind EER':>16}  {'OTS EER':>16}",
        f"{'':<{name_width}}  {'Mean':>7} {'Median':>8}  {'Mean':>7} {'Median':>8}",
        "-" * (name_width + 38),
    ]
    for model_type in model_types:
        scens = aggregates.get(model_type, {})
        cells = []
        for scen in ("blind", "ots"):
            agg = scens.get(scen)
            if agg is None:
                cells += [f"{'-':>7}", f"{'-':>8}"]
            else:
                cells += [f"{agg['mean']:>7.2f}", f"{agg['median']:>8.2f}"]
        name = MODEL_DISPLAY.get(model_type, model_type)
        lines.append(f"{name:<{name_width}}  {cells[0]} {cells[1]}  {cells[2]} {cells[3]}")
    return "\n".join(lines) + "\n"


def emit_report(report: dict, out_dir) -> list[Path]:
    """Write report.json, table.txt and the per-user / learning-curve CSVs.
    Serialization is key-sorted with no timestamps so reruns are
    byte-identical."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = out / "report.json"
    json_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    written.append(json_path)

    table_path = out / "table.txt"
    table = render_table(report["aggregates"], report["config_echo"]["model_types"])
    failed = report.get("failed_profiles") or []
    if failed:
        table += "\nFailed profiles:\n" + "".join(
            f"  {f['profile_id']}: {f['reason']}\n" for f in failed
        )
    table_path.write_text(table)
    written.append(table_path)

    csv_path = out / "per_user_eer.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["profile_id", "model", "scenario", "eer_percent"])
        for pid in sorted(report["per_user_eer"]):
            for model_type in sorted(report["per_user_eer"][pid]):
                for scen in sorted(report["per_user_eer"][pid][model_type]):
                    writer.writerow(
                        [pid, model_type, scen,
                         repr(report["per_user_eer"][pid][model_type][scen])]
                    )
    written.append(csv_path)

    if "learning_curves" in report:
        curve_path = out / "learning_curve.csv"
        with open(curve_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "scenario", "n_train", "mean_eer", "median_eer"])
            curves = report["learning_curves"]
            for model_type in sorted(curves):
                for scen in sorted(curves[model_type]):
                    for n in sorted(curves[model_type][scen], key=int):
                        point = curves[model_type][scen][n]
                        writer.writerow(
                            [model_type, scen, n, repr(point["mean"]), repr(point["median"])]
                        )
        written.append(curve_path)
    return written
