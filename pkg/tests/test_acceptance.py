"""Acceptance suite: every exit criterion at its stated tolerance, one test
per criterion. The terminal summary prints one PASS/FAIL line each."""

import json
import time

import numpy as np
import pytest

from swipeguard import eval_harness as eh
from swipeguard import synth
from swipeguard.cli import EXIT_OK, main
from swipeguard.features import extract_features, grid_points, standardize
from swipeguard.models import bayes_gauss as bg
from swipeguard.models import dp_mixture as dpm
from swipeguard.stat_core import (
    GaussianParams,
    StudentTParams,
    gaussian_logpdf,
    shrink_cov,
    student_t_logpdf,
)
from swipeguard.traces import NormalizedTrace, normalize

from test_eval_harness import oracle_eer
from test_stat_core import naive_gaussian_logpdf, random_spd


def test_c01_shrinkage_endpoints():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    for _ in range(100):
        d = int(rng.integers(2, 71))
        cov = random_spd(rng, d)
        assert np.max(np.abs(shrink_cov(cov, 1.0) - cov)) <= 1e-12
        assert np.max(np.abs(shrink_cov(cov, 0.0) - np.diag(np.diag(cov)))) <= 1e-12
    assert time.perf_counter() - start < 5.0


def test_c02_conjugacy_batch_vs_sequential():
    rng = np.random.default_rng(202)
    for _ in range(50):
        d = int(rng.integers(1, 6))
        prior = bg.NIWParams(
            mu0=rng.normal(size=d),
            k0=float(rng.uniform(0.01, 2.0)),
            nu0=d + float(rng.uniform(1.5, 4.0)),
            psi0=random_spd(rng, d),
        )
        data = [rng.normal(size=d) for _ in range(int(rng.integers(2, 12)))]
        split = len(data) // 2
        batch = bg.posterior_update(prior, data)
        seq = bg.absorb(bg.posterior_update(prior, data[:split]), data[split:])
        assert np.max(np.abs(batch.muN - seq.muN)) < 1e-10
        assert np.max(np.abs(batch.psiN - seq.psiN)) < 1e-10
        assert abs(batch.kN - seq.kN) < 1e-10 and abs(batch.nuN - seq.nuN) < 1e-10

    prior = bg.NIWParams(mu0=np.zeros(1), k0=1.0, nu0=3.0, psi0=np.eye(1))
    post = bg.posterior_update(prior, [np.array([2.0])])
    assert post.muN[0] == 1.0 and post.kN == 2.0 and post.nuN == 4.0
    assert post.psiN[0, 0] == 3.0


def test_c03_posterior_predictive_monte_carlo():
    from scipy.stats import invwishart

    start = time.perf_counter()
    rng = np.random.default_rng(303)
    prior = bg.NIWParams(mu0=np.zeros(2), k0=0.5, nu0=7.0, psi0=random_spd(rng, 2))
    data = [rng.normal(size=2) for _ in range(5)]
    post = bg.posterior_update(prior, data)

    n_draws = 200_000
    sigmas = invwishart.rvs(df=post.nuN, scale=post.psiN, size=n_draws,
                            random_state=np.random.default_rng(1))
    chols = np.linalg.cholesky(sigmas)
    eps = np.random.default_rng(2).normal(size=(n_draws, 2))
    mus = post.muN + np.einsum("nij,nj->ni", chols, eps) / np.sqrt(post.kN)
    dets = sigmas[:, 0, 0] * sigmas[:, 1, 1] - sigmas[:, 0, 1] ** 2
    invs = np.empty_like(sigmas)
    invs[:, 0, 0] = sigmas[:, 1, 1] / dets
    invs[:, 1, 1] = sigmas[:, 0, 0] / dets
    invs[:, 0, 1] = invs[:, 1, 0] = -sigmas[:, 0, 1] / dets

    probe_rng = np.random.default_rng(3)
    for _ in range(10):
        x = post.muN + probe_rng.normal(scale=1.0, size=2)
        diff = x - mus
        maha = np.einsum("ni,nij,nj->n", diff, invs, diff)
        dens = np.exp(-0.5 * maha) / (2 * np.pi * np.sqrt(dets))
        mc = np.log(dens.mean())
        # the oracle itself must be accurate enough at this probe
        se = dens.std() / (dens.mean() * np.sqrt(n_draws))
        assert se < 0.02
        assert bg.score_bayes(post, x) == pytest.approx(mc, abs=0.05)
    assert time.perf_counter() - start < 120.0


def test_c04_density_kernels():
    from scipy.integrate import quad

    rng = np.random.default_rng(404)
    for _ in range(10):
        d = int(rng.integers(1, 5))
        mean, cov, x = rng.normal(size=d), random_spd(rng, d), rng.normal(size=d)
        ours = gaussian_logpdf(GaussianParams(mean=mean, cov=cov), x)
        assert ours == pytest.approx(naive_gaussian_logpdf(mean, cov, x), abs=1e-10)

        nu = float(rng.uniform(2.0, 30.0))
        t = student_t_logpdf(StudentTParams(dof=nu, loc=mean, scale=cov), x)
        diff = x - mean
        maha = diff @ np.linalg.inv(cov) @ diff
        from scipy.special import gammaln

        naive_t = (
            gammaln((nu + d) / 2) - gammaln(nu / 2) - d / 2 * np.log(nu * np.pi)
            - 0.5 * np.log(np.linalg.det(cov)) - (nu + d) / 2 * np.log(1 + maha / nu)
        )
        assert t == pytest.approx(naive_t, abs=1e-10)

    params = StudentTParams(dof=3.5, loc=np.array([0.2]), scale=np.array([[1.7]]))
    total, _ = quad(lambda v: np.exp(student_t_logpdf(params, np.array([v]))),
                    -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-6)

    mean, cov, x = rng.normal(size=3), random_spd(rng, 3), rng.normal(size=3)
    t_big = student_t_logpdf(StudentTParams(dof=1e6, loc=mean, scale=cov), x)
    g = gaussian_logpdf(GaussianParams(mean=mean, cov=cov), x)
    assert t_big == pytest.approx(g, abs=1e-4)


def test_c05_gibbs_recovery():
    start = time.perf_counter()
    rng = np.random.default_rng(505)
    data = [
        row
        for row in np.concatenate(
            [rng.normal(-10.0, 1.0, size=(20, 1)), rng.normal(10.0, 1.0, size=(20, 1))]
        )
    ]
    hyper = dpm.DPHyperParams(alpha=1.0, sigma_y_sq=1.0)
    recovered = 0
    for seed in range(20):
        state = dpm.train_dpgmm(data, hyper, seed=seed)
        left = set(state.assignments[:20].tolist())
        right = set(state.assignments[20:].tolist())
        recovered += state.k == 2 and len(left) == 1 and len(right) == 1 and left != right
    assert recovered >= 19  # >= 95% of 20 runs

    unimodal = [row for row in rng.normal(size=(40, 1))]
    tiny_alpha = dpm.DPHyperParams(alpha=1e-8, sigma_y_sq=1.0)
    assert all(
        dpm.component_count(dpm.train_dpgmm(unimodal, tiny_alpha, seed=s)) == 1
        for s in range(20)
    )

    a = dpm.train_dpgmm(data, hyper, seed=7)
    b = dpm.train_dpgmm(data, hyper, seed=7)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    assert time.perf_counter() - start < 60.0


def test_c06_eer_oracle():
    rng = np.random.default_rng(606)
    for _ in range(100):
        n_g, n_i = int(rng.integers(1, 30)), int(rng.integers(1, 30))
        use_ties = rng.random() < 0.5
        if use_ties:
            g = rng.integers(-5, 6, size=n_g).astype(float).tolist()
            i = rng.integers(-5, 6, size=n_i).astype(float).tolist()
        else:
            g = rng.normal(size=n_g).tolist()
            i = rng.normal(size=n_i).tolist()
        assert eh.compute_eer(g, i) == oracle_eer(g, i)

    assert eh.compute_eer([3.0, 4.0], [1.0, 2.0]) == 0.0
    scores = rng.normal(size=10).tolist()
    assert eh.compute_eer(scores, list(scores)) == 50.0

    for _ in range(20):
        g = rng.normal(size=12).tolist()
        i = rng.normal(size=8).tolist()
        base = eh.compute_eer(g, i)
        for fn in (np.exp, lambda v: 5 * v - 3):
            assert eh.compute_eer(fn(np.asarray(g)).tolist(),
                                  fn(np.asarray(i)).tolist()) == pytest.approx(base)


def _learning_population(seed):
    return eh.build_profile_data(
        synth.gen_population(
            synth.PopulationConfig(
                n_users=30, n_genuine=40, n_attacker=20, seed=seed,
                multi_behaviour=False, uniform_jitter_std=0.008,
            )
        )
    )


def test_c07_learning_curve_trend():
    start = time.perf_counter()
    strict_wins = 0
    close_at_10 = 0
    for seed in range(10):
        dataset = _learning_population(seed)
        cfg = eh.HarnessConfig(seed=seed, model_types=("shrunk", "bayes_gauss"),
                               scenarios=("blind",))
        at3 = eh.run_experiment(dataset, cfg, n_train=3)["aggregates"]
        at10 = eh.run_experiment(dataset, cfg, n_train=10)["aggregates"]
        strict_wins += (
            at3["bayes_gauss"]["blind"]["mean"] < at3["shrunk"]["blind"]["mean"]
        )
        close_at_10 += (
            abs(at10["bayes_gauss"]["blind"]["mean"] - at10["shrunk"]["blind"]["mean"]) < 2.0
        )
    assert strict_wins >= 8
    assert close_at_10 == 10
    assert time.perf_counter() - start < 600.0


def test_c08_ots_above_blind():
    models = ("shrunk", "bayes_gauss", "dp_mixture")
    wins = {m: 0 for m in models}
    for seed in range(10):
        traces = synth.gen_population(
            synth.PopulationConfig(
                n_users=20, n_genuine=25, n_attacker=15, seed=seed, ots_fidelity=0.9,
                multi_behaviour=False, uniform_jitter_std=0.008,
            )
        )
        dataset = eh.build_profile_data(traces)
        agg = eh.run_experiment(
            dataset, eh.HarnessConfig(seed=seed, model_types=models), n_train=10
        )["aggregates"]
        for m in models:
            wins[m] += agg[m]["ots"]["mean"] > agg[m]["blind"]["mean"]
    for m in models:
        assert wins[m] >= 6, f"{m}: OTS above blind in only {wins[m]}/10 seeds"


def test_c09_component_counts():
    fwd = synth.BehaviourSpec(
        start=(0.15, 0.3), end=(0.85, 0.3), curvature=0.05,
        duration_mean_ms=400.0, duration_std_ms=30.0, speed_profile="constant",
        jitter_std=0.004, size_mean=0.4, size_std=0.0,
    )
    rev = synth.BehaviourSpec(
        start=(0.85, 0.75), end=(0.15, 0.75), curvature=0.0,
        duration_mean_ms=500.0, duration_std_ms=30.0, speed_profile="bell",
        jitter_std=0.004, size_mean=0.5, size_std=0.0,
    )
    multi = 0
    for seed in range(20):
        spec = synth.UserSpec((fwd, rev), (0.5, 0.5))
        traces = synth.gen_user(spec, 20, np.random.default_rng(seed), "u")
        z, _ = standardize([extract_features(normalize(t)) for t in traces])
        state = dpm.train_dpgmm(z, dpm.DPHyperParams(alpha=1.0, sigma_y_sq=0.25),
                                seed=seed)
        multi += dpm.component_count(state) >= 2
    assert multi >= 16  # >= 80%

    noiseless = synth.BehaviourSpec(
        start=(0.2, 0.5), end=(0.8, 0.55), curvature=0.03,
        duration_mean_ms=450.0, duration_std_ms=0.0, speed_profile="constant",
        jitter_std=0.0, size_mean=0.45, size_std=0.0,
    )
    single = 0
    for seed in range(20):
        spec = synth.UserSpec((noiseless,), (1.0,))
        traces = synth.gen_user(spec, 12, np.random.default_rng(seed), "u")
        z, _ = standardize([extract_features(normalize(t)) for t in traces])
        state = dpm.train_dpgmm(z, dpm.DPHyperParams(alpha=1.0, sigma_y_sq=0.25),
                                seed=seed)
        single += dpm.component_count(state) == 1
    assert single >= 16


def test_c10_feature_pipeline():
    grid = 10
    tg = grid_points(grid)
    t = np.linspace(0.0, 1.0, 100)
    trace = NormalizedTrace(t=t, x=t, y=t**2, size=np.full_like(t, 0.4))
    ch = extract_features(trace, grid).reshape(7, grid)
    interior = slice(1, -1)
    assert np.abs(ch[4] - np.arctan2(2 * tg, 1.0))[interior].max() < 1e-3
    assert np.abs(ch[2] - np.sqrt(1 + 4 * tg**2))[interior].max() < 1e-3
    assert np.abs(ch[3] - 4 * tg / np.sqrt(1 + 4 * tg**2))[interior].max() < 1e-3
    assert np.abs(ch[5] + 16 * tg / (1 + 4 * tg**2) ** 2)[interior].max() < 1e-3

    knots = NormalizedTrace(t=tg, x=np.sin(tg), y=np.cos(tg), size=0.3 + 0.1 * tg)
    ch = extract_features(knots, grid).reshape(7, grid)
    assert np.abs(ch[0] - np.sin(tg)).max() < 1e-9
    assert np.abs(ch[1] - np.cos(tg)).max() < 1e-9


def test_c11_report_fixture():
    published = {
        "shrunk": {"blind": (5.07, 0.00), "ots": (16.06, 9.55)},
        "bayes_gauss": {"blind": (4.54, 0.00), "ots": (16.10, 5.96)},
        "dp_mixture": {"blind": (4.99, 0.00), "ots": (15.70, 9.27)},
    }
    aggregates = {
        model: {
            scen: {"mean": mean, "median": median, "n_profiles": 32}
            for scen, (mean, median) in scens.items()
        }
        for model, scens in published.items()
    }
    table = eh.render_table(aggregates)
    lines = table.splitlines()
    assert "Blind EER" in lines[0] and "OTS EER" in lines[0]
    assert lines[1].count("Mean") == 2 and lines[1].count("Median") == 2
    rows = {line.split("  ")[0] for line in lines[3:]}
    assert rows == {"Shrunk Covariance", "Bayesian Gaussian", "Infinite Mixture"}
    for model, scens in published.items():
        row = next(l for l in lines if l.startswith(eh.MODEL_DISPLAY[model]))
        for mean, median in scens.values():
            assert f"{mean:.2f}" in row and f"{median:.2f}" in row


def test_c12_end_to_end_determinism(tmp_path):
    reports = []
    for run in ("one", "two"):
        data_path = tmp_path / f"pop_{run}.jsonl"
        out_dir = tmp_path / f"report_{run}"
        assert main([
            "synth", "--users", "6", "--swipes", "14", "--attacker-swipes", "6",
            "--seed", "21", "--single-behaviour", "--uniform-jitter", "0.008",
            "--out", str(data_path),
        ]) == EXIT_OK
        assert main([
            "evaluate", str(data_path), "--n-train", "10", "--seed", "21",
            "--out", str(out_dir),
        ]) == EXIT_OK
        reports.append((out_dir / "report.json").read_bytes())
    assert reports[0] == reports[1]
