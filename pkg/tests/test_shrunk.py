import numpy as np
import pytest

from swipeguard.models.shrunk import ShrunkModel, score_shrunk, train_shrunk
from swipeguard.stat_core import GaussianParams, SingularModelError, gaussian_logpdf, mle_cov


@pytest.fixture()
def gaussian_samples(rng):
    return [row for row in rng.normal(size=(10, 2))]


class TestTraining:
    def test_alpha_zero_is_axis_aligned(self, rng):
        samples = [row for row in rng.normal(scale=[1.0, 3.0], size=(20, 2))]
        model = train_shrunk(samples, alpha=0.0)
        off_diag = model.gaussian.cov[0, 1]
        assert off_diag == 0.0

    def test_identical_samples_fail(self):
        with pytest.raises(SingularModelError):
            train_shrunk([np.array([1.0, 2.0])] * 2, alpha=0.0)

    def test_density_ordering(self, gaussian_samples):
        model = train_shrunk(gaussian_samples, alpha=0.5)
        assert score_shrunk(model, np.zeros(2)) > score_shrunk(model, np.full(2, 5.0))

    def test_train_loglik_recorded(self, gaussian_samples):
        model = train_shrunk(gaussian_samples, alpha=0.5)
        assert len(model.train_loglik) == 10
        assert all(np.isfinite(v) for v in model.train_loglik)

    def test_auto_alpha_in_grid(self, gaussian_samples):
        model = train_shrunk(gaussian_samples)
        assert 0.0 <= model.alpha <= 1.0

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            train_shrunk([np.zeros(2)])

    def test_rank_deficient_still_scores(self):
        # two samples in 3-D give a rank-1 covariance; the jitter ladder has
        # to keep the requested shrinkage usable
        samples = [np.array([0.0, 0.0, 0.0]), np.array([1.0, 2.0, 3.0])]
        model = train_shrunk(samples, alpha=1.0)
        assert np.isfinite(score_shrunk(model, np.array([0.5, 1.0, 1.5])))


class TestScoring:
    def test_mean_is_mode(self, gaussian_samples):
        model = train_shrunk(gaussian_samples, alpha=0.3)
        mode = score_shrunk(model, model.gaussian.mean)
        for _ in range(20):
            probe = model.gaussian.mean + np.random.default_rng(1).normal(size=2)
            assert mode >= score_shrunk(model, probe)

    def test_matches_density_oracle(self, rng, gaussian_samples):
        model = train_shrunk(gaussian_samples, alpha=0.7)
        x = rng.normal(size=2)
        d = 2
        cov = model.gaussian.cov
        diff = x - model.gaussian.mean
        expected = -0.5 * (
            d * np.log(2 * np.pi) + np.log(np.linalg.det(cov))
            + diff @ np.linalg.inv(cov) @ diff
        )
        assert score_shrunk(model, x) == pytest.approx(expected, abs=1e-10)

    def test_monotone_along_ray(self, gaussian_samples):
        model = train_shrunk(gaussian_samples, alpha=0.5)
        direction = np.array([0.3, -0.7])
        scores = [
            score_shrunk(model, model.gaussian.mean + r * direction) for r in (0, 1, 2, 4, 8)
        ]
        assert all(a > b for a, b in zip(scores, scores[1:]))

    def test_alpha_one_equals_mle_scores(self, rng):
        samples = rng.normal(size=(30, 3))
        model = train_shrunk([row for row in samples], alpha=1.0)
        base = mle_cov(samples)
        x = rng.normal(size=3)
        assert score_shrunk(model, x) == pytest.approx(
            gaussian_logpdf(GaussianParams(base.mean, base.cov), x), abs=1e-12
        )

    def test_training_deterministic(self, gaussian_samples):
        a = train_shrunk(gaussian_samples, alpha=0.4)
        b = train_shrunk(gaussian_samples, alpha=0.4)
        assert np.array_equal(a.gaussian.cov, b.gaussian.cov)
        assert a.train_loglik == b.train_loglik


class TestSerialization:
    def test_round_trip(self, gaussian_samples, rng):
        model = train_shrunk(gaussian_samples, alpha=0.6)
        doc = model.to_dict()
        assert doc["model_type"] == "shrunk"
        restored = ShrunkModel.from_dict(doc)
        x = rng.normal(size=2)
        assert score_shrunk(restored, x) == pytest.approx(score_shrunk(model, x))

    def test_rejects_foreign_document(self):
        with pytest.raises(ValueError):
            ShrunkModel.from_dict({"model_type": "bayes_gauss"})
