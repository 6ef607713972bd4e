import numpy as np
import pytest

from youden_gibbs import calibration
from youden_gibbs.calibration import (MARGINAL, GpcConfig, bootstrap_datasets, calibrate,
                                      estimate_coverage)
from youden_gibbs.core import estimate_class_probs, known_class_probs
from youden_gibbs.mestimator import minimize_multiclass
from youden_gibbs.prior import OrderedNormalSpec
from youden_gibbs.sampler import SamplerConfig


@pytest.fixture
def vague_prior(three_class):
    theta_hat = minimize_multiclass(three_class, estimate_class_probs(three_class)).theta_hat
    return OrderedNormalSpec.vague(theta_hat.as_array())


def _fixed_coverage(values):
    """Stand-in for estimate_coverage returning the given coverages in turn"""
    seen = []

    def fake(omega, *args, **kwargs):
        seen.append(omega)
        return values[min(len(seen), len(values)) - 1]
    return fake, seen


class TestCalibrate:

    def test_converges_at_target(self, monkeypatch, three_class, vague_prior):
        fake, seen = _fixed_coverage([0.95])
        monkeypatch.setattr(calibration, "estimate_coverage", fake)
        trace = calibrate(three_class, None, vague_prior, GpcConfig(B=50, omega_init=2.0))
        assert trace.converged and not trace.clamped
        assert trace.final_omega == pytest.approx(2.0)
        assert trace.iterations == 1 == len(seen)

    def test_overcoverage_raises_omega(self, monkeypatch, three_class, vague_prior):
        fake, _ = _fixed_coverage([1.0])
        monkeypatch.setattr(calibration, "estimate_coverage", fake)
        with pytest.warns(RuntimeWarning, match="not converged"):
            trace = calibrate(three_class, None, vague_prior, GpcConfig(B=50, max_iter=5))
        assert not trace.converged
        assert trace.iterations == 5
        assert np.all(np.diff(trace.omegas) > 0)
        # all coverages tie, the latest omega is kept
        assert trace.final_omega == trace.omegas[-1]
        assert trace.flags

    def test_update_rule(self, monkeypatch, three_class, vague_prior):
        fake, _ = _fixed_coverage([0.75, 0.95])
        monkeypatch.setattr(calibration, "estimate_coverage", fake)
        trace = calibrate(three_class, None, vague_prior, GpcConfig(B=50, kappa0=2.0))
        # log omega_2 = log 1 + 2 * 1^-0.51 * (0.75 - 0.95)
        assert trace.omegas[1] == pytest.approx(np.exp(-0.4))
        assert trace.converged
        assert trace.final_omega == trace.omegas[-1]

    def test_closest_coverage_kept(self, monkeypatch, three_class, vague_prior):
        fake, _ = _fixed_coverage([0.5, 0.9, 0.6])
        monkeypatch.setattr(calibration, "estimate_coverage", fake)
        with pytest.warns(RuntimeWarning):
            trace = calibrate(three_class, None, vague_prior, GpcConfig(B=50, max_iter=3))
        assert trace.final_omega == trace.omegas[1]

    def test_clamped(self, monkeypatch, three_class, vague_prior):
        fake, _ = _fixed_coverage([0.0])
        monkeypatch.setattr(calibration, "estimate_coverage", fake)
        with pytest.warns(RuntimeWarning, match="clamped"):
            trace = calibrate(three_class, None, vague_prior, GpcConfig(B=50, kappa0=1000.0))
        assert trace.clamped and not trace.converged
        assert trace.omegas == (1.0, 1e-6)
        assert trace.final_omega == 1e-6

    def test_trace_frame(self, monkeypatch, three_class, vague_prior):
        fake, _ = _fixed_coverage([0.8, 0.94])
        monkeypatch.setattr(calibration, "estimate_coverage", fake)
        frame = calibrate(three_class, None, vague_prior, GpcConfig(B=50)).to_frame()
        assert list(frame.columns) == ["iteration", "omega", "coverage"]
        assert frame["iteration"].tolist() == [1, 2]


class TestCoverage:

    @pytest.fixture
    def small_sampler(self):
        return SamplerConfig(iterations=600, burn_in=100, chains=1)

    def test_tiny_learning_rate_covers(self, three_class, vague_prior, small_sampler):
        config = GpcConfig(B=50, seed=3)
        coverage = estimate_coverage(1e-3, three_class, None, vague_prior, config,
                                     sampler=small_sampler)
        assert coverage == 1.0

    def test_deterministic(self, three_class, vague_prior, small_sampler):
        config = GpcConfig(B=50, seed=4, coverage_mode=MARGINAL)
        probs = known_class_probs([1 / 3, 1 / 3, 1 / 3])
        first = estimate_coverage(1.0, three_class, probs, vague_prior, config, sampler=small_sampler)
        again = estimate_coverage(1.0, three_class, probs, vague_prior, config, sampler=small_sampler)
        assert first == again
        assert 0.0 <= first <= 1.0

    def test_coverage_drops_for_large_learning_rate(self, three_class, vague_prior, small_sampler):
        config = GpcConfig(B=50, seed=5)
        moderate = estimate_coverage(1.0, three_class, None, vague_prior, config,
                                     sampler=small_sampler)
        sharp = estimate_coverage(1e4, three_class, None, vague_prior, config,
                                  sampler=small_sampler)
        assert sharp < moderate

    def test_resamples_stratified_for_known_probs(self, three_class):
        config = GpcConfig(B=50, seed=1)
        resamples = bootstrap_datasets(three_class, known_class_probs([0.2, 0.3, 0.5]), config)
        assert len(resamples) == 50
        assert all(r.counts.tolist() == [40, 40, 40] for r in resamples)

    def test_positive_omega_required(self, three_class, vague_prior):
        with pytest.raises(ValueError):
            estimate_coverage(0.0, three_class, None, vague_prior, GpcConfig(B=50))


class TestGpcConfig:

    @pytest.mark.parametrize("kwargs", [dict(B=10), dict(level=1.0), dict(max_iter=0),
                                        dict(tol=0.0), dict(kappa0=-1.0), dict(omega_init=0.0),
                                        dict(coverage_mode="pairwise")])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GpcConfig(**kwargs)

    def test_inner_sampler(self):
        inner = GpcConfig(inner_iterations=800, inner_burn_in=200, seed=9).inner_sampler()
        assert (inner.iterations, inner.burn_in, inner.chains, inner.seed) == (800, 200, 1, 9)
