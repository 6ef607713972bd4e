import numpy as np
import pytest

from youden_gibbs.core import (BOOTSTRAP_PERCENTILE, COVARIATE, ESTIMATED, KNOWN, ClassProbs,
                               ClassWeights, CredibleInterval, CutoffVector, Dataset,
                               Observation, PosteriorChain, estimate_class_probs,
                               known_class_probs, percentile_interval, probs_for, validate)


class TestDataset:

    def test_labels_outside_domain_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            Dataset(x=[1.0, 2.0], y=[1, 5], k=3)

    def test_covariate_labels(self):
        with pytest.raises(ValueError, match="outside"):
            Dataset(x=[1.0, 2.0], y=[0, 1], z=[0.1, 0.2], kind=COVARIATE)

    def test_multiclass_rejects_z(self):
        with pytest.raises(ValueError, match="z given"):
            Dataset(x=[1.0, 2.0], y=[1, 2], z=[0.1, 0.2])

    def test_non_integer_labels(self):
        with pytest.raises(ValueError, match="integers"):
            Dataset(x=[1.0, 2.0], y=[1.5, 2])

    def test_k_defaults_to_largest_label(self):
        data = Dataset(x=[1.0, 2.0, 3.0], y=[1, 3, 2])
        assert data.k == 3
        assert data.counts.tolist() == [1, 1, 1]

    def test_class_x_sorted_per_class(self):
        data = Dataset(x=[3.0, 1.0, 2.0, 0.5], y=[1, 1, 2, 2])
        np.testing.assert_array_equal(data.class_x[0], [1.0, 3.0])
        np.testing.assert_array_equal(data.class_x[1], [0.5, 2.0])

    def test_immutable_arrays(self):
        data = Dataset(x=[1.0, 2.0], y=[1, 2])
        with pytest.raises(ValueError):
            data.x[0] = 5.0

    def test_from_observations(self):
        obs = [Observation(0.1, -1, 0.2), Observation(0.5, 1, 0.9)]
        data = Dataset.from_observations(obs, kind=COVARIATE)
        assert data.kind == COVARIATE
        assert data.observations == obs

    def test_subset_repeats_rows(self):
        data = Dataset(x=[1.0, 2.0, 3.0], y=[1, 2, 2])
        sub = data.subset([0, 0, 2])
        np.testing.assert_array_equal(sub.x, [1.0, 1.0, 3.0])
        assert sub.k == 2


class TestValidate:

    def test_empty_class_reported(self):
        report = validate(Dataset(x=[1.0, 2.0, 3.0], y=[1, 1, 3], k=3))
        assert not report.ok
        assert "class 2 empty" in report.violations
        assert report.counts == {1: 2, 2: 0, 3: 1}

    def test_z_out_of_range(self):
        data = Dataset(x=[1.0, 2.0, 3.0], y=[-1, 1, 1], z=[0.1, 1.5, 0.2], kind=COVARIATE)
        report = validate(data)
        assert any("z out of [0,1] at rows 1" in v for v in report.violations)

    def test_missing_z_and_nonfinite_x(self):
        data = Dataset(x=[np.inf, 2.0], y=[-1, 1], z=[np.nan, 0.2], kind=COVARIATE)
        violations = validate(data).violations
        assert any(v.startswith("x not finite") for v in violations)
        assert any(v.startswith("z missing") for v in violations)

    def test_valid_dataset(self, three_class):
        assert validate(three_class).ok
        three_class.require_valid()

    def test_require_valid_raises(self):
        with pytest.raises(ValueError, match="class 2 empty"):
            Dataset(x=[1.0, 2.0], y=[1, 1], k=2).require_valid()


class TestClassProbs:

    def test_estimated_proportions(self, three_class):
        probs = estimate_class_probs(three_class)
        assert probs.source == ESTIMATED
        np.testing.assert_allclose(probs.values, [1 / 3] * 3)

    def test_estimate_with_empty_class(self):
        with pytest.raises(ValueError, match="empty"):
            estimate_class_probs(Dataset(x=[1.0, 2.0], y=[1, 1], k=2))

    @pytest.mark.parametrize("values", [(0.5, 0.6), (0.0, 1.0), (1.2, -0.2)])
    def test_invalid_values(self, values):
        with pytest.raises(ValueError):
            ClassProbs(values=values)

    def test_probs_for_known_passes_through(self, three_class):
        known = known_class_probs([0.2, 0.3, 0.5])
        assert probs_for(three_class, known) is known
        assert probs_for(three_class, None).source == ESTIMATED

    def test_probs_for_length_mismatch(self, three_class):
        with pytest.raises(ValueError):
            probs_for(three_class, known_class_probs([0.5, 0.5]))

    def test_equal_weights(self):
        assert ClassWeights.equal(4).values == (0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            ClassWeights(values=(1.0,))


class TestCutoffsAndIntervals:

    def test_cutoffs_strictly_increasing(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            CutoffVector(theta=(1.0, 1.0))
        with pytest.raises(ValueError, match="finite"):
            CutoffVector(theta=(1.0, np.nan))
        assert len(CutoffVector(theta=(1.0, 2.0))) == 2

    def test_interval_bounds_checked(self):
        with pytest.raises(ValueError):
            CredibleInterval(lower=2.0, upper=1.0, level=0.95)
        iv = CredibleInterval(lower=1.0, upper=3.0, level=0.95)
        assert iv.width == 2.0
        assert iv.contains(3.0) and not iv.contains(3.5)

    def test_bootstrap_interval_uses_order_statistics(self):
        iv = percentile_interval(np.arange(1, 1001), 0.95, BOOTSTRAP_PERCENTILE)
        assert (iv.lower, iv.upper) == (25.0, 975.0)

    def test_posterior_interval_linear_quantiles(self):
        values = np.arange(1, 1001)
        iv = percentile_interval(values, 0.95)
        assert iv.lower == pytest.approx(np.quantile(values, 0.025))
        assert iv.upper == pytest.approx(np.quantile(values, 0.975))


class TestPosteriorChain:

    def test_unordered_multiclass_draws_rejected(self):
        draws = np.array([[[1.0, 0.5], [1.0, 2.0]]])
        with pytest.raises(ValueError, match="ordering"):
            PosteriorChain(draws=draws, acceptance=[[0.3, 0.3]], burn_in=0, thin=1,
                           learning_rate=1.0)

    def test_acceptance_range(self):
        with pytest.raises(ValueError, match="acceptance"):
            PosteriorChain(draws=np.zeros((1, 5, 1)), acceptance=[[1.5]], burn_in=0, thin=1,
                           learning_rate=1.0)

    def test_pooled_samples(self):
        chain = PosteriorChain(draws=np.arange(12.0).reshape(2, 6, 1),
                               acceptance=[[0.2], [0.4]], burn_in=0, thin=1, learning_rate=1.0)
        assert chain.n_chains == 2 and chain.n_params == 1
        assert chain.samples.shape == (12, 1)
        assert chain.acceptance_rate == pytest.approx(0.3)
