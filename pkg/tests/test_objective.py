import numpy as np
import pytest
from scipy.interpolate import BSpline

from youden_gibbs.core import (COVARIATE, ClassWeights, CutoffVector, Dataset,
                               estimate_class_probs, known_class_probs)
from youden_gibbs.objective import (BSplineBasis, CovariateRiskEvaluator, SplineModel,
                                    age_study_knots, basis_matrix, bspline_eval, covariate_risk,
                                    multiclass_risk, spline_eval, uniform_knots, youden_index_at)


def _random_basis(rng, d):
    lower = np.sort(-rng.uniform(0.05, 1.0, 3))
    interior = np.sort(rng.uniform(0.0, 1.0, d - 4))
    upper = np.sort(1.0 + rng.uniform(0.05, 1.0, 3))
    return BSplineBasis(knots=np.concatenate([lower, [0.0], interior, [1.0], upper]))


def _direct_risk(theta, data, probs):
    """(1/n) sum_j [C_{j+1}(theta_j)/p_{j+1} - C_j(theta_j)/p_j] by brute force"""
    p = probs.as_array()
    total = 0.0
    for j, t in enumerate(theta):
        total += np.sum((data.x <= t) & (data.y == j + 2)) / p[j + 1]
        total -= np.sum((data.x <= t) & (data.y == j + 1)) / p[j]
    return total / data.n


class TestMulticlassRisk:

    def test_separable_two_class(self, separable_two_class):
        probs = estimate_class_probs(separable_two_class)
        assert multiclass_risk(CutoffVector(theta=2.5), separable_two_class, probs) == pytest.approx(-1.0)
        assert youden_index_at(CutoffVector(theta=2.5), separable_two_class, probs) == pytest.approx(1.0)

    @pytest.mark.parametrize("theta", [0.0, 10.0])
    def test_cutoff_outside_data(self, separable_two_class, theta):
        probs = estimate_class_probs(separable_two_class)
        assert multiclass_risk(CutoffVector(theta=theta), separable_two_class, probs) == pytest.approx(0.0)

    def test_matches_direct_sum(self, three_class, rng):
        probs = estimate_class_probs(three_class)
        for _ in range(20):
            theta = np.sort(rng.uniform(0, 20, 2))
            assert multiclass_risk(CutoffVector(theta=theta), three_class, probs) == \
                pytest.approx(_direct_risk(theta, three_class, probs), abs=1e-12)

    def test_equal_weights_reproduce_unweighted(self, three_class):
        probs = known_class_probs([0.2, 0.3, 0.5])
        theta = CutoffVector(theta=(2.0, 5.0))
        assert multiclass_risk(theta, three_class, probs, ClassWeights.equal(3)) == \
            pytest.approx(_direct_risk(theta.theta, three_class, probs), abs=1e-12)

    def test_unequal_weights(self, separable_two_class):
        probs = estimate_class_probs(separable_two_class)
        # w=0.8: 2 * [0.2 * 0/0.5 - 0.8 * 2/0.5] / 4
        risk = multiclass_risk(CutoffVector(theta=2.5), separable_two_class, probs,
                               ClassWeights(values=(0.8,)))
        assert risk == pytest.approx(-1.6)

    def test_dimension_checked(self, three_class):
        with pytest.raises(ValueError, match="k-1"):
            multiclass_risk(CutoffVector(theta=(1.0,)), three_class,
                            estimate_class_probs(three_class))


class TestBSplineBasis:

    def test_knot_validation(self):
        with pytest.raises(ValueError):
            BSplineBasis(knots=[-0.3, -0.2, -0.1, 0.0, 1.0, 1.1, 1.2])  # d = 3
        with pytest.raises(ValueError, match="t_0 = 0"):
            BSplineBasis(knots=[-0.3, -0.2, -0.1, 0.1, 1.0, 1.1, 1.2, 1.3])
        with pytest.raises(ValueError, match="non-decreasing"):
            BSplineBasis(knots=[-0.1, -0.2, -0.3, 0.0, 1.0, 1.1, 1.2, 1.3])

    def test_age_study_knot_pattern(self):
        basis = age_study_knots()
        ages = 20 + 69 * basis.knots
        np.testing.assert_allclose(ages, [-20, -10, 0, 20, 89, 110, 120, 130], atol=1e-12)
        assert basis.d == 4

    def test_partition_of_unity_random_grids(self, rng):
        z = np.linspace(0.0, 1.0, 1000)
        for _ in range(20):
            basis = _random_basis(rng, int(rng.integers(4, 12)))
            np.testing.assert_allclose(basis_matrix(basis, z).sum(axis=1), 1.0, atol=1e-10)

    def test_local_support(self, rng):
        basis = _random_basis(rng, 8)
        z = np.linspace(0.0, 1.0, 1000)
        values = basis_matrix(basis, z)
        for j in range(1, basis.d + 1):
            outside = (z < basis.knots[j - 1]) | (z > basis.knots[j + 3])
            assert np.all(values[outside, j - 1] == 0.0)
        assert np.all(values >= 0.0)

    def test_matches_scipy_basis_elements(self, rng):
        basis = _random_basis(rng, 7)
        z = rng.uniform(0.0, 1.0, 200)
        values = basis_matrix(basis, z)
        for j in range(basis.d):
            element = BSpline.basis_element(basis.knots[j:j + 5], extrapolate=False)
            np.testing.assert_allclose(values[:, j], np.nan_to_num(element(z)), atol=1e-12)

    def test_cardinal_midpoint(self):
        # uniform cubic b-spline at the centre of its support
        basis = uniform_knots(7)
        assert bspline_eval(basis, 4, 0.5) == pytest.approx(2 / 3, abs=1e-12)

    def test_lower_orders_partition_unity(self):
        basis = uniform_knots(6)
        z = np.linspace(0.0, 1.0, 101)
        for order in (1, 2, 3):
            np.testing.assert_allclose(basis_matrix(basis, z, order).sum(axis=1), 1.0, atol=1e-12)

    def test_z_outside_unit_interval(self):
        with pytest.raises(ValueError, match="outside"):
            basis_matrix(uniform_knots(5), [0.5, 1.2])

    def test_index_range(self):
        with pytest.raises(ValueError):
            bspline_eval(uniform_knots(5), 6, 0.5)


class TestCovariateRisk:

    def test_constant_curve_is_flat(self):
        model = SplineModel.constant(age_study_knots(6), 2.5)
        np.testing.assert_allclose(spline_eval(model, np.linspace(0, 1, 50)), 2.5, atol=1e-12)
        assert spline_eval(model, 0.3) == pytest.approx(2.5)

    def test_separating_curve(self, separable_covariate):
        probs = estimate_class_probs(separable_covariate)
        basis = age_study_knots()
        # z - 0.5 is cubic, so the cubic basis reproduces it exactly
        coef = np.linalg.lstsq(basis_matrix(basis, np.linspace(0, 1, 50)),
                               np.linspace(0, 1, 50) - 0.5, rcond=None)[0]
        risk = covariate_risk(SplineModel(basis=basis, beta=coef), separable_covariate, probs)
        assert risk == pytest.approx(-1.0)

    def test_curve_below_everything(self, separable_covariate):
        probs = estimate_class_probs(separable_covariate)
        model = SplineModel.constant(age_study_knots(), -100.0)
        assert covariate_risk(model, separable_covariate, probs) == 0.0

    def test_needs_covariate_data(self, three_class):
        with pytest.raises(ValueError):
            CovariateRiskEvaluator(three_class, estimate_class_probs(three_class), age_study_knots())

    def test_beta_length_checked(self):
        with pytest.raises(ValueError, match="coefficients"):
            SplineModel(basis=age_study_knots(5), beta=np.zeros(4))

    def test_signed_weights(self):
        data = Dataset(x=[0.0, 1.0, 2.0], y=[-1, 1, 1], z=[0.1, 0.5, 0.9], kind=COVARIATE)
        probs = known_class_probs([0.25, 0.75])
        evaluator = CovariateRiskEvaluator(data, probs, age_study_knots())
        np.testing.assert_allclose(evaluator.signed_weight, [-1 / 0.75, 1 / 2.25, 1 / 2.25])
