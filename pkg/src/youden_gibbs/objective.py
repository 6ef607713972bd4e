"""
Empirical risk functions and the cubic b-spline basis

Multi-class risk (weighted, scaled by 2 so equal weights reproduce the
unweighted empirical objective exactly), covariate-adjusted risk of a
spline cutoff curve theta(z) = beta^T B_d(z), and Youden's index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from youden_gibbs.core import (COVARIATE, MULTICLASS, ClassProbs, ClassWeights, CutoffVector,
                               Dataset)

logger = logging.getLogger(__name__)

SPLINE_ORDER = 4  # cubic

# Exterior knot offsets of the age-adjusted diabetes analysis, rescaled from
# ages (-20, -10, 0 | 110, 120, 130) over the observed age range [20, 89]
AGE_STUDY_LOWER_KNOTS = (-40 / 69, -30 / 69, -20 / 69)
AGE_STUDY_UPPER_KNOTS = (1 + 21 / 69, 1 + 31 / 69, 1 + 41 / 69)


@dataclass(frozen=True, eq=False)
class BSplineBasis:
    """
    Cubic b-spline basis with d functions on d+4 knots t_{-3} <= ... <= t_d,
    where t_0 = 0 and t_{d-3} = 1 and the knots in between are strictly increasing.
    Basis function j (1-based) is supported on [knots[j-1], knots[j+3]].
    """
    knots: np.ndarray
    order: int = SPLINE_ORDER

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float).ravel()
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        if self.order != SPLINE_ORDER:
            raise ValueError("only cubic (order 4) b-splines are supported")
        d = knots.size - 4
        if d < 4:
            raise ValueError(f"need at least 8 knots (d >= 4), got {knots.size}")
        if not np.all(np.isfinite(knots)):
            raise ValueError("knots must be finite")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")
        if knots[3] != 0.0 or knots[d] != 1.0:
            raise ValueError(f"need t_0 = 0 and t_(d-3) = 1, got {knots[3]} and {knots[d]}")
        if np.any(np.diff(knots[3:d + 1]) <= 0):
            raise ValueError("knots inside [0,1] must be strictly increasing")

    @property
    def d(self) -> int:
        return self.knots.size - 4

    @property
    def interior_knots(self) -> np.ndarray:
        return self.knots[4:self.d]


def uniform_knots(d: int) -> BSplineBasis:
    """Equally spaced knots t_i = i/(d-3), i = -3..d"""
    if d < 4:
        raise ValueError(f"need d >= 4, got {d}")
    h = 1.0 / (d - 3)
    knots = np.arange(-3, d + 1) * h
    knots[3], knots[d] = 0.0, 1.0
    return BSplineBasis(knots=knots)


def age_study_knots(d: int = 4,
                    lower=AGE_STUDY_LOWER_KNOTS,
                    upper=AGE_STUDY_UPPER_KNOTS) -> BSplineBasis:
    """
    Three fixed exterior knots on each side of [0, 1] (age-analysis pattern by
    default) and d-4 equally spaced interior knots
    """
    if d < 4:
        raise ValueError(f"need d >= 4, got {d}")
    interior = np.linspace(0.0, 1.0, d - 2)
    return BSplineBasis(knots=np.concatenate([lower, interior, upper]))


def _check_unit_interval(z: np.ndarray) -> None:
    if np.any(~np.isfinite(z)) or np.any((z < 0) | (z > 1)):
        bad = z[~(np.isfinite(z) & (z >= 0) & (z <= 1))]
        raise ValueError(f"z outside [0,1]: {bad[:5]}")


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # 0/0 (and x/0) terms of the recursion contribute 0
    ok = den > 0
    return np.where(ok, num / np.where(ok, den, 1.0), 0.0)


def basis_matrix(basis: BSplineBasis, z, order: int = SPLINE_ORDER) -> np.ndarray:
    """
    Cox-de Boor evaluation of all order-`order` basis functions at z.

    Returns shape (len(z), d + 4 - order). Order-1 intervals are half-open
    [t_i, t_{i+1}) except the one ending at t_{d-3} = 1, which is closed.
    """
    if not 1 <= order <= SPLINE_ORDER:
        raise ValueError(f"order must be in 1..{SPLINE_ORDER}, got {order}")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_unit_interval(z)
    t = basis.knots
    zc = z[:, None]

    N = ((t[:-1] <= zc) & (zc < t[1:])).astype(float)
    at_end = z == 1.0
    if np.any(at_end):
        N[at_end, :] = 0.0
        N[at_end, basis.d - 1] = 1.0

    for ell in range(2, order + 1):
        i = np.arange(N.shape[1] - 1)
        left = _safe_ratio(zc - t[i], t[i + ell - 1] - t[i])
        right = _safe_ratio(t[i + ell] - zc, t[i + ell] - t[i + 1])
        N = left * N[:, :-1] + right * N[:, 1:]
    return N


def bspline_eval(basis: BSplineBasis, j: int, z: float, order: int = SPLINE_ORDER) -> float:
    """Value of the j-th (1-based) basis function of the given order at z"""
    n_funcs = basis.knots.size - order
    if not 1 <= j <= n_funcs:
        raise ValueError(f"basis index j must be in 1..{n_funcs}, got {j}")
    return float(basis_matrix(basis, [z], order=order)[0, j - 1])


@dataclass(frozen=True, eq=False)
class SplineModel:
    """Cutoff curve theta(z) = sum_j beta_j B_j(z)"""
    basis: BSplineBasis
    beta: np.ndarray

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).ravel()
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        if beta.size != self.basis.d:
            raise ValueError(f"beta has {beta.size} coefficients, basis has d={self.basis.d}")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta must be finite")

    @classmethod
    def constant(cls, basis: BSplineBasis, c: float) -> "SplineModel":
        # partition of unity: equal coefficients give a flat curve
        return cls(basis=basis, beta=np.full(basis.d, float(c)))


def spline_eval(model: SplineModel, z):
    """theta(z) for scalar or array z"""
    values = basis_matrix(model.basis, z) @ model.beta
    return float(values[0]) if np.ndim(z) == 0 else values


# Multi-class risk
# ---------------------------------------------------------

def _check_multiclass(dataset: Dataset, n_theta: int) -> None:
    if dataset.kind != MULTICLASS:
        raise ValueError("multiclass risk needs a multiclass dataset")
    if n_theta != dataset.k - 1:
        raise ValueError(f"theta has {n_theta} components, expected k-1 = {dataset.k - 1}")


class MulticlassRiskEvaluator:
    """
    Precomputed multi-class empirical risk.

    component j at cutoff t is
        (2/n) [ (1-w_j) C_{j+1}(t) / p_{j+1} - w_j C_j(t) / p_j ],
    C_j(t) the count of class-j observations with x <= t. The risk is the sum
    over j = 1..k-1.
    """

    def __init__(self, dataset: Dataset, probs: ClassProbs, weights: Optional[ClassWeights] = None):
        if dataset.kind != MULTICLASS:
            raise ValueError("multiclass risk needs a multiclass dataset")
        if weights is None:
            weights = ClassWeights.equal(dataset.k)
        if len(weights.values) != dataset.k - 1:
            raise ValueError(f"{len(weights.values)} weights for k={dataset.k}")
        if len(probs.values) != dataset.k:
            raise ValueError(f"{len(probs.values)} class probabilities for k={dataset.k}")
        self.dataset = dataset
        self.probs = probs
        self.weights = weights
        n = dataset.n
        p = probs.as_array()
        w = weights.as_array()
        self.upper_coef = 2.0 * (1.0 - w) / (n * p[1:])  # on class j+1
        self.lower_coef = 2.0 * w / (n * p[:-1])  # on class j
        self.class_x = dataset.class_x

    @property
    def dim(self) -> int:
        return self.dataset.k - 1

    def counts_below(self, c: int, t):
        """Number of class-index-c observations with x <= t"""
        return np.searchsorted(self.class_x[c], t, side="right")

    def component(self, j: int, t):
        """Risk contribution of cutoff j (0-based) placed at t (scalar or array)"""
        return (self.upper_coef[j] * self.counts_below(j + 1, t)
                - self.lower_coef[j] * self.counts_below(j, t))

    def risk(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(sum(self.component(j, theta[j]) for j in range(self.dim)))


def multiclass_risk(theta: CutoffVector, dataset: Dataset, probs: ClassProbs,
                    weights: Optional[ClassWeights] = None) -> float:
    theta_arr = theta.as_array() if isinstance(theta, CutoffVector) else np.atleast_1d(theta)
    _check_multiclass(dataset, theta_arr.size)
    return MulticlassRiskEvaluator(dataset, probs, weights).risk(theta_arr)


def youden_index_at(theta: CutoffVector, dataset: Dataset, probs: ClassProbs,
                    weights: Optional[ClassWeights] = None) -> float:
    """Empirical Youden index sum at theta: the negated risk"""
    return -multiclass_risk(theta, dataset, probs, weights)


# Covariate-adjusted risk
# ---------------------------------------------------------

class CovariateRiskEvaluator:
    """
    Precomputed covariate-adjusted risk
        (1/n) sum_i [ 1(x_i <= theta(z_i), y_i = 1)/p_1 - 1(x_i <= theta(z_i), y_i = -1)/p_{-1} ]
    with the basis matrix B_d(z_i) evaluated once.
    """

    def __init__(self, dataset: Dataset, probs: ClassProbs, basis: BSplineBasis):
        if dataset.kind != COVARIATE:
            raise ValueError("covariate risk needs a covariate dataset")
        if np.any(np.isnan(dataset.z)):
            raise ValueError("z missing for some observations")
        if len(probs.values) != 2:
            raise ValueError("covariate risk needs two class probabilities")
        self.dataset = dataset
        self.probs = probs
        self.basis = basis
        self.design = basis_matrix(basis, dataset.z)
        p_neg, p_pos = probs.values
        n = dataset.n
        # label order is (-1, +1)
        self.signed_weight = np.where(dataset.y == 1, 1.0 / (n * p_pos), -1.0 / (n * p_neg))
        self.x = dataset.x

    @property
    def dim(self) -> int:
        return self.basis.d

    def curve(self, beta) -> np.ndarray:
        return self.design @ np.asarray(beta, dtype=float)

    def risk_from_curve(self, theta_z: np.ndarray) -> float:
        return float(self.signed_weight[self.x <= theta_z].sum())

    def risk(self, beta) -> float:
        return self.risk_from_curve(self.curve(beta))


def covariate_risk(model: SplineModel, dataset: Dataset, probs: ClassProbs) -> float:
    return CovariateRiskEvaluator(dataset, probs, model.basis).risk(model.beta)
