"""
Outcome distributions of the diagnostic classes used in the simulation scenarios
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats

GAMMA = "gamma"
NORMAL = "normal"
NORMAL_MIXTURE = "normal_mixture"
STUDENT_T = "t"
BETA = "beta"
CHI2 = "chi2"


def _frozen(family: str, params: tuple):
    if family == GAMMA:
        shape, scale = params
        return stats.gamma(a=shape, scale=scale)
    if family == NORMAL:
        loc, sd = params
        return stats.norm(loc=loc, scale=sd)
    if family == STUDENT_T:
        df, loc, scale = params
        return stats.t(df=df, loc=loc, scale=scale)
    if family == BETA:
        a, b = params
        return stats.beta(a=a, b=b)
    if family == CHI2:
        (df,) = params
        return stats.chi2(df=df)
    raise ValueError(f"unknown distribution family '{family}'")


@dataclass(frozen=True)
class ClassDistribution:
    """
    Outcome distribution F_j of one diagnostic class.

    params by family:
        gamma (shape, scale) | normal (mean, sd) | t (df, loc, scale)
        beta (a, b) | chi2 (df,) | normal_mixture ((weight, mean, sd), ...)
    """
    name: str
    family: str
    params: tuple

    def __post_init__(self):
        if self.family == NORMAL_MIXTURE:
            weights = np.array([c[0] for c in self.params], dtype=float)
            if np.any(weights <= 0) or abs(weights.sum() - 1) > 1e-12:
                raise ValueError(f"{self.name}: mixture weights must be positive and sum to 1")
            components = tuple(_frozen(NORMAL, c[1:]) for c in self.params)
        else:
            weights = np.ones(1)
            components = (_frozen(self.family, self.params),)
        object.__setattr__(self, "_weights", weights)
        object.__setattr__(self, "_components", components)

    def pdf(self, x):
        return sum(w * c.pdf(x) for w, c in zip(self._weights, self._components))

    def cdf(self, x):
        return sum(w * c.cdf(x) for w, c in zip(self._weights, self._components))

    def ppf_bounds(self, q: float) -> tuple:
        """(lower, upper) bracketing the q and 1-q quantiles over all mixture components"""
        return (min(c.ppf(q) for c in self._components),
                max(c.ppf(1 - q) for c in self._components))

    def rvs(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if len(self._components) == 1:
            return np.asarray(self._components[0].rvs(size=size, random_state=rng), dtype=float)
        which = rng.choice(len(self._components), size=size, p=self._weights)
        out = np.empty(size)
        for i, c in enumerate(self._components):
            rows = which == i
            out[rows] = c.rvs(size=int(rows.sum()), random_state=rng)
        return out


@dataclass(frozen=True)
class CovariateClassModel:
    """
    Conditional outcome distribution F(x | z) of one class:
    normal(loc(z), scale(z)) or Student t(df) shifted by loc(z) and scaled by scale(z)
    """
    name: str
    family: str
    loc: Callable
    scale: Callable
    df: Optional[float] = None

    def __post_init__(self):
        if self.family not in (NORMAL, STUDENT_T):
            raise ValueError(f"{self.name}: covariate models are normal or t, got {self.family}")
        if self.family == STUDENT_T and not (self.df or 0) > 0:
            raise ValueError(f"{self.name}: t model needs positive df")

    def at(self, z):
        z = np.asarray(z, dtype=float)
        if self.family == NORMAL:
            return stats.norm(loc=self.loc(z), scale=self.scale(z))
        return stats.t(df=self.df, loc=self.loc(z), scale=self.scale(z))

    def pdf(self, x, z):
        return self.at(z).pdf(x)

    def cdf(self, x, z):
        return self.at(z).cdf(x)

    def rvs(self, z, rng: np.random.Generator) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.asarray(self.at(z).rvs(size=z.size, random_state=rng), dtype=float)


def _unit(z):
    return np.ones_like(z)


# Multi-class scenarios, classes in increasing order
# ---------------------------------------------------------

Gamma_2_1 = ClassDistribution(name="Gamma(2,1)", family=GAMMA, params=(2.0, 1.0))
Gamma_3_1 = ClassDistribution(name="Gamma(3,1)", family=GAMMA, params=(3.0, 1.0))
Gamma_5_2 = ClassDistribution(name="Gamma(5,2)", family=GAMMA, params=(5.0, 2.0))

Mix_low = ClassDistribution(name="1/2 N(-1.5,0.5^2) + 1/2 N(0.5,1)", family=NORMAL_MIXTURE,
                            params=((0.5, -1.5, 0.5), (0.5, 0.5, 1.0)))
Mix_mid = ClassDistribution(name="1/2 N(1,1) + 1/2 N(4,1.5^2)", family=NORMAL_MIXTURE,
                            params=((0.5, 1.0, 1.0), (0.5, 4.0, 1.5)))
Normal_5_2 = ClassDistribution(name="N(5,2^2)", family=NORMAL, params=(5.0, 2.0))

T_2 = ClassDistribution(name="t(2)", family=STUDENT_T, params=(2.0, 0.0, 1.0))
Beta_2_2 = ClassDistribution(name="Beta(2,2)", family=BETA, params=(2.0, 2.0))
Chi2_1 = ClassDistribution(name="chi2(1)", family=CHI2, params=(1.0,))


# Covariate scenarios, (healthy -1, diseased +1)
# ---------------------------------------------------------

Cov1_healthy = CovariateClassModel(name="N(0.5+z, 1.5^2)", family=NORMAL,
                                   loc=lambda z: 0.5 + z,
                                   scale=lambda z: 1.5 * _unit(z))
Cov1_diseased = CovariateClassModel(name="N(2+4z, 2^2)", family=NORMAL,
                                    loc=lambda z: 2.0 + 4.0 * z,
                                    scale=lambda z: 2.0 * _unit(z))

# heteroscedastic
Cov2_healthy = CovariateClassModel(name="N(3+1.5 sin(pi z), (0.2+e^z)^2)", family=NORMAL,
                                   loc=lambda z: 3.0 + 1.5 * np.sin(np.pi * z),
                                   scale=lambda z: 0.2 + np.exp(z))
Cov2_diseased = CovariateClassModel(name="N(5+1.5z+1.5 sin z, 1.5+Phi(10z-2))", family=NORMAL,
                                    loc=lambda z: 5.0 + 1.5 * z + 1.5 * np.sin(z),
                                    scale=lambda z: np.sqrt(1.5 + stats.norm.cdf(10 * z - 2)))

# heavy tails
Cov3_healthy = CovariateClassModel(name="t(3+1.5 sin(pi z), 2)", family=STUDENT_T, df=2.0,
                                   loc=lambda z: 3.0 + 1.5 * np.sin(np.pi * z),
                                   scale=_unit)
Cov3_diseased = CovariateClassModel(name="t(5+1.5z+1.5 sin z, 2)", family=STUDENT_T, df=2.0,
                                    loc=lambda z: 5.0 + 1.5 * z + 1.5 * np.sin(z),
                                    scale=_unit)
