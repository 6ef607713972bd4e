"""
Prior distributions

Ordered independent normal prior on multi-class cutoffs (theta distributed as
the order statistics of eta ~ N(mu, diag(sigma^2))) and flat / independent
normal / independent exponential priors on spline coefficients.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp
from scipy.stats import expon, norm

from youden_gibbs.core import CutoffVector, Dataset

logger = logging.getLogger(__name__)

MAX_EXACT_DIM = 6  # permutation sum over at most 6! = 720 terms

FLAT = "flat"
NORMAL = "independent_normal"
EXPONENTIAL = "independent_exponential"
BETA_PRIOR_KINDS = (FLAT, NORMAL, EXPONENTIAL)


@dataclass(frozen=True, eq=False)
class OrderedNormalSpec:
    """
    Ordered independent normal prior.
    flags carries notes from the construction (e.g. floored sds).
    """
    mu: np.ndarray
    sigma: np.ndarray
    flags: tuple = field(default=())

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).ravel()
        sigma = np.array(self.sigma, dtype=float).ravel()
        if mu.shape != sigma.shape:
            raise ValueError(f"mu has {mu.size} entries but sigma has {sigma.size}")
        if not np.all(np.isfinite(mu)):
            raise ValueError("prior means must be finite")
        if np.any(~(sigma > 0)) or not np.all(np.isfinite(sigma)):
            raise ValueError(f"prior sds must be positive, got {sigma}")
        if mu.size > MAX_EXACT_DIM:
            raise ValueError(f"ordered normal density is exact up to {MAX_EXACT_DIM} cutoffs, "
                             f"got {mu.size}")
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        perms = np.array(list(itertools.permutations(range(mu.size))), dtype=int)
        object.__setattr__(self, "_perm_mu", mu[perms])
        object.__setattr__(self, "_perm_sigma", sigma[perms])

    @property
    def dim(self) -> int:
        return self.mu.size

    @classmethod
    def vague(cls, mu, sd: float = 20.0) -> "OrderedNormalSpec":
        mu = np.asarray(mu, dtype=float)
        return cls(mu=mu, sigma=np.full(mu.size, float(sd)))

    def to_dict(self) -> dict:
        return {"kind": "ordered_normal", "mu": self.mu.tolist(), "sigma": self.sigma.tolist(),
                "flags": list(self.flags)}


def ordered_normal_logdensity(spec: OrderedNormalSpec, theta) -> float:
    """
    log sum over permutations pi of prod_j phi((theta_j - mu_pi(j)) / sigma_pi(j)) / sigma_pi(j);
    -inf unless theta is strictly increasing.
    """
    theta = theta.as_array() if isinstance(theta, CutoffVector) else np.asarray(theta, dtype=float)
    if theta.size != spec.dim:
        raise ValueError(f"theta has {theta.size} components, prior has {spec.dim}")
    if theta.size > 1 and np.any(np.diff(theta) <= 0):
        return -np.inf
    terms = norm.logpdf(theta, loc=spec._perm_mu, scale=spec._perm_sigma).sum(axis=1)
    return float(logsumexp(terms))


def sample_ordered_normal(spec: OrderedNormalSpec, rng: np.random.Generator) -> CutoffVector:
    eta = rng.normal(spec.mu, spec.sigma)
    return CutoffVector(theta=np.sort(eta))


@dataclass(frozen=True, eq=False)
class BetaPriorSpec:
    """
    Prior on spline coefficients.

    kind: flat | independent_normal | independent_exponential
    loc, scale: per-coordinate location / scale (broadcast from scalars);
    exponential uses density exp(-(beta - loc)/scale)/scale on beta >= loc.
    bound: coefficients outside |beta_j| <= bound get -inf (None: unbounded)
    """
    kind: str = FLAT
    loc: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None
    bound: Optional[float] = None

    def __post_init__(self):
        if self.kind not in BETA_PRIOR_KINDS:
            raise ValueError(f"unknown beta prior kind '{self.kind}'")
        if self.scale is not None:
            scale = np.atleast_1d(np.asarray(self.scale, dtype=float))
            if np.any(~(scale > 0)):
                raise ValueError(f"prior scales must be positive, got {scale}")
            object.__setattr__(self, "scale", scale)
        if self.loc is not None:
            object.__setattr__(self, "loc", np.atleast_1d(np.asarray(self.loc, dtype=float)))
        if self.bound is not None and not self.bound > 0:
            raise ValueError(f"bound must be positive, got {self.bound}")

    def _loc(self) -> np.ndarray:
        return np.zeros(1) if self.loc is None else self.loc

    def _scale(self) -> np.ndarray:
        return np.ones(1) if self.scale is None else self.scale

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "loc": None if self.loc is None else self.loc.tolist(),
                "scale": None if self.scale is None else self.scale.tolist(),
                "bound": self.bound}


def default_beta_bound(dataset: Dataset) -> float:
    """|beta_j| <= 10 max|x|; keeps the flat-prior Gibbs posterior proper"""
    return 10.0 * max(float(np.max(np.abs(dataset.x))), 1.0)


def beta_prior_logdensity(spec: BetaPriorSpec, beta) -> float:
    beta = np.asarray(beta, dtype=float)
    if spec.bound is not None and np.any(np.abs(beta) > spec.bound):
        return -np.inf
    if spec.kind == FLAT:
        return 0.0
    loc = np.broadcast_to(spec._loc(), beta.shape)
    scale = np.broadcast_to(spec._scale(), beta.shape)
    if spec.kind == NORMAL:
        return float(norm.logpdf(beta, loc=loc, scale=scale).sum())
    return float(expon.logpdf(beta, loc=loc, scale=scale).sum())


def sample_beta_prior(spec: BetaPriorSpec, dim: int, rng: np.random.Generator) -> np.ndarray:
    """
    One coefficient vector from the prior, inside the box |beta_j| <= bound.
    Flat priors draw uniformly in the box and need a bound.
    """
    if spec.kind == FLAT:
        if spec.bound is None:
            raise ValueError("cannot draw from an unbounded flat prior")
        return rng.uniform(-spec.bound, spec.bound, dim)
    loc = np.broadcast_to(spec._loc(), (dim,))
    scale = np.broadcast_to(spec._scale(), (dim,))
    if spec.kind == NORMAL:
        beta = rng.normal(loc, scale)
    else:
        beta = loc + rng.exponential(scale)
    if spec.bound is not None:
        beta = np.clip(beta, -spec.bound, spec.bound)
    return beta
