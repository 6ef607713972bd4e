"""
Gibbs posterior sampling

The Gibbs posterior has unnormalized log density
    -omega * n * R_n(param) + log prior(param)
and is sampled with coordinate-wise Gaussian random-walk Metropolis steps
(Metropolis-within-Gibbs). Proposal scales adapt by Robbins-Monro during
burn-in only and are frozen afterwards.
"""
from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import arviz as az
import numpy as np
import pandas as pd

from youden_gibbs.core import (COVARIATE, GIBBS_QUANTILE, MULTICLASS, ClassProbs, ClassWeights,
                               Dataset, PosteriorChain, percentile_interval)
from youden_gibbs.objective import (BSplineBasis, CovariateRiskEvaluator,
                                    MulticlassRiskEvaluator, basis_matrix)
from youden_gibbs.prior import (FLAT, BetaPriorSpec, OrderedNormalSpec, beta_prior_logdensity,
                                default_beta_bound, ordered_normal_logdensity,
                                sample_beta_prior, sample_ordered_normal)
from youden_gibbs.various.parallel import parallel_map, task_rng

logger = logging.getLogger(__name__)

FROM_MESTIMATE = "from_mestimate"
FROM_PRIOR = "from_prior"
EXPLICIT = "explicit"
INIT_MODES = (FROM_MESTIMATE, FROM_PRIOR, EXPLICIT)

MIN_ESS = 100
MAX_RHAT = 1.05
ADAPT_EXPONENT = 0.6


@dataclass(frozen=True, eq=False)
class GibbsPosteriorSpec:
    """
    Gibbs posterior for the multi-class cutoff (prior: OrderedNormalSpec) or for
    the spline coefficients of a covariate-adjusted cutoff (prior: BetaPriorSpec,
    basis required). A flat or unbounded coefficient prior gets the default box
    |beta_j| <= 10 max|x|.
    """
    dataset: Dataset
    probs: ClassProbs
    prior: Union[OrderedNormalSpec, BetaPriorSpec]
    learning_rate: float = 1.0
    weights: Optional[ClassWeights] = None
    basis: Optional[BSplineBasis] = None

    def __post_init__(self):
        if not self.learning_rate >= 0 or not np.isfinite(self.learning_rate):
            raise ValueError(f"learning rate must be non-negative, got {self.learning_rate}")
        if self.dataset.kind == MULTICLASS:
            if not isinstance(self.prior, OrderedNormalSpec):
                raise ValueError("multiclass Gibbs posterior needs an OrderedNormalSpec prior")
            if self.prior.dim != self.dataset.k - 1:
                raise ValueError(f"prior has {self.prior.dim} cutoffs, data need {self.dataset.k - 1}")
            evaluator = MulticlassRiskEvaluator(self.dataset, self.probs, self.weights)
        else:
            if self.basis is None:
                raise ValueError("covariate Gibbs posterior needs a b-spline basis")
            if not isinstance(self.prior, BetaPriorSpec):
                raise ValueError("covariate Gibbs posterior needs a BetaPriorSpec prior")
            if self.prior.bound is None and self.prior.kind == FLAT:
                bound = default_beta_bound(self.dataset)
                logger.debug("flat coefficient prior bounded to |beta_j| <= %.6g", bound)
                object.__setattr__(self, "prior", dataclasses.replace(self.prior, bound=bound))
            evaluator = CovariateRiskEvaluator(self.dataset, self.probs, self.basis)
        object.__setattr__(self, "evaluator", evaluator)

    @property
    def kind(self) -> str:
        return self.dataset.kind

    @property
    def dim(self) -> int:
        return self.evaluator.dim

    def log_prior(self, param) -> float:
        if self.kind == MULTICLASS:
            return ordered_normal_logdensity(self.prior, param)
        return beta_prior_logdensity(self.prior, param)

    def with_learning_rate(self, omega: float) -> "GibbsPosteriorSpec":
        return dataclasses.replace(self, learning_rate=omega)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "learning_rate": self.learning_rate,
                "prior": self.prior.to_dict(),
                "probs": {"values": list(self.probs.values), "source": self.probs.source},
                "weights": None if self.weights is None else list(self.weights.values)}


def log_pseudo_posterior(spec: GibbsPosteriorSpec, param) -> float:
    """-omega n R_n(param) + log prior(param), -inf outside the prior support"""
    param = np.asarray(getattr(param, "theta", param), dtype=float)
    if param.size != spec.dim:
        raise ValueError(f"parameter has {param.size} components, expected {spec.dim}")
    log_prior = spec.log_prior(param)
    if not np.isfinite(log_prior):
        return -np.inf
    return -spec.learning_rate * spec.dataset.n * spec.evaluator.risk(param) + log_prior


@dataclass(frozen=True)
class SamplerConfig:
    iterations: int = 20000
    burn_in: int = 5000
    thin: int = 1
    chains: int = 4
    init: str = FROM_MESTIMATE
    init_value: Optional[tuple] = None
    proposal_scales: Optional[tuple] = None
    adapt: bool = True
    target_accept: float = 0.30
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not self.iterations > self.burn_in >= 0:
            raise ValueError(f"need iterations > burn_in >= 0, got {self.iterations}, {self.burn_in}")
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")
        if self.chains < 1:
            raise ValueError(f"need at least one chain, got {self.chains}")
        if self.init not in INIT_MODES:
            raise ValueError(f"unknown init mode '{self.init}'")
        if self.init == EXPLICIT and self.init_value is None:
            raise ValueError("init='explicit' needs init_value")
        if self.proposal_scales is not None and any(not s > 0 for s in self.proposal_scales):
            raise ValueError(f"proposal scales must be positive, got {self.proposal_scales}")
        if not 0 < self.target_accept < 1:
            raise ValueError(f"target_accept must lie in (0,1), got {self.target_accept}")

    @property
    def n_draws(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thin))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# Chain targets with cheap single-coordinate updates
# ---------------------------------------------------------

class _MulticlassTarget:
    def __init__(self, spec: GibbsPosteriorSpec):
        self.spec = spec
        self.scale = spec.learning_rate * spec.dataset.n

    def start(self, theta: np.ndarray) -> tuple:
        comps = np.array([self.spec.evaluator.component(j, t) for j, t in enumerate(theta)])
        return (theta.copy(), comps), self._logpost(theta, comps)

    def _logpost(self, theta, comps) -> float:
        log_prior = ordered_normal_logdensity(self.spec.prior, theta)
        if not np.isfinite(log_prior):
            return -np.inf
        return -self.scale * comps.sum() + log_prior

    def propose(self, state: tuple, j: int, value: float) -> tuple:
        theta, comps = state
        new_theta = theta.copy()
        new_theta[j] = value
        if (j > 0 and value <= theta[j - 1]) or (j + 1 < theta.size and value >= theta[j + 1]):
            return None, -np.inf
        new_comps = comps.copy()
        new_comps[j] = self.spec.evaluator.component(j, value)
        return (new_theta, new_comps), self._logpost(new_theta, new_comps)

    @staticmethod
    def param(state: tuple) -> np.ndarray:
        return state[0]


class _CovariateTarget:
    def __init__(self, spec: GibbsPosteriorSpec):
        self.spec = spec
        self.scale = spec.learning_rate * spec.dataset.n

    def start(self, beta: np.ndarray) -> tuple:
        curve = self.spec.evaluator.curve(beta)
        return (beta.copy(), curve), self._logpost(beta, curve)

    def _logpost(self, beta, curve) -> float:
        log_prior = beta_prior_logdensity(self.spec.prior, beta)
        if not np.isfinite(log_prior):
            return -np.inf
        return -self.scale * self.spec.evaluator.risk_from_curve(curve) + log_prior

    def propose(self, state: tuple, j: int, value: float) -> tuple:
        beta, curve = state
        new_beta = beta.copy()
        new_beta[j] = value
        new_curve = curve + (value - beta[j]) * self.spec.evaluator.design[:, j]
        return (new_beta, new_curve), self._logpost(new_beta, new_curve)

    @staticmethod
    def param(state: tuple) -> np.ndarray:
        return state[0]


def _default_scales(spec: GibbsPosteriorSpec) -> np.ndarray:
    return np.full(spec.dim, max(0.1 * float(np.std(spec.dataset.x)), 1e-3))


def _prior_draw(spec: GibbsPosteriorSpec, config: SamplerConfig) -> np.ndarray:
    rng = task_rng(config.seed, 0, 1)
    if spec.kind == MULTICLASS:
        return sample_ordered_normal(spec.prior, rng).as_array()
    return sample_beta_prior(spec.prior, spec.dim, rng)


def _initial_value(spec: GibbsPosteriorSpec, config: SamplerConfig) -> np.ndarray:
    # imported here: mestimator imports prior/objective, not the sampler
    from youden_gibbs.mestimator import minimize_covariate, minimize_multiclass

    if config.init == EXPLICIT:
        return np.asarray(config.init_value, dtype=float)
    if config.init == FROM_PRIOR:
        return _prior_draw(spec, config)
    if spec.kind == MULTICLASS:
        return minimize_multiclass(spec.dataset, spec.probs, spec.weights).theta_hat.as_array()
    return minimize_covariate(spec.dataset, spec.probs, spec.basis, seed=config.seed,
                              bound=spec.prior.bound).beta_hat


def _run_single_chain(args) -> tuple:
    spec, config, chain_index, init, scales0 = args
    target = _MulticlassTarget(spec) if spec.kind == MULTICLASS else _CovariateTarget(spec)
    rng = task_rng(config.seed, chain_index)
    state, lp = target.start(np.asarray(init, dtype=float))
    if not np.isfinite(lp):
        raise ValueError(f"chain {chain_index} starts outside the posterior support: {init}")

    dim = spec.dim
    log_scales = np.log(scales0).copy()
    burn_accepts = np.zeros(dim)
    post_accepts = np.zeros(dim)
    draws = np.empty((config.n_draws, dim))
    flags = []
    kept = 0

    for t in range(config.iterations):
        burning = t < config.burn_in
        for j in range(dim):
            current = target.param(state)[j]
            value = current + np.exp(log_scales[j]) * rng.standard_normal()
            new_state, lp_new = target.propose(state, j, value)
            accept = bool(np.log(rng.random()) < lp_new - lp)
            if accept:
                state, lp = new_state, lp_new
            if burning:
                burn_accepts[j] += accept
                if config.adapt:
                    log_scales[j] += (accept - config.target_accept) / (t + 1) ** ADAPT_EXPONENT
            else:
                post_accepts[j] += accept

        if config.burn_in > 0 and t == config.burn_in - 1:
            stuck = np.flatnonzero(burn_accepts == 0)
            if stuck.size:
                msg = (f"chain {chain_index}: no proposal accepted during burn-in for "
                       f"coordinates {stuck + 1}, proposal scale reset")
                warnings.warn(msg, RuntimeWarning)
                flags.append(msg)
                log_scales[stuck] = np.log(scales0[stuck])

        if not burning and (t - config.burn_in) % config.thin == 0:
            draws[kept] = target.param(state)
            kept += 1

    acceptance = post_accepts / (config.iterations - config.burn_in)
    logger.debug("chain %d done, acceptance %s", chain_index, np.round(acceptance, 3))
    return draws, acceptance, np.exp(log_scales), tuple(flags)


def run_chain(spec: GibbsPosteriorSpec, config: SamplerConfig) -> PosteriorChain:
    """Run config.chains independent chains (in parallel when config.threads > 1)"""
    init = _initial_value(spec, config)
    if init.size != spec.dim:
        raise ValueError(f"initial value has {init.size} components, expected {spec.dim}")
    if not np.isfinite(log_pseudo_posterior(spec, init)):
        logger.warning("initial value %s outside the prior support, starting from a prior draw",
                       init)
        init = _prior_draw(spec, config)
    scales = (_default_scales(spec) if config.proposal_scales is None
              else np.asarray(config.proposal_scales, dtype=float))
    if scales.size != spec.dim:
        raise ValueError(f"{scales.size} proposal scales for {spec.dim} parameters")

    results = parallel_map(_run_single_chain,
                           [(spec, config, c, init, scales) for c in range(config.chains)],
                           config.threads)
    flags = tuple(f for r in results for f in r[3])
    return PosteriorChain(draws=np.stack([r[0] for r in results]),
                          acceptance=np.vstack([r[1] for r in results]),
                          burn_in=config.burn_in, thin=config.thin,
                          learning_rate=spec.learning_rate, kind=spec.kind,
                          proposal_scales=np.vstack([r[2] for r in results]),
                          seed=config.seed, flags=flags)


# Diagnostics and summaries
# ---------------------------------------------------------

def effective_sample_size(draws: np.ndarray) -> float:
    """
    Bulk ESS of one parameter (rank-normalized, Geyer initial monotone
    sequence), draws shaped (chains, n) or (n,)
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[1] < 4 or np.ptp(draws) == 0:
        return float(draws.size)
    return float(az.ess(draws, method="bulk"))


def split_rhat(draws: np.ndarray) -> float:
    """Split-R-hat of one parameter, draws shaped (chains, n); nan below 4 draws"""
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[1] < 4:
        return float("nan")
    if np.ptp(draws) == 0:
        return 1.0
    return float(az.rhat(draws, method="split"))


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    mean: np.ndarray
    median: np.ndarray
    intervals: list
    ess: np.ndarray
    rhat: np.ndarray
    acceptance: np.ndarray
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "median": self.median.tolist(),
                "intervals": [[iv.lower, iv.upper] for iv in self.intervals],
                "level": self.intervals[0].level,
                "ess": self.ess.tolist(), "rhat": self.rhat.tolist(),
                "acceptance": self.acceptance.tolist(), "flags": list(self.flags)}


def summarize(chain: PosteriorChain, level: float = 0.95) -> PosteriorSummary:
    """Means, medians, equal-tailed intervals, ESS and split-R-hat per coordinate"""
    samples = chain.samples
    if samples.shape[0] == 0:
        raise ValueError("empty chain")
    intervals = [percentile_interval(samples[:, j], level, GIBBS_QUANTILE)
                 for j in range(chain.n_params)]
    ess = np.array([effective_sample_size(chain.draws[:, :, j]) for j in range(chain.n_params)])
    rhat = np.array([split_rhat(chain.draws[:, :, j]) for j in range(chain.n_params)])
    flags = list(chain.flags)
    low_ess = np.flatnonzero(ess < MIN_ESS)
    if low_ess.size:
        msg = f"effective sample size below {MIN_ESS} for coordinates {low_ess + 1}"
        warnings.warn(msg, RuntimeWarning)
        flags.append(msg)
    if chain.n_chains > 1 and np.any(rhat > MAX_RHAT):
        msg = f"split R-hat above {MAX_RHAT} for coordinates {np.flatnonzero(rhat > MAX_RHAT) + 1}"
        warnings.warn(msg, RuntimeWarning)
        flags.append(msg)
    return PosteriorSummary(mean=samples.mean(axis=0), median=np.median(samples, axis=0),
                            intervals=intervals, ess=ess, rhat=rhat,
                            acceptance=chain.acceptance.mean(axis=0), flags=tuple(flags))


@dataclass(frozen=True, eq=False)
class CurveSummary:
    z: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float = 0.95

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"z": self.z, "mean": self.mean, "lo": self.lower, "hi": self.upper})


def posterior_curve(chain: PosteriorChain, basis: BSplineBasis, z_grid,
                    level: float = 0.95) -> CurveSummary:
    """Pointwise posterior mean and equal-tailed band of theta(z) over the draws"""
    if chain.kind != COVARIATE:
        raise ValueError("posterior_curve needs a chain over spline coefficients")
    z_grid = np.asarray(z_grid, dtype=float)
    curves = chain.samples @ basis_matrix(basis, z_grid).T
    alpha = 1 - level
    lower, upper = np.quantile(curves, [alpha / 2, 1 - alpha / 2], axis=0)
    return CurveSummary(z=z_grid, mean=curves.mean(axis=0), lower=lower, upper=upper, level=level)


def chain_to_frame(chain: PosteriorChain, names=None) -> pd.DataFrame:
    """One row per retained draw: chain index, draw index, parameters"""
    n_chains, n_draws, dim = chain.draws.shape
    names = names or [f"param_{j + 1}" for j in range(dim)]
    frame = pd.DataFrame(chain.samples, columns=names)
    frame.insert(0, "draw", np.tile(np.arange(n_draws), n_chains))
    frame.insert(0, "chain", np.repeat(np.arange(n_chains), n_draws))
    return frame
