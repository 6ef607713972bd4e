"""
Learning-rate calibration (GPC)

The learning rate omega is tuned by a Robbins-Monro iteration on log omega so
that level-credible intervals computed on bootstrap resamples contain the
full-data M-estimate with frequency close to the nominal level.
"""
from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from youden_gibbs.core import (KNOWN, MULTICLASS, ClassProbs, ClassWeights, Dataset,
                               percentile_interval, probs_for)
from youden_gibbs.mestimator import minimize_multiclass, resample_dataset
from youden_gibbs.prior import OrderedNormalSpec
from youden_gibbs.sampler import GibbsPosteriorSpec, SamplerConfig, run_chain
from youden_gibbs.various.parallel import parallel_map, task_rng

logger = logging.getLogger(__name__)

JOINT = "joint"
MARGINAL = "marginal"
OMEGA_MIN = 1e-6
OMEGA_MAX = 1e6
STEP_EXPONENT = 0.51


@dataclass(frozen=True)
class GpcConfig:
    """
    level: nominal credible level and coverage target
    B: bootstrap datasets, drawn once and reused by every iteration
    tol: stop when |coverage - level| <= tol
    kappa0: step size, kappa_t = kappa0 * t^-0.51
    coverage_mode: joint (all cutoffs at once) or marginal (mean over cutoffs)
    inner_iterations, inner_burn_in: chain length of the fits inside the loop
    """
    level: float = 0.95
    B: int = 200
    max_iter: int = 20
    tol: float = 0.02
    kappa0: float = 1.0
    omega_init: float = 1.0
    seed: int = 0
    coverage_mode: str = JOINT
    inner_iterations: int = 4000
    inner_burn_in: int = 1000
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.level < 1:
            raise ValueError(f"level must lie in (0,1), got {self.level}")
        if self.B < 50:
            raise ValueError(f"need B >= 50 bootstrap datasets, got {self.B}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not self.kappa0 > 0:
            raise ValueError(f"kappa0 must be positive, got {self.kappa0}")
        if not self.omega_init > 0:
            raise ValueError(f"omega_init must be positive, got {self.omega_init}")
        if self.coverage_mode not in (JOINT, MARGINAL):
            raise ValueError(f"unknown coverage mode '{self.coverage_mode}'")

    def inner_sampler(self) -> SamplerConfig:
        return SamplerConfig(iterations=self.inner_iterations, burn_in=self.inner_burn_in,
                             chains=1, seed=self.seed)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class GpcTrace:
    omegas: tuple
    coverages: tuple
    final_omega: float
    converged: bool
    clamped: bool = False
    flags: tuple = field(default=())

    @property
    def iterations(self) -> int:
        return len(self.omegas)

    def to_dict(self) -> dict:
        return {"omegas": list(self.omegas), "coverages": list(self.coverages),
                "final_omega": self.final_omega, "converged": self.converged,
                "clamped": self.clamped, "flags": list(self.flags)}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"iteration": np.arange(1, self.iterations + 1),
                             "omega": self.omegas, "coverage": self.coverages})


def bootstrap_datasets(dataset: Dataset, probs: Optional[ClassProbs], config: GpcConfig) -> list:
    """The B resamples used for coverage estimation (stratified when probs are known)"""
    stratified = probs is not None and probs.source == KNOWN
    return [resample_dataset(dataset, task_rng(config.seed, b), stratified)[0]
            for b in range(config.B)]


def _replicate_coverage(args) -> np.ndarray:
    omega, data_b, probs, weights, prior, sampler, theta_hat, level = args
    spec = GibbsPosteriorSpec(dataset=data_b, probs=probs_for(data_b, probs), prior=prior,
                              learning_rate=omega, weights=weights)
    with warnings.catch_warnings():
        # zero-acceptance resets inside short inner chains are not reported per replicate
        warnings.simplefilter("ignore", RuntimeWarning)
        chain = run_chain(spec, sampler)
    samples = chain.samples
    return np.array([percentile_interval(samples[:, j], level).contains(theta_hat[j])
                     for j in range(samples.shape[1])])


def estimate_coverage(omega: float, dataset: Dataset, probs: Optional[ClassProbs],
                      prior: OrderedNormalSpec, config: GpcConfig,
                      sampler: Optional[SamplerConfig] = None, theta_hat=None,
                      datasets: Optional[list] = None,
                      weights: Optional[ClassWeights] = None) -> float:
    """
    Fraction of bootstrap resamples whose level-credible intervals contain the
    full-data M-estimate theta_hat. probs=None (or estimated) re-estimates the
    class probabilities on every resample.
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if dataset.kind != MULTICLASS:
        raise ValueError("coverage calibration needs a multiclass dataset")
    if theta_hat is None:
        theta_hat = minimize_multiclass(dataset, probs_for(dataset, probs),
                                        weights).theta_hat.as_array()
    theta_hat = np.asarray(getattr(theta_hat, "theta", theta_hat), dtype=float)
    if datasets is None:
        datasets = bootstrap_datasets(dataset, probs, config)
    sampler = config.inner_sampler() if sampler is None else sampler

    tasks = [(omega, data_b, probs, weights, prior,
              dataclasses.replace(sampler, seed=int(task_rng(config.seed, b, 1).integers(2 ** 31)),
                                  threads=1),
              theta_hat, config.level)
             for b, data_b in enumerate(datasets)]
    hits = np.vstack(parallel_map(_replicate_coverage, tasks, config.threads))
    if config.coverage_mode == JOINT:
        coverage = float(np.mean(np.all(hits, axis=1)))
    else:
        coverage = float(np.mean(hits))
    logger.debug("omega %.6g: coverage %.4f over %d resamples", omega, coverage, len(datasets))
    return coverage


def calibrate(dataset: Dataset, probs: Optional[ClassProbs], prior: OrderedNormalSpec,
              gpc: Optional[GpcConfig] = None,
              sampler: Optional[SamplerConfig] = None,
              weights: Optional[ClassWeights] = None) -> GpcTrace:
    """
    log omega_{t+1} = log omega_t + kappa_t (coverage_t - level) until
    |coverage_t - level| <= tol or max_iter iterations. omega leaving
    (1e-6, 1e6) is clamped and ends the iteration unconverged.
    """
    gpc = GpcConfig() if gpc is None else gpc
    dataset.require_valid()
    theta_hat = minimize_multiclass(dataset, probs_for(dataset, probs), weights).theta_hat.as_array()
    datasets = bootstrap_datasets(dataset, probs, gpc)

    omegas, coverages, flags = [], [], []
    log_omega = np.log(gpc.omega_init)
    converged = clamped = False
    for t in range(1, gpc.max_iter + 1):
        omega = float(np.exp(log_omega))
        coverage = estimate_coverage(omega, dataset, probs, prior, gpc, sampler=sampler,
                                     theta_hat=theta_hat, datasets=datasets, weights=weights)
        omegas.append(omega)
        coverages.append(coverage)
        logger.info("GPC iteration %d: omega %.6g, coverage %.4f", t, omega, coverage)
        if abs(coverage - gpc.level) <= gpc.tol:
            converged = True
            break
        log_omega += gpc.kappa0 * t ** -STEP_EXPONENT * (coverage - gpc.level)
        if not np.log(OMEGA_MIN) < log_omega < np.log(OMEGA_MAX):
            clamped = True
            msg = f"learning rate left ({OMEGA_MIN:g}, {OMEGA_MAX:g}) at iteration {t}, clamped"
            warnings.warn(msg, RuntimeWarning)
            flags.append(msg)
            omega = float(np.clip(np.exp(log_omega), OMEGA_MIN, OMEGA_MAX))
            omegas.append(omega)
            coverages.append(estimate_coverage(omega, dataset, probs, prior, gpc,
                                               sampler=sampler, theta_hat=theta_hat,
                                               datasets=datasets, weights=weights))
            break

    if converged:
        final = omegas[-1]
    else:
        gaps = np.abs(np.array(coverages) - gpc.level)
        # latest among the closest
        final = omegas[len(gaps) - 1 - int(np.argmin(gaps[::-1]))]
        if not clamped:
            msg = f"GPC not converged after {len(omegas)} iterations"
            warnings.warn(msg, RuntimeWarning)
            flags.append(msg)
    logger.info("GPC final omega %.6g (%s)", final, "converged" if converged else "not converged")
    return GpcTrace(omegas=tuple(omegas), coverages=tuple(coverages), final_omega=final,
                    converged=converged, clamped=clamped, flags=tuple(flags))
