"""
M-estimation of the cutoff and bootstrap percentile intervals

minimize_multiclass is an exact global search (dynamic programming over
candidate cutoffs between order statistics); minimize_covariate is a
multi-start coordinate-wise search over the critical values where an
observation's indicator flips.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from youden_gibbs.core import (BOOTSTRAP_PERCENTILE, COVARIATE, KNOWN, MULTICLASS, ClassProbs,
                               ClassWeights, CutoffVector, Dataset, percentile_interval,
                               probs_for)
from youden_gibbs.objective import (BSplineBasis, CovariateRiskEvaluator,
                                    MulticlassRiskEvaluator)
from youden_gibbs.prior import OrderedNormalSpec, default_beta_bound
from youden_gibbs.various.parallel import parallel_map, task_rng

logger = logging.getLogger(__name__)

MIN_BOOTSTRAP = 100
SD_FLOOR = 1e-6
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MEstimate:
    """
    Risk minimizer: theta_hat for multiclass data, beta_hat for covariate data
    """
    risk_value: float
    candidates_examined: int
    theta_hat: Optional[CutoffVector] = None
    beta_hat: Optional[np.ndarray] = None
    converged: bool = True
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        out = {"risk_value": self.risk_value,
               "candidates_examined": self.candidates_examined,
               "converged": self.converged,
               "flags": list(self.flags)}
        if self.theta_hat is not None:
            out["theta_hat"] = list(self.theta_hat.theta)
        if self.beta_hat is not None:
            out["beta_hat"] = self.beta_hat.tolist()
        return out


# Multi-class: exact search
# ---------------------------------------------------------

def candidate_cutoffs(x) -> tuple:
    """
    Candidate cutoffs: midpoints of adjacent distinct order statistics plus one
    sentinel below min(x) and one above max(x).

    Returns (candidates, gap_lower, gap_upper); candidate i lies at the centre
    of the data-free gap (gap_lower[i], gap_upper[i]).
    """
    u = np.unique(np.asarray(x, dtype=float))
    if u.size == 0:
        raise ValueError("no data")
    pad = 1.0 if u.size == 1 else (u[-1] - u[0]) / (u.size - 1)
    lower = np.concatenate(([u[0] - 2 * pad], u))
    upper = np.concatenate((u, [u[-1] + 2 * pad]))
    return (lower + upper) / 2, lower, upper


def _spread_in_gaps(index: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    # cutoffs sharing a gap are spaced evenly inside it, keeping the order strict
    theta = np.empty(index.size)
    for i in np.unique(index):
        pos = np.flatnonzero(index == i)
        steps = np.arange(1, pos.size + 1) / (pos.size + 1)
        theta[pos] = lower[i] + (upper[i] - lower[i]) * steps
    return theta


def minimize_multiclass(dataset: Dataset, probs: ClassProbs,
                        weights: Optional[ClassWeights] = None) -> MEstimate:
    """
    Global minimizer of the multi-class risk over ordered cutoffs.

    Each cutoff takes a candidate index, indices non-decreasing in j; the
    suffix-minimum recursion
        g_j(i) = cost_j(i) + min_{i' >= i} g_{j+1}(i')
    runs in O(k m). Ties go to the lexicographically smallest cutoff vector.
    """
    if dataset.kind != MULTICLASS:
        raise ValueError("minimize_multiclass needs a multiclass dataset")
    dataset.require_valid()
    evaluator = MulticlassRiskEvaluator(dataset, probs, weights)
    cands, lower, upper = candidate_cutoffs(dataset.x)
    m, dim = cands.size, evaluator.dim

    cost = np.vstack([evaluator.component(j, cands) for j in range(dim)])
    g = np.empty_like(cost)
    g[-1] = cost[-1]
    for j in range(dim - 2, -1, -1):
        suffix_min = np.minimum.accumulate(g[j + 1][::-1])[::-1]
        g[j] = cost[j] + suffix_min

    index = np.empty(dim, dtype=int)
    start, target = 0, g[0].min()
    for j in range(dim):
        ok = np.flatnonzero(g[j][start:] <= target + TIE_TOL)
        index[j] = start + ok[0]
        if j + 1 < dim:
            target = g[j][index[j]] - cost[j][index[j]]
            start = index[j]

    theta = CutoffVector(theta=_spread_in_gaps(index, lower, upper))
    risk = evaluator.risk(theta.as_array())
    logger.debug("multiclass M-estimate %s, risk %.6g over %d candidates", theta.theta, risk, m)
    return MEstimate(risk_value=risk, candidates_examined=dim * m, theta_hat=theta)


# Covariate: coordinate-wise critical value search
# ---------------------------------------------------------

def _as_two_class(dataset: Dataset) -> Dataset:
    return Dataset(x=dataset.x, y=np.where(dataset.y == 1, 2, 1), k=2, kind=MULTICLASS)


def constant_start(dataset: Dataset, probs: ClassProbs, basis: BSplineBasis) -> np.ndarray:
    """Flat curve at the two-class M-estimate ignoring z"""
    two_class = _as_two_class(dataset)
    c = minimize_multiclass(two_class, probs).theta_hat.theta[0]
    return np.full(basis.d, c)


def _coordinate_search(evaluator: CovariateRiskEvaluator, beta: np.ndarray, bound: float,
                       max_rounds: int) -> tuple:
    beta = np.clip(np.array(beta, dtype=float), -bound, bound)
    theta_z = evaluator.curve(beta)
    best = evaluator.risk_from_curve(theta_z)
    weight, x = evaluator.signed_weight, evaluator.x
    examined = 0

    for rounds in range(1, max_rounds + 1):
        improved = False
        for j in range(beta.size):
            col = evaluator.design[:, j]
            rest = theta_z - beta[j] * col
            active = col > 0
            # for active rows the indicator is on iff beta_j >= crit
            crit = (x[active] - rest[active]) / col[active]
            if crit.size == 0:
                continue
            const = weight[~active & (x <= rest)].sum()
            order = np.argsort(crit, kind="stable")
            crit_sorted = crit[order]
            cum = np.concatenate(([0.0], np.cumsum(weight[active][order])))
            cand = np.concatenate(([crit_sorted[0] - 1.0],
                                   (crit_sorted[:-1] + crit_sorted[1:]) / 2,
                                   [crit_sorted[-1] + 1.0]))
            cand = np.clip(cand, -bound, bound)
            risk = const + cum[np.searchsorted(crit_sorted, cand, side="right")]
            examined += cand.size
            i = int(np.argmin(risk))
            if risk[i] < best - TIE_TOL:
                beta[j] = cand[i]
                theta_z = rest + beta[j] * col
                best = evaluator.risk_from_curve(theta_z)
                improved = True
        if not improved:
            return beta, best, True, examined
    return beta, best, False, examined


def _covariate_start(args) -> tuple:
    evaluator, beta0, bound, max_rounds = args
    return _coordinate_search(evaluator, beta0, bound, max_rounds)


def minimize_covariate(dataset: Dataset, probs: ClassProbs, basis: BSplineBasis,
                       init=None, starts: int = 10, max_rounds: int = 50, seed: int = 0,
                       bound: Optional[float] = None, threads: int = 1) -> MEstimate:
    """
    Local search for the covariate-adjusted risk minimizer beta_hat.

    Start 0 is `init` (default: flat curve at the two-class M-estimate), the
    other starts perturb it with N(0, sd(x)) noise; the best result is kept.
    """
    if dataset.kind != COVARIATE:
        raise ValueError("minimize_covariate needs a covariate dataset")
    dataset.require_valid()
    if starts < 1:
        raise ValueError(f"need at least one start, got {starts}")
    evaluator = CovariateRiskEvaluator(dataset, probs, basis)
    bound = default_beta_bound(dataset) if bound is None else float(bound)
    init = constant_start(dataset, probs, basis) if init is None else np.asarray(init, float)
    if init.size != basis.d:
        raise ValueError(f"init has {init.size} coefficients, basis has d={basis.d}")

    rng = task_rng(seed, 0)
    scale = float(np.std(dataset.x)) or 1.0
    inits = [init] + [init + rng.normal(0.0, scale, basis.d) for _ in range(starts - 1)]
    results = parallel_map(_covariate_start,
                           [(evaluator, b, bound, max_rounds) for b in inits], threads)

    best = min(range(len(results)), key=lambda s: (results[s][1], s))
    beta, risk, converged, _ = results[best]
    examined = sum(r[3] for r in results)
    flags = ()
    if not converged:
        msg = f"covariate search did not converge within {max_rounds} rounds"
        warnings.warn(msg, RuntimeWarning)
        flags = (msg,)
    logger.debug("covariate M-estimate from start %d, risk %.6g", best, risk)
    return MEstimate(risk_value=risk, candidates_examined=examined, beta_hat=beta,
                     converged=converged, flags=flags)


# Bootstrap
# ---------------------------------------------------------

def resample_dataset(dataset: Dataset, rng: np.random.Generator, stratified: bool) -> tuple:
    """
    One bootstrap resample. Stratified resampling keeps class counts fixed
    (case-control data); unstratified draws are redrawn while a class is missing.
    Returns (dataset, number of redraws).
    """
    redraws = 0
    if stratified:
        idx = np.concatenate([rng.choice(np.flatnonzero(dataset.codes == c), size=int(n_c))
                              for c, n_c in enumerate(dataset.counts)])
        return dataset.subset(idx), redraws
    while True:
        idx = rng.integers(0, dataset.n, size=dataset.n)
        if np.unique(dataset.codes[idx]).size == dataset.k:
            return dataset.subset(idx), redraws
        redraws += 1


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    replicates: np.ndarray
    intervals: list
    theta_hat: CutoffVector
    redraws: int
    stratified: bool
    seed: int
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        return {"theta_hat": list(self.theta_hat.theta),
                "intervals": [[iv.lower, iv.upper] for iv in self.intervals],
                "level": self.intervals[0].level,
                "B": int(self.replicates.shape[0]),
                "redraws": self.redraws,
                "resampling": "stratified" if self.stratified else "unstratified",
                "seed": self.seed,
                "flags": list(self.flags)}


def _bootstrap_replicate(args) -> tuple:
    dataset, probs, weights, seed, b, stratified = args
    sample, redraws = resample_dataset(dataset, task_rng(seed, b), stratified)
    est = minimize_multiclass(sample, probs_for(sample, probs), weights)
    return est.theta_hat.as_array(), redraws


def bootstrap_intervals(dataset: Dataset, B: int = 1000, level: float = 0.95, seed: int = 0,
                        probs: Optional[ClassProbs] = None,
                        weights: Optional[ClassWeights] = None,
                        threads: int = 1) -> BootstrapResult:
    """
    Percentile bootstrap intervals for the multi-class cutoff.
    Resampling is stratified by class when probs are known, unstratified when
    they are estimated (probs=None means estimated).
    """
    if B < MIN_BOOTSTRAP:
        raise ValueError(f"need B >= {MIN_BOOTSTRAP} bootstrap replicates, got {B}")
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0,1), got {level}")
    if dataset.kind != MULTICLASS:
        raise ValueError("bootstrap_intervals needs a multiclass dataset")
    dataset.require_valid()
    stratified = probs is not None and probs.source == KNOWN
    theta_hat = minimize_multiclass(dataset, probs_for(dataset, probs), weights).theta_hat

    results = parallel_map(_bootstrap_replicate,
                           [(dataset, probs, weights, seed, b, stratified) for b in range(B)],
                           threads)
    replicates = np.vstack([r[0] for r in results])
    redraws = int(sum(r[1] for r in results))
    intervals = [percentile_interval(replicates[:, j], level, BOOTSTRAP_PERCENTILE)
                 for j in range(replicates.shape[1])]
    flags = ()
    if redraws:
        msg = f"{redraws} bootstrap resamples missed a class and were redrawn"
        warnings.warn(msg, RuntimeWarning)
        flags = (msg,)
    logger.info("bootstrap: %d replicates, %s resampling", B,
                "stratified" if stratified else "unstratified")
    return BootstrapResult(replicates=replicates, intervals=intervals, theta_hat=theta_hat,
                           redraws=redraws, stratified=stratified, seed=seed, flags=flags)


# Informative prior from a data split
# ---------------------------------------------------------

def split_dataset(dataset: Dataset, fraction: float = 0.5, seed: int = 0) -> tuple:
    """
    Random split, stratified by class, into (prior part, analysis part);
    `fraction` of every class goes to the prior part.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0,1), got {fraction}")
    rng = task_rng(seed, 0)
    prior_idx = []
    for c in range(dataset.k):
        rows = rng.permutation(np.flatnonzero(dataset.codes == c))
        prior_idx.append(rows[:int(round(fraction * rows.size))])
    prior_idx = np.sort(np.concatenate(prior_idx))
    rest = np.setdiff1d(np.arange(dataset.n), prior_idx)
    return dataset.subset(prior_idx), dataset.subset(rest)


def prior_from_split(prior_data: Dataset, B: int = 1000, seed: int = 0,
                     probs: Optional[ClassProbs] = None, level: float = 0.95,
                     threads: int = 1) -> OrderedNormalSpec:
    """
    Informative ordered-normal prior: mean at the M-estimate on the prior data,
    sd one fourth of the bootstrap percentile interval width.
    """
    boot = bootstrap_intervals(prior_data, B=B, level=level, seed=seed, probs=probs,
                               threads=threads)
    widths = np.array([iv.width for iv in boot.intervals])
    sigma = widths / 4.0
    flags = list(boot.flags)
    floored = sigma < SD_FLOOR
    if np.any(floored):
        msg = f"degenerate bootstrap width for cutoffs {np.flatnonzero(floored) + 1}, sd floored"
        warnings.warn(msg, RuntimeWarning)
        flags.append(msg)
        sigma = np.maximum(sigma, SD_FLOOR)
    return OrderedNormalSpec(mu=boot.theta_hat.as_array(), sigma=sigma, flags=tuple(flags))
