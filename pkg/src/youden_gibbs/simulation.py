"""
Simulation scenarios, true cutoffs and the Monte-Carlo coverage study

Scenarios are declared in scenario_definition; this module generates data from
them, solves for the population cutoff and runs the interval methods over many
replicates.
"""
from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.interpolate import interp1d
from scipy.optimize import brentq

from youden_gibbs.class_distribution import ClassDistribution, CovariateClassModel
from youden_gibbs.core import (COVARIATE, GIBBS_QUANTILE, MULTICLASS, ClassProbs, CutoffVector,
                               Dataset, known_class_probs, percentile_interval, probs_for)
from youden_gibbs.calibration import GpcConfig, calibrate
from youden_gibbs.mestimator import bootstrap_intervals, minimize_multiclass
from youden_gibbs.objective import BSplineBasis, age_study_knots
from youden_gibbs.prior import BetaPriorSpec, OrderedNormalSpec
from youden_gibbs.sampler import GibbsPosteriorSpec, SamplerConfig, posterior_curve, run_chain
from youden_gibbs.various.parallel import parallel_map, task_rng

logger = logging.getLogger(__name__)

CASE_CONTROL = "case_control"
COHORT = "cohort"

BOOTSTRAP = "bootstrap"
GIBBS_INFORMATIVE = "gibbs-gpc-informative"
GIBBS_VAGUE = "gibbs-gpc-vague"
METHODS = (BOOTSTRAP, GIBBS_INFORMATIVE, GIBBS_VAGUE)

MIN_REPS = 50
GRID_SIZE = 10_000
TAIL_PROB = 1e-3
CURVE_GRID = 201
L1_RANGE = (0.05, 0.95)


@dataclass(frozen=True)
class ScenarioSpec:
    """
    Data-generating scenario.

    classes: ClassDistribution per class in increasing order (multiclass) or
        CovariateClassModel for (healthy, diseased) (covariate)
    class_probs: class proportions of the cohort design (default equal)
    informative_sd: prior sd of the informative Gibbs fit in run_study
    """
    id: str
    n_per_group: int
    classes: tuple
    design: str = CASE_CONTROL
    class_probs: Optional[tuple] = None
    informative_sd: Optional[float] = None

    def __post_init__(self):
        if self.n_per_group < 1:
            raise ValueError(f"{self.id}: n_per_group must be positive, got {self.n_per_group}")
        if self.design not in (CASE_CONTROL, COHORT):
            raise ValueError(f"{self.id}: unknown design '{self.design}'")
        if all(isinstance(c, CovariateClassModel) for c in self.classes):
            if len(self.classes) != 2:
                raise ValueError(f"{self.id}: covariate scenarios have two classes")
            kind = COVARIATE
        elif all(isinstance(c, ClassDistribution) for c in self.classes):
            if len(self.classes) < 2:
                raise ValueError(f"{self.id}: need at least two classes")
            kind = MULTICLASS
        else:
            raise ValueError(f"{self.id}: mixed class model types")
        if self.class_probs is not None:
            ClassProbs(values=self.class_probs)
            if len(self.class_probs) != len(self.classes):
                raise ValueError(f"{self.id}: {len(self.class_probs)} class proportions "
                                 f"for {len(self.classes)} classes")
        object.__setattr__(self, "kind", kind)

    @property
    def k(self) -> int:
        return len(self.classes)

    def with_n(self, n_per_group: int) -> "ScenarioSpec":
        return dataclasses.replace(self, n_per_group=n_per_group)

    def to_dict(self) -> dict:
        return {"id": self.id, "n_per_group": self.n_per_group, "design": self.design,
                "classes": [c.name for c in self.classes],
                "class_probs": None if self.class_probs is None else list(self.class_probs)}


def design_probs(spec: ScenarioSpec) -> Optional[ClassProbs]:
    """Known equal proportions for case-control data, None (estimate) for cohorts"""
    if spec.design == CASE_CONTROL:
        return known_class_probs([1.0 / spec.k] * spec.k)
    return None


def _class_sizes(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.design == CASE_CONTROL:
        return np.full(spec.k, spec.n_per_group)
    p = np.full(spec.k, 1.0 / spec.k) if spec.class_probs is None else np.array(spec.class_probs)
    while True:
        sizes = rng.multinomial(spec.k * spec.n_per_group, p)
        if np.all(sizes > 0):
            return sizes


def generate(spec: ScenarioSpec, seed) -> Dataset:
    """
    Simulate one dataset. Case-control draws exactly n_per_group per class;
    cohort draws k * n_per_group labels from class_probs (redrawn while a class is empty).
    Covariate scenarios draw z ~ Uniform(0,1) first.
    """
    rng = np.random.default_rng(seed)
    sizes = _class_sizes(spec, rng)
    if spec.kind == MULTICLASS:
        x = np.concatenate([c.rvs(int(n), rng) for c, n in zip(spec.classes, sizes)])
        y = np.repeat(np.arange(1, spec.k + 1), sizes)
        return Dataset(x=x, y=y, k=spec.k, kind=MULTICLASS)
    z = [rng.uniform(0.0, 1.0, int(n)) for n in sizes]
    x = np.concatenate([c.rvs(zc, rng) for c, zc in zip(spec.classes, z)])
    y = np.repeat([-1, 1], sizes)
    return Dataset(x=x, y=y, z=np.concatenate(z), kind=COVARIATE)


# Population cutoff
# ---------------------------------------------------------

def population_risk(spec: ScenarioSpec, theta, z=None):
    """
    Sum over j of F_{j+1}(theta_j) - F_j(theta_j); for covariate scenarios
    F_{+1}(theta | z) - F_{-1}(theta | z). Broadcasts over leading axes of theta.
    """
    theta = np.asarray(theta, dtype=float)
    if spec.kind == COVARIATE:
        if z is None:
            raise ValueError("covariate population risk needs z")
        healthy, diseased = spec.classes
        return diseased.cdf(theta, z) - healthy.cdf(theta, z)
    if theta.shape[-1] != spec.k - 1:
        raise ValueError(f"theta has {theta.shape[-1]} components, expected {spec.k - 1}")
    return sum(spec.classes[j + 1].cdf(theta[..., j]) - spec.classes[j].cdf(theta[..., j])
               for j in range(spec.k - 1))


def population_youden_index(spec: ScenarioSpec) -> float:
    """Youden index sum at the true cutoff (multiclass scenarios)"""
    return -float(population_risk(spec, true_cutoff(spec).as_array()))


def _minimize_pair(cdf_lo, cdf_hi, pdf_lo, pdf_hi, lo: float, hi: float, label: str) -> float:
    """
    Global grid minimum of F_hi - F_lo, refined by the density crossing
    f_hi = f_lo inside the neighbouring grid cells
    """
    grid = np.linspace(lo, hi, GRID_SIZE)
    g = cdf_hi(grid) - cdf_lo(grid)
    i = int(np.argmin(g))

    def crossing(x):
        return float(pdf_hi(x) - pdf_lo(x))

    a, b = grid[max(i - 1, 0)], grid[min(i + 1, GRID_SIZE - 1)]
    fa, fb = crossing(a), crossing(b)
    if fa == 0:
        return float(a)
    if fb == 0:
        return float(b)
    if fa * fb > 0:
        window = slice(max(i - 3, 0), i + 4)
        dump = ", ".join(f"{u:.6g}:{v:.6g}" for u, v in zip(grid[window], g[window]))
        raise RuntimeError(f"{label}: no density crossing in [{a:.6g}, {b:.6g}]; "
                           f"grid (x:risk) around the minimum: {dump}")
    root = brentq(crossing, a, b, xtol=1e-14, rtol=1e-14)
    if cdf_hi(root) - cdf_lo(root) > g[i] + 1e-9:
        raise RuntimeError(f"{label}: refined crossing {root:.6g} above the grid minimum")
    return float(root)


@dataclass(frozen=True, eq=False)
class TrueCurve:
    """Population cutoff curve on a z-grid, linearly interpolated in between"""
    z: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_interp", interp1d(self.z, self.theta, kind="linear"))

    def __call__(self, z):
        return self._interp(z)


def true_cutoff(spec: ScenarioSpec, z_grid=None):
    """
    Population cutoff: CutoffVector for multiclass scenarios, TrueCurve for
    covariate scenarios (solved pointwise on z_grid, default 201 points)
    """
    if spec.kind == MULTICLASS:
        lows, highs = zip(*(c.ppf_bounds(TAIL_PROB) for c in spec.classes))
        lo, hi = min(lows), max(highs)
        theta = [_minimize_pair(spec.classes[j].cdf, spec.classes[j + 1].cdf,
                                spec.classes[j].pdf, spec.classes[j + 1].pdf,
                                lo, hi, f"{spec.id} cutoff {j + 1}")
                 for j in range(spec.k - 1)]
        if np.any(np.diff(theta) <= 0):
            raise RuntimeError(f"{spec.id}: population cutoffs not ordered: {theta}")
        return CutoffVector(theta=theta)

    z_grid = np.linspace(0.0, 1.0, CURVE_GRID) if z_grid is None else np.asarray(z_grid, float)
    healthy, diseased = spec.classes
    theta = np.empty(z_grid.size)
    for i, z in enumerate(z_grid):
        lo = min(healthy.at(z).ppf(TAIL_PROB), diseased.at(z).ppf(TAIL_PROB))
        hi = max(healthy.at(z).ppf(1 - TAIL_PROB), diseased.at(z).ppf(1 - TAIL_PROB))
        theta[i] = _minimize_pair(lambda t: healthy.cdf(t, z), lambda t: diseased.cdf(t, z),
                                  lambda t: healthy.pdf(t, z), lambda t: diseased.pdf(t, z),
                                  float(lo), float(hi), f"{spec.id} at z={z:.4g}")
    return TrueCurve(z=z_grid, theta=theta)


# Coverage study
# ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StudyResult:
    """
    lengths / hits: per method an array (reps, k-1), NaN rows for failed replicates
    """
    scenario: str
    n_per_group: int
    reps: int
    level: float
    seed: int
    truth: tuple
    lengths: dict
    hits: dict
    flags: tuple = field(default=())

    def missing(self, method: str) -> int:
        return int(np.isnan(self.lengths[method][:, 0]).sum())

    def to_frame(self) -> pd.DataFrame:
        """One row per (method, cutoff): mean length, coverage and its binomial se"""
        rows = []
        for method, lengths in self.lengths.items():
            ok = ~np.isnan(lengths[:, 0])
            n_ok = int(ok.sum())
            for j in range(lengths.shape[1]):
                cov = float(self.hits[method][ok, j].mean()) if n_ok else np.nan
                rows.append({"method": method, "cutoff": j + 1,
                             "mean_length": float(lengths[ok, j].mean()) if n_ok else np.nan,
                             "coverage": cov,
                             "coverage_se": float(np.sqrt(cov * (1 - cov) / n_ok)) if n_ok else np.nan,
                             "replicates": n_ok, "missing": self.reps - n_ok})
        return pd.DataFrame(rows)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "n_per_group": self.n_per_group, "reps": self.reps,
                "level": self.level, "seed": self.seed, "truth": list(self.truth),
                "table": self.to_frame().to_dict(orient="records"), "flags": list(self.flags)}


def _replicate_seed(seed: int, r: int, stream: int) -> int:
    return int(task_rng(seed, r, stream).integers(2 ** 31))


def _gibbs_intervals(data: Dataset, probs, prior: OrderedNormalSpec, gpc: GpcConfig,
                     sampler: SamplerConfig, level: float) -> list:
    trace = calibrate(data, probs, prior, gpc)
    spec = GibbsPosteriorSpec(dataset=data, probs=probs_for(data, probs), prior=prior,
                              learning_rate=trace.final_omega)
    samples = run_chain(spec, sampler).samples
    return [percentile_interval(samples[:, j], level, GIBBS_QUANTILE)
            for j in range(samples.shape[1])]


def _study_replicate(args) -> dict:
    spec, methods, level, seed, r, B, gpc, sampler, vague_sd, truth = args
    data = generate(spec, [seed, r])
    probs = design_probs(spec)
    gpc_r = dataclasses.replace(gpc, seed=_replicate_seed(seed, r, 2), threads=1, level=level)
    sampler_r = dataclasses.replace(sampler, seed=_replicate_seed(seed, r, 3), threads=1)
    out = {}
    for method in methods:
        try:
            if method == BOOTSTRAP:
                intervals = bootstrap_intervals(data, B=B, level=level,
                                                seed=_replicate_seed(seed, r, 1),
                                                probs=probs).intervals
            elif method == GIBBS_INFORMATIVE:
                prior = OrderedNormalSpec(mu=truth, sigma=np.full(truth.size, spec.informative_sd))
                intervals = _gibbs_intervals(data, probs, prior, gpc_r, sampler_r, level)
            else:
                centre = minimize_multiclass(data, probs_for(data, probs)).theta_hat.as_array()
                prior = OrderedNormalSpec.vague(centre, sd=vague_sd)
                intervals = _gibbs_intervals(data, probs, prior, gpc_r, sampler_r, level)
        except (ValueError, RuntimeError) as exc:
            logger.warning("replicate %d, %s failed: %s", r, method, exc)
            out[method] = None
            continue
        out[method] = (np.array([iv.width for iv in intervals]),
                       np.array([iv.contains(t) for iv, t in zip(intervals, truth)]))
    return out


def run_study(spec: ScenarioSpec, methods=METHODS, reps: int = 200, level: float = 0.95,
              seed: int = 0, B: int = 1000, gpc: Optional[GpcConfig] = None,
              sampler: Optional[SamplerConfig] = None, vague_sd: float = 20.0,
              threads: int = 1) -> StudyResult:
    """
    Average interval length and coverage of the true cutoff per method over
    `reps` simulated datasets. Replicate r uses the seed stream (seed, r).
    The vague Gibbs prior is centred at the replicate's M-estimate.
    """
    if reps < MIN_REPS:
        raise ValueError(f"need reps >= {MIN_REPS}, got {reps}")
    if spec.kind != MULTICLASS:
        raise ValueError("run_study needs a multiclass scenario, see run_covariate_study")
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    if GIBBS_INFORMATIVE in methods and spec.informative_sd is None:
        raise ValueError(f"{spec.id}: no informative prior sd declared")
    gpc = GpcConfig(level=level) if gpc is None else gpc
    sampler = SamplerConfig(iterations=10000, burn_in=2000, chains=1) if sampler is None else sampler
    truth = true_cutoff(spec).as_array()

    results = parallel_map(_study_replicate,
                           [(spec, tuple(methods), level, seed, r, B, gpc, sampler, vague_sd, truth)
                            for r in range(reps)],
                           threads)
    lengths, hits, flags = {}, {}, []
    for method in methods:
        lengths[method] = np.full((reps, spec.k - 1), np.nan)
        hits[method] = np.zeros((reps, spec.k - 1), dtype=bool)
        for r, res in enumerate(results):
            if res[method] is not None:
                lengths[method][r], hits[method][r] = res[method]
        n_missing = int(np.isnan(lengths[method][:, 0]).sum())
        if n_missing:
            msg = f"{method}: {n_missing} of {reps} replicates failed"
            warnings.warn(msg, RuntimeWarning)
            flags.append(msg)
    logger.info("study %s n=%d: %d replicates, methods %s", spec.id, spec.n_per_group, reps,
                list(methods))
    return StudyResult(scenario=spec.id, n_per_group=spec.n_per_group, reps=reps, level=level,
                       seed=seed, truth=tuple(truth), lengths=lengths, hits=hits,
                       flags=tuple(flags))


@dataclass(frozen=True, eq=False)
class CovariateStudyResult:
    """Across-replicate averages of posterior mean and band curves"""
    scenario: str
    reps: int
    seed: int
    z: np.ndarray
    truth: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    l1_error: float
    missing: int = 0
    flags: tuple = field(default=())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"z": self.z, "truth": self.truth, "mean": self.mean,
                             "lo": self.lower, "hi": self.upper})

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "reps": self.reps, "seed": self.seed,
                "l1_error": self.l1_error, "missing": self.missing, "flags": list(self.flags)}


def l1_distance(z, a, b, z_range=L1_RANGE) -> float:
    """Trapezoid integral of |a - b| over z_range"""
    z = np.asarray(z, dtype=float)
    inside = (z >= z_range[0]) & (z <= z_range[1])
    return float(trapezoid(np.abs(np.asarray(a) - np.asarray(b))[inside], z[inside]))


def _covariate_replicate(args):
    spec, seed, r, basis, sampler, z_grid = args
    data = generate(spec, [seed, r])
    probs = design_probs(spec)
    gibbs = GibbsPosteriorSpec(dataset=data, probs=probs_for(data, probs), prior=BetaPriorSpec(),
                               learning_rate=1.0, basis=basis)
    try:
        chain = run_chain(gibbs, dataclasses.replace(sampler, seed=_replicate_seed(seed, r, 3),
                                                     threads=1))
    except (ValueError, RuntimeError) as exc:
        logger.warning("covariate replicate %d failed: %s", r, exc)
        return None
    curve = posterior_curve(chain, basis, z_grid)
    return curve.mean, curve.lower, curve.upper


def run_covariate_study(spec: ScenarioSpec, reps: int = 100, seed: int = 0,
                        basis: Optional[BSplineBasis] = None,
                        sampler: Optional[SamplerConfig] = None,
                        threads: int = 1) -> CovariateStudyResult:
    """
    Gibbs posterior (flat bounded coefficient prior, omega = 1) on `reps`
    simulated datasets; averages the posterior mean and 2.5/97.5% curves and
    reports the L1 error of the averaged mean curve on [0.05, 0.95]
    """
    if spec.kind != COVARIATE:
        raise ValueError("run_covariate_study needs a covariate scenario")
    if reps < MIN_REPS:
        raise ValueError(f"need reps >= {MIN_REPS}, got {reps}")
    basis = age_study_knots() if basis is None else basis
    sampler = SamplerConfig(iterations=5000, burn_in=1000, chains=1) if sampler is None else sampler
    z_grid = np.linspace(0.0, 1.0, CURVE_GRID)
    truth = true_cutoff(spec, z_grid)(z_grid)

    results = parallel_map(_covariate_replicate,
                           [(spec, seed, r, basis, sampler, z_grid) for r in range(reps)], threads)
    done = [res for res in results if res is not None]
    if not done:
        raise RuntimeError(f"{spec.id}: every covariate replicate failed")
    mean, lower, upper = (np.mean([res[i] for res in done], axis=0) for i in range(3))
    missing = reps - len(done)
    flags = (f"{missing} of {reps} replicates failed",) if missing else ()
    l1 = l1_distance(z_grid, mean, truth)
    logger.info("covariate study %s: %d replicates, L1 error %.4f", spec.id, len(done), l1)
    return CovariateStudyResult(scenario=spec.id, reps=reps, seed=seed, z=z_grid, truth=truth,
                                mean=mean, lower=lower, upper=upper, l1_error=l1,
                                missing=missing, flags=flags)
