"""
Domain types shared by all modules

Datasets, class probabilities and weights, cutoff vectors, intervals and
posterior chains. Everything here is immutable after construction.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MULTICLASS = "multiclass"
COVARIATE = "covariate"
KINDS = (MULTICLASS, COVARIATE)

KNOWN = "known"
ESTIMATED = "estimated"

BOOTSTRAP_PERCENTILE = "bootstrap_percentile"
GIBBS_QUANTILE = "gibbs_quantile"


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Observation:
    """
    Single diagnostic measurement x with class label y and optional covariate z
    """
    x: float
    y: int
    z: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Immutable collection of observations.

    Labels are 1..k for kind="multiclass" and -1/+1 for kind="covariate"
    (healthy -1, diseased +1). Labels outside the domain are rejected here;
    everything else (empty classes, z range, non-finite x) is left to validate().
    """
    x: np.ndarray
    y: np.ndarray
    z: Optional[np.ndarray] = None
    k: Optional[int] = None
    kind: str = MULTICLASS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind '{self.kind}'")

        x = _frozen_array(self.x, float).ravel()
        y_raw = np.asarray(self.y).ravel()
        if y_raw.size and not np.all(np.equal(np.mod(y_raw, 1), 0)):
            raise ValueError("class labels must be integers")
        y = _frozen_array(y_raw, int)
        if x.shape != y.shape:
            raise ValueError(f"x has {x.size} entries but y has {y.size}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

        if self.kind == MULTICLASS:
            if self.z is not None:
                raise ValueError("z given for a multiclass dataset")
            k = int(self.k) if self.k is not None else int(y.max(initial=0))
            if k < 2:
                raise ValueError(f"need k >= 2 classes, got k={k}")
            labels = tuple(range(1, k + 1))
        else:
            if self.k not in (None, 2):
                raise ValueError(f"covariate datasets have k=2, got k={self.k}")
            if self.z is None:
                raise ValueError("covariate dataset needs z")
            z = _frozen_array(self.z, float).ravel()
            if z.shape != x.shape:
                raise ValueError(f"x has {x.size} entries but z has {z.size}")
            object.__setattr__(self, "z", z)
            k = 2
            labels = (-1, 1)

        bad = ~np.isin(y, labels)
        if np.any(bad):
            row = int(np.flatnonzero(bad)[0])
            raise ValueError(f"label {y[row]} at row {row} outside {labels} for {self.kind} data")

        object.__setattr__(self, "k", k)
        # Helper arrays, precomputed once (class index 0..k-1, counts, sorted x per class)
        codes = np.searchsorted(np.array(labels), y)
        codes.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "counts", _frozen_array(np.bincount(codes, minlength=k), int))
        object.__setattr__(self, "class_x",
                           tuple(_frozen_array(np.sort(x[codes == c]), float) for c in range(k)))

    @classmethod
    def from_observations(cls, observations: Sequence[Observation], k: Optional[int] = None,
                          kind: str = MULTICLASS) -> "Dataset":
        x = [o.x for o in observations]
        y = [o.y for o in observations]
        z = None
        if kind == COVARIATE:
            z = [np.nan if o.z is None else o.z for o in observations]
        return cls(x=x, y=y, z=z, k=k, kind=kind)

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def observations(self) -> list:
        if self.z is None:
            return [Observation(float(a), int(b)) for a, b in zip(self.x, self.y)]
        return [Observation(float(a), int(b), float(c)) for a, b, c in zip(self.x, self.y, self.z)]

    def subset(self, index) -> "Dataset":
        """New dataset from (possibly repeated) row indices, e.g. a bootstrap resample"""
        index = np.asarray(index, dtype=int)
        z = None if self.z is None else self.z[index]
        return Dataset(x=self.x[index], y=self.y[index], z=z, k=self.k, kind=self.kind)

    def with_x(self, x) -> "Dataset":
        return Dataset(x=x, y=self.y, z=self.z, k=self.k, kind=self.kind)

    def require_valid(self) -> None:
        report = validate(self)
        if not report.ok:
            raise ValueError("invalid dataset: " + "; ".join(report.violations))


@dataclass(frozen=True)
class ValidationReport:
    counts: dict
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


def _rows(mask: np.ndarray) -> str:
    rows = np.flatnonzero(mask)
    shown = ", ".join(str(r) for r in rows[:5])
    return f"{shown}, ..." if rows.size > 5 else shown


def validate(dataset: Dataset) -> ValidationReport:
    """
    Report class counts and every violation of the dataset invariants.
    Never raises.
    """
    counts = {label: int(c) for label, c in zip(dataset.labels, dataset.counts)}
    violations = []
    for label, c in counts.items():
        if c == 0:
            violations.append(f"class {label} empty")
    if dataset.n < dataset.k:
        violations.append(f"n={dataset.n} smaller than k={dataset.k}")

    nonfinite = ~np.isfinite(dataset.x)
    if np.any(nonfinite):
        violations.append(f"x not finite at rows {_rows(nonfinite)}")

    if dataset.kind == COVARIATE:
        missing = np.isnan(dataset.z)
        if np.any(missing):
            violations.append(f"z missing at rows {_rows(missing)}")
        with np.errstate(invalid="ignore"):
            outside = ~missing & ((dataset.z < 0) | (dataset.z > 1))
        if np.any(outside):
            violations.append(f"z out of [0,1] at rows {_rows(outside)}")

    if violations:
        logger.debug("dataset validation: %s", violations)
    return ValidationReport(counts=counts, violations=tuple(violations))


@dataclass(frozen=True)
class ClassProbs:
    """
    Class probabilities p_j, ordered like Dataset.labels.
    source="known" for case-control designs, "estimated" for sample proportions.
    """
    values: tuple
    source: str = KNOWN

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.source not in (KNOWN, ESTIMATED):
            raise ValueError(f"unknown probability source '{self.source}'")
        if len(values) < 2:
            raise ValueError("need at least two class probabilities")
        if any(not (0 < v < 1) for v in values):
            raise ValueError(f"class probabilities must lie in (0,1), got {values}")
        if abs(sum(values) - 1) > 1e-12:
            raise ValueError(f"class probabilities sum to {sum(values)!r}, not 1")

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def known_class_probs(values) -> ClassProbs:
    return ClassProbs(values=tuple(values), source=KNOWN)


def estimate_class_probs(dataset: Dataset) -> ClassProbs:
    """Sample proportions p_j = n_j / n"""
    empty = [label for label, c in zip(dataset.labels, dataset.counts) if c == 0]
    if empty:
        raise ValueError(f"cannot estimate class probabilities, empty classes {empty}")
    values = tuple(int(c) / dataset.n for c in dataset.counts)
    return ClassProbs(values=values, source=ESTIMATED)


def probs_for(dataset: Dataset, probs: Optional[ClassProbs]) -> ClassProbs:
    """Known probabilities pass through, estimated ones are re-estimated on `dataset`"""
    if probs is None or probs.source == ESTIMATED:
        return estimate_class_probs(dataset)
    if len(probs.values) != dataset.k:
        raise ValueError(f"{len(probs.values)} class probabilities for k={dataset.k}")
    return probs


@dataclass(frozen=True)
class ClassWeights:
    """Weights w_j in (0,1) on the k-1 adjacent class pairs"""
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if any(not (0 < v < 1) for v in values):
            raise ValueError(f"class weights must lie in (0,1), got {values}")

    @classmethod
    def equal(cls, k: int) -> "ClassWeights":
        return cls(values=(0.5,) * (k - 1))

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class CutoffVector:
    """Strictly increasing cutoffs theta_1 < ... < theta_{k-1}"""
    theta: tuple

    def __post_init__(self):
        theta = tuple(float(t) for t in np.atleast_1d(self.theta))
        object.__setattr__(self, "theta", theta)
        if len(theta) == 0:
            raise ValueError("empty cutoff vector")
        if not all(np.isfinite(theta)):
            raise ValueError(f"cutoffs must be finite, got {theta}")
        if any(b <= a for a, b in zip(theta, theta[1:])):
            raise ValueError(f"cutoffs must be strictly increasing, got {theta}")

    def __len__(self):
        return len(self.theta)

    def as_array(self) -> np.ndarray:
        return np.array(self.theta)


@dataclass(frozen=True)
class CredibleInterval:
    lower: float
    upper: float
    level: float
    method: str = GIBBS_QUANTILE

    def __post_init__(self):
        if not (0 < self.level < 1):
            raise ValueError(f"level must lie in (0,1), got {self.level}")
        if self.method not in (BOOTSTRAP_PERCENTILE, GIBBS_QUANTILE):
            raise ValueError(f"unknown interval method '{self.method}'")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} above upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def percentile_interval(values, level: float, method: str = GIBBS_QUANTILE) -> CredibleInterval:
    """
    Equal-tailed interval from the alpha/2 and 1-alpha/2 empirical quantiles.
    Bootstrap intervals use order statistics (inverted CDF), posterior intervals
    numpy's default linear interpolation.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("no values to form an interval from")
    # rounded so that B * alpha/2 hits whole order statistics (25th, 975th of 1000)
    alpha = round(1 - level, 12)
    q_method = "inverted_cdf" if method == BOOTSTRAP_PERCENTILE else "linear"
    lo, hi = np.quantile(values, [alpha / 2, 1 - alpha / 2], method=q_method)
    return CredibleInterval(lower=float(lo), upper=float(hi), level=level, method=method)


@dataclass(frozen=True, eq=False)
class PosteriorChain:
    """
    MCMC output of the Gibbs posterior.

    draws: (chains, retained draws, parameters)
    acceptance: (chains, parameters) post burn-in acceptance rates
    """
    draws: np.ndarray
    acceptance: np.ndarray
    burn_in: int
    thin: int
    learning_rate: float
    kind: str = MULTICLASS
    proposal_scales: Optional[np.ndarray] = None
    seed: Optional[int] = None
    flags: tuple = field(default=())

    def __post_init__(self):
        draws = _frozen_array(self.draws, float)
        if draws.ndim == 2:
            draws = _frozen_array(draws[None, :, :], float)
        if draws.ndim != 3:
            raise ValueError("draws must have shape (chains, draws, parameters)")
        acceptance = _frozen_array(self.acceptance, float).reshape(draws.shape[0], -1)
        if np.any((acceptance < 0) | (acceptance > 1)):
            raise ValueError("acceptance rates must lie in [0,1]")
        if self.kind == MULTICLASS and draws.shape[2] > 1 and draws.shape[1] > 0:
            if not np.all(np.diff(draws, axis=2) > 0):
                raise ValueError("multiclass draws violate the cutoff ordering")
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "acceptance", acceptance)
        if self.proposal_scales is not None:
            object.__setattr__(self, "proposal_scales", _frozen_array(self.proposal_scales, float))

    @property
    def acceptance_rate(self) -> float:
        return float(self.acceptance.mean())

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_params(self) -> int:
        return self.draws.shape[2]

    @property
    def samples(self) -> np.ndarray:
        """All chains pooled, shape (chains * draws, parameters)"""
        return self.draws.reshape(-1, self.draws.shape[2])
