"""
Command-line front end

    youden-gibbs fit-multiclass --input tmt.csv --output out/ --prior vague
    youden-gibbs fit-covariate --input diabetes.csv --rescale
    youden-gibbs calibrate | bootstrap | prior-from-split | simulate ...

Settings come from an optional INI file (--config) with sections [run],
[prior], [sampler], [gpc], [bootstrap], [covariate] and [simulate]; flags on
the command line override file values.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from youden_gibbs.calibration import GpcConfig, GpcTrace, calibrate
from youden_gibbs.core import (COVARIATE, ESTIMATED, KNOWN, MULTICLASS, ClassWeights, CutoffVector,
                               Dataset, known_class_probs, probs_for)
from youden_gibbs.mestimator import (bootstrap_intervals, minimize_covariate, minimize_multiclass,
                                     prior_from_split, split_dataset)
from youden_gibbs.objective import BSplineBasis, age_study_knots, youden_index_at
from youden_gibbs.prior import BetaPriorSpec, OrderedNormalSpec, beta_prior_logdensity
from youden_gibbs.sampler import (EXPLICIT, FROM_PRIOR, GibbsPosteriorSpec, SamplerConfig,
                                  chain_to_frame, posterior_curve, run_chain, summarize)
from youden_gibbs.simulation import METHODS, run_covariate_study, run_study
from youden_gibbs.various.artifacts import metadata, write_csv, write_json
from youden_gibbs.various.normalization import MinMaxScaling

logger = logging.getLogger(__name__)

COMMANDS = ("fit-multiclass", "fit-covariate", "calibrate", "bootstrap", "simulate",
            "prior-from-split")
PRIOR_KINDS = ("vague", "informative", "file")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _strings(text: str) -> tuple:
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: '{text}'")


# field: (INI section, INI key, parser)
_FIELDS = {
    "input": ("run", "input", str),
    "output": ("run", "output", str),
    "seed": ("run", "seed", int),
    "level": ("run", "level", float),
    "threads": ("run", "threads", int),
    "omega": ("run", "omega", float),
    "probs": ("run", "probs", str),
    "weights": ("run", "weights", _floats),
    "split_fraction": ("run", "split_fraction", float),
    "prior": ("prior", "kind", str),
    "prior_file": ("prior", "file", str),
    "prior_mu": ("prior", "mu", _floats),
    "prior_sd": ("prior", "sd", _floats),
    "vague_sd": ("prior", "vague_sd", float),
    "beta_prior": ("prior", "beta_kind", str),
    "beta_loc": ("prior", "beta_loc", _floats),
    "beta_scale": ("prior", "beta_scale", _floats),
    "iterations": ("sampler", "iterations", int),
    "burn_in": ("sampler", "burn_in", int),
    "thin": ("sampler", "thin", int),
    "chains": ("sampler", "chains", int),
    "target_accept": ("sampler", "target_accept", float),
    "gpc_B": ("gpc", "B", int),
    "gpc_max_iter": ("gpc", "max_iter", int),
    "gpc_tol": ("gpc", "tol", float),
    "kappa0": ("gpc", "kappa0", float),
    "omega_init": ("gpc", "omega_init", float),
    "coverage_mode": ("gpc", "coverage_mode", str),
    "inner_iterations": ("gpc", "inner_iterations", int),
    "inner_burn_in": ("gpc", "inner_burn_in", int),
    "B": ("bootstrap", "B", int),
    "d": ("covariate", "d", int),
    "knots": ("covariate", "knots", _floats),
    "rescale": ("covariate", "rescale", _bool),
    "grid": ("covariate", "grid", int),
    "scenario": ("simulate", "scenario", str),
    "n": ("simulate", "n", int),
    "reps": ("simulate", "reps", int),
    "methods": ("simulate", "methods", _strings),
}


@dataclass(frozen=True)
class RunConfig:
    """
    Resolved settings of one CLI run.
    probs: "estimated" or comma-separated known class probabilities
    omega: fixed learning rate; None calibrates it (multiclass) or uses 1 (covariate)
    """
    command: str
    input: Optional[str] = None
    output: str = "out"
    seed: int = 0
    level: float = 0.95
    threads: int = 1
    omega: Optional[float] = None
    probs: str = ESTIMATED
    weights: Optional[tuple] = None
    split_fraction: float = 0.5
    prior: str = "vague"
    prior_file: Optional[str] = None
    prior_mu: Optional[tuple] = None
    prior_sd: Optional[tuple] = None
    vague_sd: float = 20.0
    beta_prior: str = "flat"
    beta_loc: Optional[tuple] = None
    beta_scale: Optional[tuple] = None
    iterations: int = 20000
    burn_in: int = 5000
    thin: int = 1
    chains: int = 4
    target_accept: float = 0.30
    gpc_B: int = 200
    gpc_max_iter: int = 20
    gpc_tol: float = 0.02
    kappa0: float = 1.0
    omega_init: float = 1.0
    coverage_mode: str = "joint"
    inner_iterations: int = 4000
    inner_burn_in: int = 1000
    B: int = 1000
    d: int = 4
    knots: Optional[tuple] = None
    rescale: bool = False
    grid: int = 200
    scenario: str = "mc1"
    n: Optional[int] = None
    reps: int = 200
    methods: tuple = METHODS

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command '{self.command}'")
        if self.command != "simulate":
            if self.input is None:
                raise ValueError(f"{self.command} needs --input")
            if not Path(self.input).is_file():
                raise ValueError(f"input file not found: {self.input}")
        if self.prior not in PRIOR_KINDS:
            raise ValueError(f"unknown prior '{self.prior}', expected one of {PRIOR_KINDS}")
        if self.prior == "file" and self.prior_file is None:
            raise ValueError("--prior file needs --prior-file")
        if self.prior == "informative" and (self.prior_mu is None or self.prior_sd is None):
            raise ValueError("--prior informative needs --prior-mu and --prior-sd")
        if self.omega is not None and not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.command == "simulate" and (self.prior != "vague" or self.prior_file is not None
                                           or self.prior_mu is not None
                                           or self.prior_sd is not None):
            warnings.warn("simulate sets its priors per scenario and replicate, only vague_sd "
                          "is used", UserWarning)
        if self.grid < 2:
            raise ValueError(f"curve grid needs at least 2 points, got {self.grid}")
        # sub-configurations validate themselves
        self.sampler_config()
        self.gpc_config()
        self.class_probs()

    def class_probs(self):
        if self.probs.strip().lower() == ESTIMATED:
            return None
        return known_class_probs(_floats(self.probs))

    @property
    def probs_mode(self) -> str:
        return ESTIMATED if self.class_probs() is None else KNOWN

    def class_weights(self) -> Optional[ClassWeights]:
        return None if self.weights is None else ClassWeights(values=self.weights)

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(iterations=self.iterations, burn_in=self.burn_in, thin=self.thin,
                             chains=self.chains, target_accept=self.target_accept,
                             seed=self.seed, threads=self.threads)

    def gpc_config(self) -> GpcConfig:
        return GpcConfig(level=self.level, B=self.gpc_B, max_iter=self.gpc_max_iter,
                         tol=self.gpc_tol, kappa0=self.kappa0, omega_init=self.omega_init,
                         seed=self.seed, coverage_mode=self.coverage_mode,
                         inner_iterations=self.inner_iterations,
                         inner_burn_in=self.inner_burn_in, threads=self.threads)

    def to_dict(self) -> dict:
        """Settings that determine the results (the output directory does not)"""
        out = dataclasses.asdict(self)
        out.pop("output")
        return out


def read_ini(path) -> dict:
    """Field values found in an INI file, parsed to their types"""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ValueError(f"cannot read config file {path}")
    known = {(section, key) for section, key, _ in _FIELDS.values()}
    for section in parser.sections():
        for key in parser[section]:
            if (section, key) not in known:
                warnings.warn(f"unknown config entry [{section}] {key}", UserWarning)
    values = {}
    for name, (section, key, parse) in _FIELDS.items():
        if parser.has_option(section, key):
            try:
                values[name] = parse(parser.get(section, key))
            except ValueError as exc:
                raise ValueError(f"config [{section}] {key}: {exc}") from exc
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_ini(args.config) if getattr(args, "config", None) else {}
    for name in _FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(command=args.command, **values)


# Input
# ---------------------------------------------------------

def _numeric_column(frame: pd.DataFrame, col: str) -> np.ndarray:
    missing = frame[col].isna() | (frame[col].astype(str).str.strip() == "")
    if missing.any():
        row = int(np.flatnonzero(missing.to_numpy())[0])
        raise ValueError(f"missing value in column '{col}' at line {row + 2}")
    values = pd.to_numeric(frame[col].str.strip(), errors="coerce")
    bad = values.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ValueError(f"cannot parse '{frame[col].iloc[row]}' in column '{col}' "
                         f"at line {row + 2}")
    return values.to_numpy(dtype=float)


def load_dataset(path, rescale: bool = False) -> tuple:
    """
    Read a CSV with header x,y[,z] into a Dataset; z present means covariate
    data with labels -1/+1. rescale min-max maps z onto [0,1].
    Returns (dataset, scaling or None).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, comment="#", skipinitialspace=True)
    except pd.errors.EmptyDataError as exc:
        raise ValueError(f"{path}: empty file") from exc
    except pd.errors.ParserError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    frame.columns = [str(c).strip().lower() for c in frame.columns]
    if not {"x", "y"} <= set(frame.columns):
        raise ValueError(f"{path}: header must name columns x and y, got {list(frame.columns)}")
    unknown = [c for c in frame.columns if c not in ("x", "y", "z")]
    if unknown:
        warnings.warn(f"{path}: ignoring unknown columns {unknown}", UserWarning)

    x = _numeric_column(frame, "x")
    y = _numeric_column(frame, "y")
    fractional = y != np.round(y)
    if fractional.any():
        row = int(np.flatnonzero(fractional)[0])
        raise ValueError(f"label {y[row]} at line {row + 2} is not an integer")
    y = y.astype(int)

    scaling = None
    if "z" in frame.columns:
        z = _numeric_column(frame, "z")
        bad = ~np.isin(y, (-1, 1))
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ValueError(f"label {y[row]} at line {row + 2}: covariate data need y in {{-1, 1}}")
        if rescale:
            scaling = MinMaxScaling.fit(z)
            z = scaling.apply(z)
            logger.info("covariate rescaled from [%g, %g] to [0, 1]",
                        scaling.raw_min, scaling.raw_max)
        dataset = Dataset(x=x, y=y, z=z, kind=COVARIATE)
    else:
        bad = y < 1
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ValueError(f"label {y[row]} at line {row + 2}: multiclass labels start at 1")
        dataset = Dataset(x=x, y=y, kind=MULTICLASS)
    logger.info("read %d rows from %s, class counts %s", dataset.n, path,
                dict(zip(dataset.labels, dataset.counts.tolist())))
    return dataset, scaling


def ingest_csv(path, rescale: bool = False) -> Dataset:
    return load_dataset(path, rescale)[0]


def dataset_frame(dataset: Dataset) -> pd.DataFrame:
    frame = pd.DataFrame({"x": dataset.x, "y": dataset.y})
    if dataset.z is not None:
        frame["z"] = dataset.z
    return frame


# Subcommands
# ---------------------------------------------------------

def _read_prior_file(path) -> OrderedNormalSpec:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    prior = payload.get("prior", payload)
    return OrderedNormalSpec(mu=prior["mu"], sigma=prior["sigma"])


def resolve_prior(config: RunConfig, dataset: Dataset, centre) -> OrderedNormalSpec:
    """vague: sd vague_sd around prior_mu (default the M-estimate); informative; file"""
    if config.prior == "file":
        prior = _read_prior_file(config.prior_file)
    elif config.prior == "informative":
        prior = OrderedNormalSpec(mu=config.prior_mu, sigma=config.prior_sd)
    else:
        mu = centre if config.prior_mu is None else config.prior_mu
        prior = OrderedNormalSpec.vague(mu, sd=config.vague_sd)
    if prior.dim != dataset.k - 1:
        raise ValueError(f"prior has {prior.dim} cutoffs, data with k={dataset.k} need "
                         f"{dataset.k - 1}")
    return prior


def _meta(config: RunConfig, omega=None, prior=None, scaling=None) -> dict:
    return metadata(config.to_dict(), seed=config.seed, omega=omega,
                    prior=None if prior is None else prior.to_dict(),
                    probs_mode=config.probs_mode, threads=config.threads,
                    scaling=None if scaling is None else scaling.to_dict())


def _load_multiclass(config: RunConfig) -> Dataset:
    dataset = ingest_csv(config.input)
    if dataset.kind != MULTICLASS:
        raise ValueError(f"{config.command} needs multiclass data (columns x,y)")
    dataset.require_valid()
    return dataset


def _interval_rows(intervals) -> list:
    return [[iv.lower, iv.upper] for iv in intervals]


def fit_multiclass(config: RunConfig) -> dict:
    """
    M-estimate, bootstrap intervals, calibrated learning rate, Gibbs posterior
    chain and summary for multiclass data
    """
    out = Path(config.output)
    dataset = _load_multiclass(config)
    probs = config.class_probs()
    p = probs_for(dataset, probs)
    weights = config.class_weights()
    names = [f"theta_{j + 1}" for j in range(dataset.k - 1)]

    estimate = minimize_multiclass(dataset, p, weights)
    boot = bootstrap_intervals(dataset, B=config.B, level=config.level, seed=config.seed,
                               probs=probs, weights=weights, threads=config.threads)
    prior = resolve_prior(config, dataset, estimate.theta_hat.as_array())

    if config.omega is None:
        trace = calibrate(dataset, probs, prior, config.gpc_config(), weights=weights)
    else:
        trace = GpcTrace(omegas=(config.omega,), coverages=(), final_omega=config.omega,
                         converged=True, flags=("learning rate fixed, not calibrated",))
    omega = trace.final_omega
    meta = _meta(config, omega, prior)

    spec = GibbsPosteriorSpec(dataset=dataset, probs=p, prior=prior, learning_rate=omega,
                              weights=weights)
    chain = run_chain(spec, config.sampler_config())
    summary = summarize(chain, config.level)
    mean = CutoffVector(theta=summary.mean)

    paths = {
        "mestimate": write_json(out / "mestimate.json", estimate.to_dict(), meta),
        "bootstrap": write_csv(out / "bootstrap.csv",
                               pd.DataFrame(boot.replicates, columns=names), meta),
        "gpc_trace": write_json(out / "gpc_trace.json", trace.to_dict(), meta),
        "chain": write_csv(out / "chain.csv", chain_to_frame(chain, names), meta),
    }
    paths["summary"] = write_json(out / "summary.json", {
        "class_counts": dict(zip(map(str, dataset.labels), dataset.counts.tolist())),
        "theta_hat": list(estimate.theta_hat.theta),
        "youden_index": {"at_theta_hat": youden_index_at(estimate.theta_hat, dataset, p, weights),
                         "at_posterior_mean": youden_index_at(mean, dataset, p, weights)},
        "intervals": {"bootstrap": _interval_rows(boot.intervals),
                      "gibbs": _interval_rows(summary.intervals)},
        "posterior": summary.to_dict(),
        "bootstrap": boot.to_dict(),
        "gpc": trace.to_dict(),
    }, meta)
    return paths


def fit_covariate(config: RunConfig) -> dict:
    """
    Spline M-estimate, Gibbs posterior chain and pointwise curve band for
    covariate data; the curve is reported in original covariate units when
    the covariate was rescaled
    """
    out = Path(config.output)
    dataset, scaling = load_dataset(config.input, rescale=config.rescale)
    if dataset.kind != COVARIATE:
        raise ValueError("fit-covariate needs covariate data (columns x,y,z)")
    dataset.require_valid()
    basis = age_study_knots(config.d) if config.knots is None else BSplineBasis(knots=config.knots)
    p = probs_for(dataset, config.class_probs())
    omega = 1.0 if config.omega is None else config.omega
    prior = BetaPriorSpec(kind=config.beta_prior, loc=config.beta_loc, scale=config.beta_scale)
    names = [f"beta_{j + 1}" for j in range(basis.d)]

    estimate = minimize_covariate(dataset, p, basis, seed=config.seed, bound=prior.bound,
                                  threads=config.threads)
    spec = GibbsPosteriorSpec(dataset=dataset, probs=p, prior=prior, learning_rate=omega,
                              basis=basis)
    if np.isfinite(beta_prior_logdensity(spec.prior, estimate.beta_hat)):
        sampler = dataclasses.replace(config.sampler_config(), init=EXPLICIT,
                                      init_value=tuple(estimate.beta_hat))
    else:
        logger.info("M-estimate outside the coefficient prior support, chain starts from a "
                    "prior draw")
        sampler = dataclasses.replace(config.sampler_config(), init=FROM_PRIOR)
    chain = run_chain(spec, sampler)
    summary = summarize(chain, config.level)
    curve = posterior_curve(chain, basis, np.linspace(0.0, 1.0, config.grid), config.level)
    curve_frame = curve.to_frame()
    if scaling is not None:
        curve_frame.insert(1, "z_scaled", curve_frame["z"])
        curve_frame["z"] = scaling.invert(curve_frame["z_scaled"])

    meta = _meta(config, omega, spec.prior, scaling)
    paths = {
        "mestimate": write_json(out / "mestimate.json", estimate.to_dict(), meta),
        "chain": write_csv(out / "chain.csv", chain_to_frame(chain, names), meta),
        "curve": write_csv(out / "curve.csv", curve_frame, meta),
    }
    paths["summary"] = write_json(out / "summary.json", {
        "class_counts": dict(zip(map(str, dataset.labels), dataset.counts.tolist())),
        "beta_hat": estimate.beta_hat.tolist(),
        "knots": basis.knots.tolist(),
        "scaling": None if scaling is None else scaling.to_dict(),
        "posterior": summary.to_dict(),
    }, meta)
    return paths


def run_calibrate(config: RunConfig) -> dict:
    dataset = _load_multiclass(config)
    probs = config.class_probs()
    centre = minimize_multiclass(dataset, probs_for(dataset, probs)).theta_hat.as_array()
    prior = resolve_prior(config, dataset, centre)
    trace = calibrate(dataset, probs, prior, config.gpc_config(), weights=config.class_weights())
    meta = _meta(config, trace.final_omega, prior)
    out = Path(config.output)
    return {"gpc_trace": write_json(out / "gpc_trace.json", trace.to_dict(), meta),
            "gpc_iterations": write_csv(out / "gpc_trace.csv", trace.to_frame(), meta)}


def run_bootstrap(config: RunConfig) -> dict:
    dataset = _load_multiclass(config)
    boot = bootstrap_intervals(dataset, B=config.B, level=config.level, seed=config.seed,
                               probs=config.class_probs(), weights=config.class_weights(),
                               threads=config.threads)
    names = [f"theta_{j + 1}" for j in range(dataset.k - 1)]
    meta = _meta(config)
    out = Path(config.output)
    return {"bootstrap": write_csv(out / "bootstrap.csv",
                                   pd.DataFrame(boot.replicates, columns=names), meta),
            "intervals": write_json(out / "bootstrap.json", boot.to_dict(), meta)}


def run_prior_from_split(config: RunConfig) -> dict:
    """
    Split the data (stratified, split_fraction to the prior part), build the
    informative prior on one part and write the other part for analysis
    """
    dataset = _load_multiclass(config)
    prior_part, analysis_part = split_dataset(dataset, config.split_fraction, config.seed)
    prior = prior_from_split(prior_part, B=config.B, seed=config.seed,
                             probs=config.class_probs(), level=config.level,
                             threads=config.threads)
    meta = _meta(config, prior=prior)
    out = Path(config.output)
    return {"prior": write_json(out / "prior.json", {
                "prior": prior.to_dict(),
                "split": {"fraction": config.split_fraction, "prior_n": prior_part.n,
                          "analysis_n": analysis_part.n}}, meta),
            "analysis": write_csv(out / "analysis.csv", dataset_frame(analysis_part), meta)}


def simulate(config: RunConfig) -> dict:
    from youden_gibbs.scenario_definition import SCENARIOS

    if config.scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario '{config.scenario}', expected one of {sorted(SCENARIOS)}")
    spec = SCENARIOS[config.scenario]
    if config.n is not None:
        spec = spec.with_n(config.n)
    out = Path(config.output)
    meta = _meta(config)
    if spec.kind == COVARIATE:
        result = run_covariate_study(spec, reps=config.reps, seed=config.seed,
                                     sampler=dataclasses.replace(config.sampler_config(), chains=1),
                                     threads=config.threads)
        return {"curves": write_csv(out / f"{spec.id}_curves.csv", result.to_frame(), meta),
                "study": write_json(out / f"{spec.id}_study.json", result.to_dict(), meta)}
    result = run_study(spec, methods=config.methods, reps=config.reps, level=config.level,
                       seed=config.seed, B=config.B, gpc=config.gpc_config(),
                       sampler=dataclasses.replace(config.sampler_config(), chains=1),
                       vague_sd=config.vague_sd, threads=config.threads)
    return {"table": write_csv(out / f"{spec.id}_study.csv", result.to_frame(), meta),
            "study": write_json(out / f"{spec.id}_study.json", result.to_dict(), meta)}


RUNNERS = {
    "fit-multiclass": fit_multiclass,
    "fit-covariate": fit_covariate,
    "calibrate": run_calibrate,
    "bootstrap": run_bootstrap,
    "prior-from-split": run_prior_from_split,
    "simulate": simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="youden-gibbs",
        description="Gibbs posterior inference on Youden index cutoffs")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for details")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with run settings")
    common.add_argument("--output", help="output directory (default: out)")
    common.add_argument("--seed", type=int)
    common.add_argument("--level", type=float, help="credible / confidence level (default: 0.95)")
    common.add_argument("--threads", type=int, help="worker processes (part of reproducibility)")
    common.add_argument("--probs", help="'estimated' or known class probabilities, e.g. 0.5,0.5")
    common.add_argument("--B", type=int, dest="B", help="bootstrap replicates (default: 1000)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", help="CSV with header x,y[,z]")
    data.add_argument("--weights", type=_floats, help="class-pair weights w_j in (0,1)")

    prior = argparse.ArgumentParser(add_help=False)
    prior.add_argument("--prior", choices=PRIOR_KINDS)
    prior.add_argument("--prior-file", dest="prior_file", help="prior JSON from prior-from-split")
    prior.add_argument("--prior-mu", dest="prior_mu", type=_floats)
    prior.add_argument("--prior-sd", dest="prior_sd", type=_floats)
    prior.add_argument("--vague-sd", dest="vague_sd", type=float)

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--omega", type=float, help="fixed learning rate (skips calibration)")
    chain.add_argument("--iterations", type=int)
    chain.add_argument("--burn-in", dest="burn_in", type=int)
    chain.add_argument("--thin", type=int)
    chain.add_argument("--chains", type=int)

    gpc = argparse.ArgumentParser(add_help=False)
    gpc.add_argument("--gpc-B", dest="gpc_B", type=int, help="bootstrap datasets for calibration")
    gpc.add_argument("--gpc-max-iter", dest="gpc_max_iter", type=int)
    gpc.add_argument("--gpc-tol", dest="gpc_tol", type=float)
    gpc.add_argument("--coverage-mode", dest="coverage_mode", choices=("joint", "marginal"))
    gpc.add_argument("--inner-iterations", dest="inner_iterations", type=int)
    gpc.add_argument("--inner-burn-in", dest="inner_burn_in", type=int)

    sub.add_parser("fit-multiclass", parents=[common, data, prior, chain, gpc],
                   help="bootstrap and calibrated Gibbs posterior for ordered cutoffs")
    p_cov = sub.add_parser("fit-covariate", parents=[common, data, chain],
                           help="Gibbs posterior for a covariate-adjusted cutoff curve")
    p_cov.add_argument("--d", type=int, help="number of b-spline basis functions (default: 4)")
    p_cov.add_argument("--knots", type=_floats, help="full knot vector, t_0 = 0 and t_(d-3) = 1")
    p_cov.add_argument("--rescale", action="store_true", default=None,
                       help="min-max rescale z onto [0,1]")
    p_cov.add_argument("--grid", type=int, help="curve grid points (default: 200)")
    p_cov.add_argument("--beta-prior", dest="beta_prior",
                       choices=("flat", "independent_normal", "independent_exponential"))
    sub.add_parser("calibrate", parents=[common, data, prior, gpc],
                   help="learning-rate calibration only")
    sub.add_parser("bootstrap", parents=[common, data], help="percentile bootstrap intervals only")
    p_split = sub.add_parser("prior-from-split", parents=[common, data],
                             help="informative prior from a random half of the data")
    p_split.add_argument("--fraction", dest="split_fraction", type=float,
                         help="share of every class used for the prior (default: 0.5)")
    p_sim = sub.add_parser("simulate", parents=[common, chain, gpc],
                           help="coverage / length study on a simulation scenario")
    p_sim.add_argument("--vague-sd", dest="vague_sd", type=float,
                       help="sd of the vague prior around each replicate's M-estimate")
    p_sim.add_argument("--scenario", help="mc1, mc2, mc3, cov1, cov2 or cov3")
    p_sim.add_argument("--n", type=int, help="observations per class")
    p_sim.add_argument("--reps", type=int)
    p_sim.add_argument("--methods", type=_strings, help=f"subset of {','.join(METHODS)}")
    return parser


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = build_config(args)
        paths = RUNNERS[config.command](config)
    except Exception as exc:
        logger.error("%s failed: %s", args.command, exc)
        logger.debug("traceback", exc_info=True)
        return 1
    for name, path in paths.items():
        logger.info("%s: %s", name, path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
