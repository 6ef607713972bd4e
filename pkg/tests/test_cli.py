import json

import numpy as np
import pandas as pd
import pytest

from youden_gibbs.cli import build_config, build_parser, ingest_csv, load_dataset, main
from youden_gibbs.core import COVARIATE, MULTICLASS
from youden_gibbs.various.artifacts import read_csv

SMALL_CHAIN = ["--iterations", "600", "--burn-in", "200", "--chains", "2"]
SMALL_GPC = ["--gpc-B", "50", "--gpc-max-iter", "2", "--inner-iterations", "300",
             "--inner-burn-in", "100"]


@pytest.fixture
def tmt_like(rng):
    """Three ordered groups sized like the trail-making data: 170 / 52 / 23"""
    sizes = [170, 52, 23]
    x = np.concatenate([rng.normal(30, 8, 170), rng.normal(45, 12, 52), rng.normal(80, 25, 23)])
    return pd.DataFrame({"x": np.round(x, 1), "y": np.repeat([1, 2, 3], sizes)})


@pytest.fixture
def small_multiclass(rng):
    x = np.concatenate([rng.gamma(2.0, 1.0, 20), rng.gamma(3.0, 1.0, 20), rng.gamma(5.0, 2.0, 20)])
    return pd.DataFrame({"x": x, "y": np.repeat([1, 2, 3], 20)})


@pytest.fixture
def age_covariate(rng):
    age = rng.integers(20, 90, 120).astype(float)
    age[:2] = [20.0, 89.0]
    y = np.repeat([-1, 1], 60)
    x = 80 + 0.4 * age + np.where(y == 1, 25.0, 0.0) + rng.normal(0, 8, 120)
    return pd.DataFrame({"x": x, "y": y, "z": age})


class TestIngest:

    def test_multiclass_counts(self, tmt_like, write_table):
        data = ingest_csv(write_table(tmt_like))
        assert data.kind == MULTICLASS
        assert data.n == 245
        assert data.counts.tolist() == [170, 52, 23]

    def test_covariate_detected(self, age_covariate, write_table):
        data, scaling = load_dataset(write_table(age_covariate), rescale=True)
        assert data.kind == COVARIATE
        assert (data.z.min(), data.z.max()) == (0.0, 1.0)
        assert (scaling.raw_min, scaling.raw_max) == (20.0, 89.0)

    def test_zero_label(self, write_table):
        path = write_table(pd.DataFrame({"x": [1.0, 2.0], "y": [0, 1]}))
        with pytest.raises(ValueError, match="start at 1"):
            ingest_csv(path)

    def test_covariate_labels(self, write_table):
        path = write_table(pd.DataFrame({"x": [1.0, 2.0], "y": [1, 2], "z": [0.1, 0.2]}))
        with pytest.raises(ValueError, match="line 3"):
            ingest_csv(path)

    def test_missing_value(self, write_table):
        path = write_table(pd.DataFrame({"x": [1.0, None, 3.0], "y": [1, 2, 2]}))
        with pytest.raises(ValueError, match="missing value in column 'x' at line 3"):
            ingest_csv(path)

    def test_unparseable_value(self, write_table):
        path = write_table(pd.DataFrame({"x": ["1.0", "abc"], "y": [1, 2]}))
        with pytest.raises(ValueError, match="cannot parse 'abc'"):
            ingest_csv(path)

    def test_fractional_label(self, write_table):
        path = write_table(pd.DataFrame({"x": [1.0, 2.0], "y": [1, 1.5]}))
        with pytest.raises(ValueError, match="not an integer"):
            ingest_csv(path)

    def test_header_required(self, write_table):
        path = write_table(pd.DataFrame({"value": [1.0], "group": [1]}))
        with pytest.raises(ValueError, match="header"):
            ingest_csv(path)

    def test_unknown_column_warns(self, write_table):
        path = write_table(pd.DataFrame({"x": [1.0, 2.0], "y": [1, 2], "id": [7, 8]}))
        with pytest.warns(UserWarning, match="unknown columns"):
            data = ingest_csv(path)
        assert data.n == 2


class TestConfig:

    def test_flags_override_ini(self, tmp_path, small_multiclass, write_table):
        csv = write_table(small_multiclass)
        ini = tmp_path / "run.ini"
        ini.write_text("[run]\nseed = 5\nlevel = 0.9\n\n[bootstrap]\nB = 150\n\n"
                       "[sampler]\niterations = 800\n", encoding="utf-8")
        args = build_parser().parse_args(["bootstrap", "--config", str(ini), "--input", str(csv),
                                          "--B", "120"])
        config = build_config(args)
        assert (config.seed, config.level, config.B, config.iterations) == (5, 0.9, 120, 800)
        assert "output" not in config.to_dict()

    def test_unknown_ini_entry_warns(self, tmp_path, small_multiclass, write_table):
        csv = write_table(small_multiclass)
        ini = tmp_path / "run.ini"
        ini.write_text("[run]\nseeds = 5\n", encoding="utf-8")
        args = build_parser().parse_args(["bootstrap", "--config", str(ini), "--input", str(csv)])
        with pytest.warns(UserWarning, match="seeds"):
            build_config(args)

    def test_simulate_rejects_prior_flags(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["simulate", "--scenario", "mc1", "--prior", "informative"])
        args = build_parser().parse_args(["simulate", "--scenario", "mc1", "--vague-sd", "5"])
        assert build_config(args).vague_sd == 5.0

    def test_simulate_ini_prior_warns(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[prior]\nkind = informative\nmu = 2,6\nsd = 0.5\n", encoding="utf-8")
        args = build_parser().parse_args(["simulate", "--config", str(ini), "--scenario", "mc1"])
        with pytest.warns(UserWarning, match="vague_sd"):
            build_config(args)

    def test_known_probs(self, small_multiclass, write_table):
        args = build_parser().parse_args(["bootstrap", "--input", str(write_table(small_multiclass)),
                                          "--probs", "0.2,0.3,0.5"])
        config = build_config(args)
        assert config.probs_mode == "known"
        assert config.class_probs().values == (0.2, 0.3, 0.5)


class TestCommands:

    def test_bootstrap(self, tmp_path, small_multiclass, write_table):
        out = tmp_path / "boot"
        code = main(["bootstrap", "--input", str(write_table(small_multiclass)), "--B", "100",
                     "--output", str(out)])
        assert code == 0
        replicates = read_csv(out / "bootstrap.csv")
        assert list(replicates.columns) == ["theta_1", "theta_2"]
        assert len(replicates) == 100
        payload = json.loads((out / "bootstrap.json").read_text(encoding="utf-8"))
        assert payload["metadata"]["seed"] == 0
        assert len(payload["metadata"]["config_hash"]) == 16

    def test_missing_input_fails(self, tmp_path):
        assert main(["bootstrap", "--input", str(tmp_path / "nope.csv")]) == 1

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["fit-everything"])

    def test_fit_multiclass_reproducible(self, tmp_path, small_multiclass, write_table):
        csv = str(write_table(small_multiclass))
        args = ["fit-multiclass", "--input", csv, "--B", "100", "--seed", "3"] + SMALL_CHAIN + SMALL_GPC
        assert main(args + ["--output", str(tmp_path / "a")]) == 0
        assert main(args + ["--output", str(tmp_path / "b")]) == 0
        for name in ("mestimate.json", "bootstrap.csv", "gpc_trace.json", "chain.csv",
                     "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

        summary = json.loads((tmp_path / "a" / "summary.json").read_text(encoding="utf-8"))
        assert summary["class_counts"] == {"1": 20, "2": 20, "3": 20}
        assert len(summary["intervals"]["gibbs"]) == 2
        assert summary["metadata"]["omega"] == summary["gpc"]["final_omega"]
        chain = read_csv(tmp_path / "a" / "chain.csv")
        assert list(chain.columns) == ["chain", "draw", "theta_1", "theta_2"]
        assert len(chain) == 2 * 400

    def test_fit_multiclass_fixed_omega(self, tmp_path, small_multiclass, write_table):
        out = tmp_path / "fixed"
        code = main(["fit-multiclass", "--input", str(write_table(small_multiclass)), "--B", "100",
                     "--omega", "0.5", "--output", str(out)] + SMALL_CHAIN)
        assert code == 0
        trace = json.loads((out / "gpc_trace.json").read_text(encoding="utf-8"))
        assert trace["final_omega"] == 0.5
        assert trace["flags"] == ["learning rate fixed, not calibrated"]

    def test_fit_covariate_rescaled(self, tmp_path, age_covariate, write_table):
        out = tmp_path / "cov"
        code = main(["fit-covariate", "--input", str(write_table(age_covariate)), "--rescale",
                     "--grid", "20", "--iterations", "800", "--burn-in", "200", "--chains", "1",
                     "--output", str(out)])
        assert code == 0
        curve = read_csv(out / "curve.csv")
        assert list(curve.columns) == ["z", "z_scaled", "mean", "lo", "hi"]
        assert curve["z"].iloc[0] == pytest.approx(20.0)
        assert curve["z"].iloc[-1] == pytest.approx(89.0)
        assert curve["z"].is_monotonic_increasing
        assert (curve["lo"] <= curve["hi"]).all()
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        scaling = {"kind": "min_max", "raw_min": 20.0, "raw_max": 89.0}
        assert summary["scaling"] == scaling
        for name in ("curve.csv", "chain.csv"):
            first = (out / name).read_text(encoding="utf-8").splitlines()[0]
            assert first.startswith("# metadata ")
            assert json.loads(first[len("# metadata "):])["scaling"] == scaling
        assert len(summary["beta_hat"]) == 4

    def test_calibrate(self, tmp_path, small_multiclass, write_table):
        out = tmp_path / "gpc"
        code = main(["calibrate", "--input", str(write_table(small_multiclass)),
                     "--output", str(out)] + SMALL_GPC)
        assert code == 0
        frame = read_csv(out / "gpc_trace.csv")
        assert list(frame.columns) == ["iteration", "omega", "coverage"]
        assert 1 <= len(frame) <= 3

    def test_prior_from_split_feeds_fit(self, tmp_path, tmt_like, write_table):
        out = tmp_path / "split"
        code = main(["prior-from-split", "--input", str(write_table(tmt_like)), "--B", "100",
                     "--fraction", "0.5", "--output", str(out)])
        assert code == 0
        payload = json.loads((out / "prior.json").read_text(encoding="utf-8"))
        assert len(payload["prior"]["mu"]) == 2
        assert payload["split"]["prior_n"] + payload["split"]["analysis_n"] == 245

        fit = tmp_path / "fit"
        code = main(["fit-multiclass", "--input", str(out / "analysis.csv"), "--B", "100",
                     "--prior", "file", "--prior-file", str(out / "prior.json"), "--omega", "1",
                     "--output", str(fit)] + SMALL_CHAIN)
        assert code == 0
        summary = json.loads((fit / "summary.json").read_text(encoding="utf-8"))
        assert summary["metadata"]["prior"]["mu"] == payload["prior"]["mu"]

    def test_simulate(self, tmp_path):
        out = tmp_path / "sim"
        code = main(["simulate", "--scenario", "mc1", "--n", "15", "--reps", "50",
                     "--methods", "bootstrap", "--B", "100", "--output", str(out)])
        assert code == 0
        table = read_csv(out / "mc1_study.csv")
        assert table["method"].tolist() == ["bootstrap", "bootstrap"]
        assert (table["replicates"] == 50).all()

    def test_simulate_unknown_scenario(self, tmp_path):
        assert main(["simulate", "--scenario", "mc9", "--output", str(tmp_path)]) == 1
