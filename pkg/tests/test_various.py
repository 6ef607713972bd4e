import json

import numpy as np
import pandas as pd
import pytest

from youden_gibbs.various.artifacts import (canonical_json, config_hash, metadata, read_csv,
                                            to_jsonable, write_csv, write_json)
from youden_gibbs.various.normalization import MinMaxScaling, denorm, norm
from youden_gibbs.various.parallel import parallel_map, task_rng


def _square(x):
    return x * x


def _draw(index):
    return task_rng(9, index).normal()


class TestNormalization:

    def test_norm_denorm(self):
        prop = {"n": [0.0, 1.0], "r": [20.0, 89.0]}
        np.testing.assert_allclose(norm([20.0, 54.5, 89.0], prop), [0.0, 0.5, 1.0])
        np.testing.assert_allclose(denorm(norm([33.0, 71.0], prop), prop), [33.0, 71.0])

    def test_min_max_scaling(self):
        scaling = MinMaxScaling.fit([20.0, 35.0, 89.0])
        assert (scaling.raw_min, scaling.raw_max) == (20.0, 89.0)
        np.testing.assert_allclose(scaling.apply([20.0, 89.0]), [0.0, 1.0])
        np.testing.assert_allclose(scaling.invert([0.0, 1.0]), [20.0, 89.0])
        assert scaling.to_dict()["kind"] == "min_max"

    def test_constant_covariate(self):
        with pytest.raises(ValueError, match="constant"):
            MinMaxScaling.fit([3.0, 3.0])


class TestParallel:

    def test_ordered_results(self):
        assert parallel_map(_square, range(6), threads=2) == [0, 1, 4, 9, 16, 25]

    def test_task_streams_independent_of_workers(self):
        assert parallel_map(_draw, range(4)) == parallel_map(_draw, range(4), threads=2)
        assert task_rng(9, 0).normal() != task_rng(9, 1).normal()


class TestArtifacts:

    def test_jsonable(self):
        payload = to_jsonable({"a": np.arange(2), "b": np.float64(np.nan), "c": (np.bool_(True),),
                               1: np.int64(3)})
        assert payload == {"a": [0, 1], "b": None, "c": [True], "1": 3}

    def test_hash_ignores_key_order(self):
        assert config_hash({"a": 1, "b": [1.0, 2.0]}) == config_hash({"b": [1.0, 2.0], "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})
        assert len(config_hash({"a": 1})) == 16

    def test_json_sorted_with_metadata(self, tmp_path):
        meta = metadata({"seed": 1}, seed=1, omega=0.5)
        path = write_json(tmp_path / "out" / "summary.json", {"z": 1, "a": [0.1]}, meta)
        text = path.read_text(encoding="utf-8")
        assert text == canonical_json({"metadata": meta, "z": 1, "a": [0.1]}) + "\n"
        loaded = json.loads(text)
        assert loaded["metadata"]["omega"] == 0.5
        assert list(loaded) == ["a", "metadata", "z"]

    def test_csv_metadata_line(self, tmp_path):
        frame = pd.DataFrame({"z": [0.1, 0.2], "mean": [1 / 3, 2 / 3]})
        path = write_csv(tmp_path / "curve.csv", frame, {"seed": 3})
        first = path.read_text(encoding="utf-8").splitlines()[0]
        assert first == '# metadata {"seed": 3}'
        back = read_csv(path)
        # 17 significant digits reproduce the floats exactly
        assert back["mean"].tolist() == [1 / 3, 2 / 3]
