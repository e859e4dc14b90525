"""Weight files: bit-exact round trips, checksums, version and kind guards."""

import json

import numpy as np
import pytest

from testscope.baselines import LogisticModel
from testscope.config import StateConfig, TrainConfig
from testscope.network import mlp_forward, mlp_init
from testscope.persist import (
    KIND_LOGISTIC,
    KIND_QNETWORK,
    WeightFileError,
    load_policy,
    save_policy,
)


@pytest.fixture
def trained_net():
    net = mlp_init((16, 8), seed=9)
    # perturb away from init so round trips exercise arbitrary values
    rng = np.random.default_rng(1)
    for p in net.params:
        p += rng.normal(scale=0.3, size=p.shape)
    return net


class TestQNetworkFiles:
    def test_round_trip_bit_exact(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net, TrainConfig())
        loaded = load_policy(path, expect_kind=KIND_QNETWORK)
        for a, b in zip(trained_net.params, loaded.params):
            np.testing.assert_array_equal(a, b)

    def test_identical_q_values_after_reload(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net)
        loaded = load_policy(path)
        states = np.random.default_rng(3).random((1000, 10))
        np.testing.assert_array_equal(
            mlp_forward(trained_net, states), mlp_forward(loaded, states)
        )

    def test_save_is_deterministic(self, tmp_path, trained_net):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_policy(a, trained_net, TrainConfig())
        save_policy(b, trained_net, TrainConfig())
        assert a.read_bytes() == b.read_bytes()

    def test_train_snapshot_embedded(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net, TrainConfig(escape_penalty=7.0, seed=3))
        document = json.loads(path.read_text())
        snap = document["train_config"]
        assert snap["beta"] == 7.0
        assert snap["seed"] == 3
        assert snap["gamma"] == 0.99
        assert snap["episodes"] == 2000
        assert document["byte_order"] == "little"
        assert document["format_version"] == 1


class TestLogisticFiles:
    def test_round_trip(self, tmp_path):
        model = LogisticModel(
            weights=np.array([0.5, -1.25, 3.0, 0.0, 2.5e-17]),
            bias=-2.75,
            state_cfg=StateConfig(diff_cap=300, files_cap=10),
        )
        path = tmp_path / "clf.json"
        save_policy(path, model)
        loaded = load_policy(path, expect_kind=KIND_LOGISTIC)
        np.testing.assert_array_equal(loaded.weights, model.weights)
        assert loaded.bias == model.bias
        assert loaded.feature_names == model.feature_names
        assert loaded.state_cfg.diff_cap == 300
        assert loaded.state_cfg.files_cap == 10


class TestGuards:
    def test_kind_mismatch(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net)
        with pytest.raises(WeightFileError, match="expected 'logistic'"):
            load_policy(path, expect_kind=KIND_LOGISTIC)

    def test_corrupted_payload_fails_checksum(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net)
        document = json.loads(path.read_text())
        entry = document["arrays"]["w0"]
        clean = np.zeros(tuple(entry["shape"]))
        import base64

        entry["data"] = base64.b64encode(clean.astype("<f8").tobytes()).decode()
        path.write_text(json.dumps(document))
        with pytest.raises(WeightFileError, match="checksum mismatch"):
            load_policy(path)

    def test_truncated_file(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net)
        path.write_text(path.read_text()[:-120])
        with pytest.raises(WeightFileError, match="not a valid weight file"):
            load_policy(path)

    def test_version_mismatch(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net)
        document = json.loads(path.read_text())
        document["format_version"] = 99
        path.write_text(json.dumps(document))
        with pytest.raises(WeightFileError, match="format version"):
            load_policy(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(WeightFileError, match="cannot read"):
            load_policy(tmp_path / "ghost.json")

    def test_unsupported_model_type(self, tmp_path):
        with pytest.raises(TypeError):
            save_policy(tmp_path / "x.json", object())

    def test_wrong_array_length(self, tmp_path, trained_net):
        path = tmp_path / "agent.json"
        save_policy(path, trained_net)
        document = json.loads(path.read_text())
        document["arrays"]["w0"]["shape"] = [1, 1]
        path.write_text(json.dumps(document))
        with pytest.raises(WeightFileError):
            load_policy(path)
