import json

import pytest

from sketchlab.core.config import RunConfig, apply_overrides, load_config
from sketchlab.core.errors import ConfigError
from sketchlab.lowrank.train import TrainMode


def test_defaults_match_the_synthetic_experiment():
    config = load_config()
    assert (config.dataset.n, config.dataset.d, config.dataset.k_true) == (100, 50, 5)
    assert (config.dataset.count, config.dataset.split_train, config.dataset.trials) == (300, 200, 30)
    assert (config.train.m, config.train.k, config.train.eta, config.train.iterations) == (10, 5, 0.1, 3000)
    assert config.train.methods == [TrainMode.FIX, TrainMode.LEARN, TrainMode.DENSE]
    assert config.train.s_values == [1, 3, 5]


def test_file_then_overrides_then_cli_values(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"train": {"iterations": 10, "m": 4, "k": 2}, "jobs": 2}), encoding="utf-8")
    config = load_config(path, ["train.eta=0.05", "train.s_values=[1,2]", "output_dir=wyniki"], jobs=3)
    assert config.train.iterations == 10
    assert config.train.eta == 0.05
    assert config.train.s_values == [1, 2]
    assert str(config.output_dir) == "wyniki"
    assert config.jobs == 3


def test_none_cli_values_keep_file_values(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"jobs": 2}), encoding="utf-8")
    assert load_config(path, jobs=None, output_dir=None).jobs == 2


@pytest.mark.parametrize(
    "overrides",
    [
        ["train.unknown=1"],
        ["train.iterations=0"],
        ["train.k=11"],
        ["train.s_values=[0]"],
        ["train.methods=[\"sparse\"]"],
        ["dataset.split_train=300"],
        ["train.m=200"],
        ["audit.algorithms=[\"svd\"]"],
        ["jobs=0"],
    ],
)
def test_invalid_values_are_rejected(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_bad_override_syntax():
    with pytest.raises(ConfigError):
        apply_overrides({}, ["train.iterations"])
    with pytest.raises(ConfigError):
        apply_overrides({"train": 5}, ["train.m=3"])


def test_override_values_parse_as_json_or_text():
    payload = apply_overrides({}, ["a.b=3", "a.c=true", "d=tekst"])
    assert payload == {"a": {"b": 3, "c": True}, "d": "tekst"}


def test_bad_config_files(tmp_path):
    with pytest.raises(ConfigError, match="nie istnieje"):
        load_config(tmp_path / "brak.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(broken)
    listed = tmp_path / "list.json"
    listed.write_text("[]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(listed)


def test_train_section_builds_train_config():
    config = RunConfig.model_validate({"train": {"m": 4, "k": 2, "iterations": 7}})
    train_config = config.train.config_for(TrainMode.LEARN, 2, seed=11)
    assert (train_config.mode, train_config.s, train_config.seed, train_config.iterations) == (
        TrainMode.LEARN,
        2,
        11,
        7,
    )
