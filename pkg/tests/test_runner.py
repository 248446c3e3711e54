import pytest

from sketchlab.core.config import RunConfig
from sketchlab.core.errors import ConvergenceError
from sketchlab.experiment import runner, storage
from sketchlab.lowrank.train import TrainMode


@pytest.fixture
def run_config(tmp_path):
    config = RunConfig.model_validate(
        {
            "dataset": {"n": 12, "d": 6, "k_true": 2, "count": 10, "split_train": 6, "trials": 2, "master_seed": 3},
            "train": {"m": 4, "k": 2, "s_values": [1, 2], "iterations": 10, "log_every": 5},
            "output_dir": str(tmp_path),
            "jobs": 1,
        }
    )
    storage.write_dataset(tmp_path, config.dataset.to_params())
    return config


def test_plan_has_one_dense_run_per_trial(run_config):
    ids = [spec.run_id for spec in runner.plan_runs(run_config)]
    assert ids[:2] == ["fix_s1_t000", "fix_s1_t001"]
    assert [i for i in ids if i.startswith("dense")] == ["dense_s4_t000", "dense_s4_t001"]
    assert len(ids) == 10


def test_failing_run_does_not_stop_the_others(run_config, monkeypatch, tmp_path):
    real_train = runner.train

    def train_with_one_failure(train_set, m, config):
        if config.mode is TrainMode.LEARN and config.s == 2:
            raise ConvergenceError("Jacobi nie zbiegł")
        return real_train(train_set, m, config)

    monkeypatch.setattr(runner, "train", train_with_one_failure)
    results = runner.run_all(run_config)

    assert len(results) == 10
    failed = {r["run_id"]: r for r in results if r["status"] == "failed"}
    assert set(failed) == {"learn_s2_t000", "learn_s2_t001"}
    assert all(r["exit_code"] == ConvergenceError.exit_code for r in failed.values())
    assert all("ConvergenceError" in r["error"] for r in failed.values())
    assert storage.RunManifest(tmp_path).completed() == {r["run_id"] for r in results} - set(failed)
    assert (runner.run_dir(tmp_path, runner.RunSpec(TrainMode.DENSE, 4, 1)) / "trace.csv").exists()
    rows = storage.read_csv(tmp_path / "timings.csv", runner.TIMINGS_FIELDS)
    assert [r["status"] for r in rows].count("failed") == 2


def test_missing_dataset_fails_the_run_instead_of_raising(tmp_path):
    config = RunConfig.model_validate(
        {"train": {"m": 4, "k": 2, "s_values": [1], "iterations": 5}, "output_dir": str(tmp_path / "pusty")}
    )
    record = runner.execute_run(tmp_path / "pusty", config, runner.RunSpec(TrainMode.FIX, 1, 0))
    assert record["status"] == "failed"
    assert record["exit_code"] == 4
    assert "StorageError" in record["error"]
