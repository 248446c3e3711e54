"""Planowanie i wykonywanie przebiegów treningu (metoda × s × próba)."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator

from loguru import logger

from sketchlab.core.config import RunConfig
from sketchlab.core.errors import SketchLabError
from sketchlab.core.rng import Stream, derive_seed
from sketchlab.experiment import storage
from sketchlab.lowrank.data import DatasetParams, split
from sketchlab.lowrank.linalg import DenseMatrix
from sketchlab.lowrank.train import TrainMode, train

RUNS_DIR = "runs"
TIMINGS_FIELDS = ["run_id", "method", "s", "trial", "status", "elapsed_seconds"]


@dataclass(frozen=True)
class RunSpec:
    method: TrainMode
    s: int
    """Budżet niezer na kolumnę; dla dense równy m."""
    trial: int

    @property
    def run_id(self) -> str:
        return f"{self.method.value}_s{self.s}_t{self.trial:03d}"

    def seed(self, master_seed: int) -> int:
        """Fix i learn z tym samym (s, próba) dostają to samo ziarno: ten sam start i te same próbki."""
        return derive_seed(master_seed, Stream.RUN_SEED, self.s, self.trial)


def run_dir(root: Path, spec: RunSpec) -> Path:
    return root / RUNS_DIR / spec.run_id


def plan_runs(config: RunConfig) -> list[RunSpec]:
    """Wszystkie przebiegi w ustalonej kolejności; dense występuje raz na próbę."""
    specs = []
    for method in config.train.methods:
        budgets = [config.train.m] if method is TrainMode.DENSE else config.train.s_values
        for s in budgets:
            specs.extend(RunSpec(method, s, trial) for trial in range(config.dataset.trials))
    return specs


@lru_cache(maxsize=4)
def _cached_split(root: str, params: DatasetParams, trial: int) -> tuple[list[DenseMatrix], list[DenseMatrix]]:
    dataset = storage.load_dataset(Path(root), params, trial)
    return split(dataset, params, trial)


def load_split(root: Path, params: DatasetParams, trial: int) -> tuple[list[DenseMatrix], list[DenseMatrix]]:
    """(trening, test) dla próby; zbiory z dysku są buforowane w procesie."""
    return _cached_split(str(root), params, trial)


def execute_run(root: Path, config: RunConfig, spec: RunSpec) -> dict:
    """Jeden przebieg: trening, zapis CSV i szkicu; zwraca wpis manifestu.

    Błąd biblioteki kończy tylko ten przebieg: wpis dostaje status ``failed``
    i kod wyjścia wyjątku, a pozostałe przebiegi planu idą dalej.
    """
    params = config.dataset.to_params()
    seed = spec.seed(params.master_seed)
    record = {"run_id": spec.run_id, "method": spec.method.value, "s": spec.s, "trial": spec.trial, "seed": seed}
    try:
        train_set, _ = load_split(root, params, spec.trial)
        trace = train(train_set, config.train.m, config.train.config_for(spec.method, spec.s, seed))
        directory = run_dir(root, spec)
        storage.write_trace(directory / "trace.csv", trace)
        storage.write_sketch(directory / "sketch.txt", trace.final_sketch)
    except SketchLabError as e:
        logger.error(f"Przebieg {spec.run_id} nieudany ({type(e).__name__}): {e}")
        return {
            **record,
            "status": "failed",
            "error": f"{type(e).__name__}: {e}",
            "exit_code": e.exit_code,
            "elapsed_seconds": None,
        }
    logger.info(f"Przebieg {spec.run_id}: L̃ = {trace.final.surrogate_loss:.4g}, {trace.elapsed_seconds:.1f} s")
    return {**record, "status": "done", "error": None, "elapsed_seconds": trace.elapsed_seconds}


def _execute_all(root: Path, config: RunConfig, specs: list[RunSpec]) -> Iterator[dict]:
    if config.jobs == 1 or len(specs) <= 1:
        for spec in specs:
            yield execute_run(root, config, spec)
        return
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        # map zwraca wyniki w kolejności planu
        yield from pool.map(execute_run, [root] * len(specs), [config] * len(specs), specs)


def run_all(config: RunConfig) -> list[dict]:
    """Wykonuje zaplanowane przebiegi; przy ``resume`` pomija ukończone według manifestu."""
    root = Path(config.output_dir)
    manifest = storage.RunManifest(root)
    specs = plan_runs(config)
    if config.resume:
        done = manifest.completed()
        skipped = [s for s in specs if s.run_id in done]
        specs = [s for s in specs if s.run_id not in done]
        if skipped:
            logger.info(f"Pomijam {len(skipped)} ukończonych przebiegów")
    logger.info(f"Uruchamiam {len(specs)} przebiegów (jobs = {config.jobs})")

    results = []
    for record in _execute_all(root, config, specs):
        manifest.append(record)
        results.append(record)

    latest = manifest.latest()
    storage.write_csv(root / "timings.csv", TIMINGS_FIELDS, (latest[k] for k in sorted(latest)))
    return results
