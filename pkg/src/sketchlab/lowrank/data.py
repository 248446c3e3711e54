"""Syntetyczne instancje A = A_true + noise_scale·A_noise, zbiory danych i podziały trening/test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from loguru import logger

from sketchlab.core.errors import ParameterError
from sketchlab.core.rng import Stream, generator
from sketchlab.lowrank.linalg import DenseMatrix

MAX_REGENERATIONS = 16


@dataclass(frozen=True)
class DatasetParams:
    """Parametry generowania zbioru danych (domyślnie: eksperyment syntetyczny)."""

    n: int = 100
    d: int = 50
    k_true: int = 5
    noise_scale: float = 0.1
    count: int = 300
    split_train: int = 200
    trials: int = 30
    master_seed: int = 0
    resample_signal: bool = False
    """Gdy True, A_true jest losowane osobno dla każdej próby."""

    def __post_init__(self) -> None:
        if not 1 <= self.k_true <= self.d <= self.n:
            raise ParameterError(
                f"Wymagane 1 ≤ k_true ≤ d ≤ n, otrzymano k_true={self.k_true}, d={self.d}, n={self.n}"
            )
        if self.noise_scale < 0:
            raise ParameterError(f"noise_scale musi być ≥ 0, otrzymano {self.noise_scale}")
        if not 1 <= self.split_train < self.count:
            raise ParameterError(
                f"Wymagane 1 ≤ split_train < count, otrzymano {self.split_train} i {self.count}"
            )
        if self.trials < 1:
            raise ParameterError(f"trials musi być ≥ 1, otrzymano {self.trials}")

    @property
    def split_test(self) -> int:
        return self.count - self.split_train

    def signal_trial(self, trial_index: int) -> int:
        """Indeks próby, z którego pochodzi A_true (0, gdy sygnał jest wspólny)."""
        return trial_index if self.resample_signal else 0

    def instance_seed(self, trial_index: int, position: int) -> int:
        """Ziarno szumu instancji; przy wspólnym sygnale nie zależy od próby."""
        return self.signal_trial(trial_index) * self.count + position


def gen_signal(params: DatasetParams, trial_index: int = 0) -> DenseMatrix:
    """A_true = (n×k_true)·(k_true×d), elementy z U[0, 1]."""
    rng = generator(params.master_seed, Stream.SIGNAL, params.signal_trial(trial_index))
    left = rng.uniform(0.0, 1.0, size=(params.n, params.k_true))
    right = rng.uniform(0.0, 1.0, size=(params.k_true, params.d))
    return left @ right


def gen_instance(params: DatasetParams, instance_seed: int, signal: DenseMatrix | None = None) -> DenseMatrix:
    """Jedna znormalizowana instancja; zerowa macierz (zdarzenie miary zero) → kolejne ziarno."""
    if signal is None:
        signal = gen_signal(params)
    for attempt in range(MAX_REGENERATIONS):
        seed = instance_seed + attempt
        noise = generator(params.master_seed, Stream.NOISE, seed).standard_normal((params.n, params.d))
        A = signal + params.noise_scale * noise
        norm = float(np.linalg.norm(A))
        if norm > 0.0:
            return A / norm
        logger.warning(f"Instancja z ziarnem {seed} jest zerowa, losuję ponownie z ziarnem {seed + 1}")
    raise ParameterError(f"Nie udało się wygenerować niezerowej instancji od ziarna {instance_seed}")


def gen_dataset(params: DatasetParams, trial_index: int = 0) -> list[DenseMatrix]:
    """``count`` instancji ze wspólnym A_true i niezależnym szumem."""
    signal = gen_signal(params, trial_index)
    dataset = [
        gen_instance(params, params.instance_seed(trial_index, i), signal) for i in range(params.count)
    ]
    logger.debug(f"Wygenerowano {len(dataset)} instancji {params.n}×{params.d} (próba {trial_index})")
    return dataset


def split_indices(params: DatasetParams, trial_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Permutacja z (master_seed, trial_index): pierwsze split_train indeksów to trening."""
    if not 0 <= trial_index < params.trials:
        raise ParameterError(f"trial_index musi leżeć w [0, {params.trials}), otrzymano {trial_index}")
    perm = generator(params.master_seed, Stream.SPLIT, trial_index).permutation(params.count)
    return np.sort(perm[: params.split_train]), np.sort(perm[params.split_train :])


def split(dataset: list[DenseMatrix], params: DatasetParams, trial_index: int):
    """Rozłączny podział zbioru na (trening, test)."""
    if len(dataset) != params.count:
        raise ParameterError(f"Zbiór ma {len(dataset)} instancji, oczekiwano {params.count}")
    train_idx, test_idx = split_indices(params, trial_index)
    return [dataset[i] for i in train_idx], [dataset[i] for i in test_idx]
