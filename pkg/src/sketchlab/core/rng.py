"""Strumienie liczb losowych oparte na liczniku (Philox).

Każdy strumień to ``SeedSequence(entropy=seed, spawn_key=(strumień, *indeks))``
podany do generatora Philox, więc wyniki nie zależą od platformy ani od
kolejności, w jakiej procesy robocze pobierają zadania.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Nazwane strumienie losowości."""

    SIGNAL = 0
    """A_true (raz na zbiór danych albo raz na próbę)."""
    NOISE = 1
    """Szum A_noise, indeksowany ziarnem instancji."""
    SPLIT = 2
    """Permutacja podziału trening/test, indeksowana numerem próby."""
    TRAINER = 3
    """Losowanie instancji w pętli SGD/IHT."""
    SKETCH_INIT = 4
    """Losowa inicjalizacja rzadkiej macierzy szkicującej."""
    SUITE = 5
    """Zestawy wejść dla audytu GJ."""
    RUN_SEED = 6
    """Wyprowadzanie ziaren pojedynczych przebiegów treningu."""


def generator(seed: int, stream: Stream, *index: int) -> np.random.Generator:
    """Zwraca deterministyczny generator Philox dla danego strumienia."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), *map(int, index)))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, stream: Stream, *index: int) -> int:
    """Wyprowadza 63-bitowe ziarno podrzędne (np. ziarno przebiegu z ziarna głównego)."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), *map(int, index)))
    return int(seq.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))
