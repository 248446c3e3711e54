"""Konfiguracja przebiegów: plik JSON + nadpisania ``--set klucz=wartość``, walidacja pydantic."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from sketchlab.core.errors import ConfigError
from sketchlab.lowrank.data import DatasetParams
from sketchlab.lowrank.train import TrainConfig, TrainMode


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DatasetSection(_Section):
    n: int = Field(100, ge=1)
    d: int = Field(50, ge=1)
    k_true: int = Field(5, ge=1)
    noise_scale: float = Field(0.1, ge=0.0)
    count: int = Field(300, ge=2)
    split_train: int = Field(200, ge=1)
    trials: int = Field(30, ge=1)
    master_seed: int = Field(0, ge=0)
    resample_signal: bool = False

    @model_validator(mode="after")
    def _check(self) -> "DatasetSection":
        if not self.k_true <= self.d <= self.n:
            raise ValueError(f"wymagane k_true ≤ d ≤ n, otrzymano {self.k_true}, {self.d}, {self.n}")
        if self.split_train >= self.count:
            raise ValueError(f"split_train ({self.split_train}) musi być < count ({self.count})")
        return self

    def to_params(self) -> DatasetParams:
        return DatasetParams(**self.model_dump())


class TrainSection(_Section):
    methods: list[TrainMode] = Field(default_factory=lambda: [TrainMode.FIX, TrainMode.LEARN, TrainMode.DENSE])
    s_values: list[int] = Field(default_factory=lambda: [1, 3, 5], min_length=1)
    m: int = Field(10, ge=1)
    k: int = Field(5, ge=1)
    eta: float = Field(0.1, gt=0.0)
    iterations: int = Field(3000, ge=1)
    divergence_limit: float = Field(1e3, gt=0.0)
    log_every: int = Field(50, ge=0)
    sampled_scw_every: int = Field(1, ge=0)

    @model_validator(mode="after")
    def _check(self) -> "TrainSection":
        if not self.methods:
            raise ValueError("lista methods jest pusta")
        if self.k > self.m:
            raise ValueError(f"k ({self.k}) musi być ≤ m ({self.m})")
        bad = [s for s in self.s_values if not 1 <= s <= self.m]
        if bad:
            raise ValueError(f"wartości s spoza [1, m={self.m}]: {bad}")
        return self

    def config_for(self, mode: TrainMode, s: int, seed: int) -> TrainConfig:
        return TrainConfig(
            mode=mode,
            s=s,
            eta=self.eta,
            iterations=self.iterations,
            seed=seed,
            k=self.k,
            divergence_limit=self.divergence_limit,
            log_every=self.log_every,
            sampled_scw_every=self.sampled_scw_every,
        )


class AuditSection(_Section):
    m_min: int = Field(1, ge=1)
    m_max: int = Field(6, ge=1)
    extra_cols: int = Field(2, ge=0)
    """Liczba kolumn macierzy audytowanych to m + extra_cols."""
    per_rank: int = Field(2, ge=1)
    seed: int = Field(0, ge=0)
    algorithms: list[str] = Field(default_factory=lambda: ["decell", "greedy"])

    @model_validator(mode="after")
    def _check(self) -> "AuditSection":
        if self.m_min > self.m_max:
            raise ValueError(f"m_min ({self.m_min}) musi być ≤ m_max ({self.m_max})")
        unknown = sorted(set(self.algorithms) - {"decell", "greedy"})
        if unknown:
            raise ValueError(f"nieznane algorytmy audytu: {unknown}")
        return self


class RunConfig(_Section):
    """Pełna konfiguracja eksperymentu; nieznane pola są odrzucane."""

    dataset: DatasetSection = Field(default_factory=DatasetSection)
    train: TrainSection = Field(default_factory=TrainSection)
    audit: AuditSection = Field(default_factory=AuditSection)
    output_dir: Path = Path("out")
    plot: bool = True
    resume: bool = False
    jobs: int = Field(1, ge=1)
    verbose: bool = False

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.train.m > self.dataset.n:
            raise ValueError(f"m ({self.train.m}) musi być ≤ n ({self.dataset.n})")
        if self.train.k > self.dataset.d:
            raise ValueError(f"k ({self.train.k}) musi być ≤ d ({self.dataset.d})")
        return self


# ── Ładowanie ─────────────────────────────────────────────


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(payload: dict[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    """Nakłada ``a.b.c=wartość`` na słownik konfiguracji (wartość jako JSON albo tekst)."""
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Nadpisanie musi mieć postać klucz=wartość, otrzymano {item!r}")
        node = payload
        *parents, leaf = key.strip().split(".")
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Klucz {part!r} w {key!r} nie jest sekcją")
            node = child
        node[leaf] = _parse_value(raw)
    return payload


def load_config(
    path: Path | None = None,
    overrides: Sequence[str] = (),
    **cli_values: Any,
) -> RunConfig:
    """Wczytuje i waliduje konfigurację; pola podane wprost (np. ``jobs``, ``output_dir``) wygrywają."""
    payload: dict[str, Any] = {}
    if path is not None:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"Plik konfiguracji nie istnieje: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: niepoprawny JSON ({e})") from e
        if not isinstance(payload, dict):
            raise ConfigError(f"{path}: korzeń konfiguracji musi być obiektem JSON")
    payload = apply_overrides(payload, overrides)
    payload.update({k: v for k, v in cli_values.items() if v is not None})
    try:
        config = RunConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"Niepoprawna konfiguracja: {e}") from e
    logger.debug(f"Konfiguracja: {config.model_dump_json()}")
    return config
