"""Formaty plików eksperymentu.

- instancja: nagłówek 16 B ``<8sII`` (magic, n, d), potem float64 little-endian wierszami,
- zbiór danych: katalog instancji + ``manifest.json`` z parametrami i ziarnami,
- szkic: format tekstowy z ``sketchlab.lowrank.sketch``,
- przebieg treningu: CSV (iteration, surrogate_loss, scw_loss_sampled?, scw_loss_train_mean?),
- manifest przebiegów: ``runs.jsonl``, tylko dopisywanie.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import asdict
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from loguru import logger

from sketchlab.core.errors import StorageError
from sketchlab.lowrank import sketch as sk
from sketchlab.lowrank.data import DatasetParams, gen_dataset
from sketchlab.lowrank.linalg import DenseMatrix
from sketchlab.lowrank.train import TrainRecord, TrainTrace

MAGIC = b"SKLABMAT"
HEADER = struct.Struct("<8sII")

TRACE_FIELDS = ["iteration", "surrogate_loss", "scw_loss_sampled", "scw_loss_train_mean"]
MANIFEST_NAME = "manifest.json"
RUNS_MANIFEST = "runs.jsonl"


# ── Macierze ──────────────────────────────────────────────


def write_instance(path: Path, A: DenseMatrix) -> None:
    n, d = A.shape
    payload = HEADER.pack(MAGIC, n, d) + np.ascontiguousarray(A, dtype="<f8").tobytes()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as e:
        raise StorageError(f"Nie można zapisać instancji {path}: {e}") from e


def read_instance(path: Path) -> DenseMatrix:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise StorageError(f"Nie można odczytać instancji {path}: {e}") from e
    if len(raw) < HEADER.size:
        raise StorageError(f"{path}: plik krótszy niż nagłówek")
    magic, n, d = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise StorageError(f"{path}: nieznany nagłówek {magic!r}")
    expected = HEADER.size + 8 * n * d
    if len(raw) != expected:
        raise StorageError(f"{path}: oczekiwano {expected} bajtów, jest {len(raw)}")
    return np.frombuffer(raw, dtype="<f8", offset=HEADER.size).reshape(n, d).astype(np.float64)


# ── Zbiór danych ──────────────────────────────────────────


def dataset_dir(root: Path, params: DatasetParams, trial_index: int) -> Path:
    """Katalog zbioru; przy ponownym losowaniu sygnału osobny dla każdej próby."""
    base = root / "dataset"
    return base / f"trial_{trial_index:03d}" if params.resample_signal else base


def instance_name(position: int) -> str:
    return f"instance_{position:04d}.bin"


def write_dataset(root: Path, params: DatasetParams) -> list[Path]:
    """Generuje i zapisuje zbiór(y) danych; zwraca ścieżki manifestów."""
    trials = range(params.trials) if params.resample_signal else range(1)
    manifests = []
    for trial in trials:
        directory = dataset_dir(root, params, trial)
        dataset = gen_dataset(params, trial)
        for position, A in enumerate(dataset):
            write_instance(directory / instance_name(position), A)
        manifest = {
            "params": asdict(params),
            "trial": trial if params.resample_signal else None,
            "instances": [
                {"file": instance_name(i), "seed": params.instance_seed(trial, i)} for i in range(params.count)
            ],
        }
        write_json(directory / MANIFEST_NAME, manifest)
        manifests.append(directory / MANIFEST_NAME)
        logger.info(f"Zapisano {params.count} instancji w {directory}")
    return manifests


def load_dataset(root: Path, params: DatasetParams, trial_index: int = 0) -> list[DenseMatrix]:
    directory = dataset_dir(root, params, trial_index)
    manifest = read_json(directory / MANIFEST_NAME)
    if manifest.get("params") != asdict(params):
        raise StorageError(
            f"{directory / MANIFEST_NAME}: parametry zbioru różnią się od konfiguracji, wygeneruj dane ponownie"
        )
    return [read_instance(directory / entry["file"]) for entry in manifest["instances"]]


# ── JSON / CSV ────────────────────────────────────────────


def write_json(path: Path, obj: Any) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Nie można zapisać {path}: {e}") from e


def read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise StorageError(f"Brak pliku {path}") from e
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"Nie można odczytać {path}: {e}") from e


def format_cell(value: Any) -> str:
    """Najkrótszy zapis dziesiętny, który odtwarza float bit w bit; None → pusta komórka."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, fieldnames: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({k: format_cell(row.get(k)) for k in fieldnames})
    except OSError as e:
        raise StorageError(f"Nie można zapisać {path}: {e}") from e


def read_csv(path: Path, fieldnames: Sequence[str]) -> list[dict[str, str]]:
    """Wiersze CSV jako słowniki; nagłówek musi zawierać wszystkie wymagane kolumny."""
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            missing = [name for name in fieldnames if name not in (reader.fieldnames or [])]
            if missing:
                raise StorageError(f"{path}: brak kolumn {missing}")
            return list(reader)
    except FileNotFoundError as e:
        raise StorageError(f"Brak pliku {path}") from e
    except OSError as e:
        raise StorageError(f"Nie można odczytać {path}: {e}") from e


# ── Szkice i przebiegi ────────────────────────────────────


def write_sketch(path: Path, S: sk.SparseSketch) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(sk.dumps(S), encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Nie można zapisać szkicu {path}: {e}") from e


def read_sketch(path: Path) -> sk.SparseSketch:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Nie można odczytać szkicu {path}: {e}") from e
    return sk.loads(text, str(path))


def write_trace(path: Path, trace: TrainTrace) -> None:
    write_csv(path, TRACE_FIELDS, (asdict(r) for r in trace.records))


def read_trace(path: Path) -> list[TrainRecord]:
    rows = read_csv(path, TRACE_FIELDS)
    records = []
    for lineno, row in enumerate(rows, start=2):
        try:
            mean, sampled = row["scw_loss_train_mean"], row["scw_loss_sampled"]
            records.append(
                TrainRecord(
                    iteration=int(row["iteration"]),
                    surrogate_loss=float(row["surrogate_loss"]),
                    scw_loss_sampled=float(sampled) if sampled else None,
                    scw_loss_train_mean=float(mean) if mean else None,
                    max_column_nnz=0,
                )
            )
        except (TypeError, ValueError) as e:
            raise StorageError(f"{path}, wiersz {lineno}: {e}") from e
    return records


class RunManifest:
    """Manifest przebiegów dopisywany linia po linii; pisze tylko proces nadrzędny."""

    def __init__(self, root: Path) -> None:
        self.path = root / RUNS_MANIFEST

    def append(self, record: dict[str, Any]) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as f:
                f.write(json.dumps(record, sort_keys=True) + "\n")
        except OSError as e:
            raise StorageError(f"Nie można dopisać do {self.path}: {e}") from e

    def latest(self) -> dict[str, dict[str, Any]]:
        """Ostatni wpis dla każdego run_id."""
        if not self.path.exists():
            return {}
        out: dict[str, dict[str, Any]] = {}
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise StorageError(f"Nie można odczytać {self.path}: {e}") from e
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise StorageError(f"{self.path}, linia {lineno}: {e}") from e
            out[record["run_id"]] = record
        return out

    def completed(self) -> set[str]:
        return {run_id for run_id, rec in self.latest().items() if rec.get("status") == "done"}
