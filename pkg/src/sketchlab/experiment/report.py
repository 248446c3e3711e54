"""Ewaluacja wytrenowanych szkiców i raport eksperymentu (wiersze per próba, agregaty, krzywe)."""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from loguru import logger

from sketchlab.core.config import RunConfig
from sketchlab.core.errors import StorageError
from sketchlab.experiment import storage
from sketchlab.experiment.runner import RunSpec, load_split, plan_runs, run_dir
from sketchlab.lowrank import sketch as sk
from sketchlab.lowrank.linalg import tail_energy
from sketchlab.lowrank.scw import scw_loss
from sketchlab.lowrank.train import InstanceFactors

METRICS = ("train_surrogate", "train_scw", "test_scw", "test_optimal")
CURVE_KINDS = {"surrogate": "surrogate_loss", "scw": "scw_loss_train_mean"}
METHOD_ORDER = ("fix", "learn", "dense")


@dataclass(frozen=True)
class ReportRow:
    method: str
    s: int
    trial: int
    train_surrogate: float
    train_scw: float
    test_scw: float
    test_optimal: float


@dataclass(frozen=True)
class SummaryRow:
    method: str
    s: int
    metric: str
    mean: float
    std: float
    count: int


@dataclass(frozen=True)
class GapRow:
    """Różnica learn − fix w parach prób o tym samym ziarnie."""

    s: int
    metric: str
    mean_gap: float
    std_gap: float
    stderr: float
    count: int


@dataclass(frozen=True)
class CurvePoint:
    method: str
    s: int
    kind: str
    iteration: int
    mean: float
    std: float
    count: int


REPORT_FIELDS = [f.name for f in fields(ReportRow)]
SUMMARY_FIELDS = [f.name for f in fields(SummaryRow)]
GAP_FIELDS = [f.name for f in fields(GapRow)]
CURVE_FIELDS = [f.name for f in fields(CurvePoint)]


def _sort_key(method: str, s: int) -> tuple[int, int]:
    rank = METHOD_ORDER.index(method) if method in METHOD_ORDER else len(METHOD_ORDER)
    return rank, s


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(np.mean(arr)), std


# ── Agregaty ──────────────────────────────────────────────


def aggregate(rows: Iterable[ReportRow]) -> list[SummaryRow]:
    """Średnia i odchylenie standardowe (ddof=1) po próbach dla każdej pary (metoda, s)."""
    groups: dict[tuple[str, int], list[ReportRow]] = defaultdict(list)
    for row in rows:
        groups[(row.method, row.s)].append(row)
    out = []
    for method, s in sorted(groups, key=lambda key: _sort_key(*key)):
        group = sorted(groups[(method, s)], key=lambda r: r.trial)
        for metric in METRICS:
            mean, std = _mean_std([getattr(r, metric) for r in group])
            out.append(SummaryRow(method, s, metric, mean, std, len(group)))
    return out


def learn_fix_gaps(rows: Iterable[ReportRow]) -> list[GapRow]:
    """Sparowana różnica learn − fix; błąd standardowy = std/√liczba_par."""
    by_key = {(r.method, r.s, r.trial): r for r in rows}
    budgets = sorted({s for method, s, _ in by_key if method == "learn"})
    out = []
    for s in budgets:
        trials = sorted(t for method, b, t in by_key if method == "learn" and b == s and ("fix", s, t) in by_key)
        if not trials:
            continue
        for metric in ("train_surrogate", "train_scw", "test_scw"):
            diffs = [getattr(by_key[("learn", s, t)], metric) - getattr(by_key[("fix", s, t)], metric) for t in trials]
            mean, std = _mean_std(diffs)
            out.append(GapRow(s, metric, mean, std, std / np.sqrt(len(diffs)), len(diffs)))
    return out


def curves_from_traces(root: Path, specs: Iterable[RunSpec]) -> list[CurvePoint]:
    """Krzywe uczenia: średnia i std po próbach dla każdej iteracji i rodzaju straty."""
    series: dict[tuple[str, int, str], dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for spec in specs:
        for record in storage.read_trace(run_dir(root, spec) / "trace.csv"):
            for kind, attr in CURVE_KINDS.items():
                value = getattr(record, attr)
                if value is not None:
                    series[(spec.method.value, spec.s, kind)][record.iteration].append(value)
    points = []
    for method, s, kind in sorted(series, key=lambda key: (*_sort_key(key[0], key[1]), key[2])):
        for iteration, values in sorted(series[(method, s, kind)].items()):
            mean, std = _mean_std(values)
            points.append(CurvePoint(method, s, kind, iteration, mean, std, len(values)))
    return points


# ── Raport ────────────────────────────────────────────────


@dataclass
class ExperimentReport:
    rows: list[ReportRow]
    curves: list[CurvePoint] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)

    @property
    def summary(self) -> list[SummaryRow]:
        return aggregate(self.rows)

    @property
    def gaps(self) -> list[GapRow]:
        return learn_fix_gaps(self.rows)

    def write(self, root: Path) -> None:
        storage.write_csv(root / "report.csv", REPORT_FIELDS, (asdict(r) for r in self.rows))
        storage.write_csv(root / "summary.csv", SUMMARY_FIELDS, (asdict(r) for r in self.summary))
        storage.write_csv(root / "gap.csv", GAP_FIELDS, (asdict(r) for r in self.gaps))
        storage.write_csv(root / "curves.csv", CURVE_FIELDS, (asdict(p) for p in self.curves))

    @classmethod
    def read(cls, root: Path) -> "ExperimentReport":
        rows = [_parse(ReportRow, row, root / "report.csv", i) for i, row in _rows(root / "report.csv", REPORT_FIELDS)]
        curves_path = root / "curves.csv"
        curves = []
        if curves_path.exists():
            curves = [_parse(CurvePoint, row, curves_path, i) for i, row in _rows(curves_path, CURVE_FIELDS)]
        return cls(rows=rows, curves=curves)


def _rows(path: Path, names: Sequence[str]):
    return enumerate(storage.read_csv(path, names), start=2)


def _parse(kind, row: dict[str, str], path: Path, lineno: int):
    values = {}
    try:
        for f in fields(kind):
            raw = row[f.name]
            values[f.name] = raw if f.type == "str" else (int(raw) if f.type == "int" else float(raw))
    except (KeyError, TypeError, ValueError) as e:
        raise StorageError(f"{path}, wiersz {lineno}: niepoprawna wartość ({e})") from e
    return kind(**values)


# ── Ewaluacja ─────────────────────────────────────────────


def _evaluate_trial(root: Path, config: RunConfig, trial: int, specs: list[RunSpec]) -> list[ReportRow]:
    params = config.dataset.to_params()
    k = config.train.k
    train_set, test_set = load_split(root, params, trial)
    factors = [InstanceFactors.of(A, k) for A in train_set]
    test_optimal = float(np.mean([tail_energy(A, k) for A in test_set]))
    rows = []
    for spec in specs:
        S = storage.read_sketch(run_dir(root, spec) / "sketch.txt")
        dense = sk.densify(S)
        rows.append(
            ReportRow(
                method=spec.method.value,
                s=spec.s,
                trial=trial,
                train_surrogate=float(np.mean([f.loss(dense) for f in factors])),
                train_scw=float(np.mean([scw_loss(S, A, k) for A in train_set])),
                test_scw=float(np.mean([scw_loss(S, A, k) for A in test_set])),
                test_optimal=test_optimal,
            )
        )
    logger.debug(f"Próba {trial}: oceniono {len(rows)} przebiegów")
    return rows


def evaluate(config: RunConfig) -> ExperimentReport:
    """Ocena wszystkich ukończonych przebiegów; brakujące trafiają do ``missing``."""
    root = Path(config.output_dir)
    completed = storage.RunManifest(root).completed()
    specs = plan_runs(config)
    present = [s for s in specs if s.run_id in completed]
    missing = [s.run_id for s in specs if s.run_id not in completed]

    by_trial: dict[int, list[RunSpec]] = defaultdict(list)
    for spec in present:
        by_trial[spec.trial].append(spec)
    trials = sorted(by_trial)
    if config.jobs == 1 or len(trials) <= 1:
        per_trial = [_evaluate_trial(root, config, t, by_trial[t]) for t in trials]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            per_trial = list(
                pool.map(_evaluate_trial, [root] * len(trials), [config] * len(trials), trials, [by_trial[t] for t in trials])
            )
    rows = sorted((r for chunk in per_trial for r in chunk), key=lambda r: (*_sort_key(r.method, r.s), r.trial))
    if missing:
        logger.warning(f"Brak {len(missing)} przebiegów: {', '.join(missing[:10])}{' …' if len(missing) > 10 else ''}")
    return ExperimentReport(rows=rows, curves=curves_from_traces(root, present), missing=missing)
