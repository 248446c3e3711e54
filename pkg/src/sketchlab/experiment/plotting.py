"""Wykresy SVG z raportu: krzywe uczenia (średnia ± std) i słupki straty testowej."""

from __future__ import annotations

import io
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update(
    {
        "font.family": "DejaVu Sans",
        "axes.unicode_minus": False,
        "svg.hashsalt": "sketchlab",
        "svg.fonttype": "path",
    }
)
import matplotlib.pyplot as plt  # noqa: E402
from loguru import logger  # noqa: E402

from sketchlab.core.errors import ContractError, StorageError  # noqa: E402
from sketchlab.experiment.report import METHOD_ORDER, CurvePoint, ExperimentReport, aggregate  # noqa: E402

PLOTS_DIR = "plots"
COLORS = {"fix": "tab:blue", "learn": "tab:red", "dense": "tab:green"}
KIND_LABELS = {"surrogate": "Strata zastępcza (trening)", "scw": "Strata SCW (trening, średnia)"}


# ── Zapis SVG ─────────────────────────────────────────────


def _data_comment(header: str, rows: list[list[object]]) -> str:
    lines = [header, *(",".join(str(v) for v in row) for row in rows)]
    body = "\n".join(lines).replace("--", "- -")
    return f"<!-- dane\n{body}\n-->\n"


def save_svg(fig, path: Path, header: str, rows: list[list[object]]) -> None:
    """Zapisuje wykres jako SVG z tabelą danych w komentarzu (bez daty, stałe identyfikatory)."""
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    svg = buf.getvalue()
    marker = svg.find("<svg")
    if marker < 0:
        raise StorageError(f"{path}: matplotlib nie zwrócił dokumentu SVG")
    svg = svg[:marker] + _data_comment(header, rows) + svg[marker:]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(svg, encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Nie można zapisać wykresu {path}: {e}") from e
    logger.debug(f"Zapisano wykres {path}")


# ── Panele ────────────────────────────────────────────────


def _panel(points: list[CurvePoint], kind: str, s: int, dense_s: list[int]) -> tuple[object, list[list[object]]]:
    by_family: dict[tuple[str, int], list[CurvePoint]] = defaultdict(list)
    for p in points:
        if p.kind == kind and (p.s == s or (p.method == "dense" and p.s in dense_s)):
            by_family[(p.method, p.s)].append(p)

    fig, ax = plt.subplots(figsize=(5, 3.2), constrained_layout=True)
    table = []
    for method, fam_s in sorted(by_family, key=lambda key: METHOD_ORDER.index(key[0]) if key[0] in METHOD_ORDER else 99):
        series = sorted(by_family[(method, fam_s)], key=lambda p: p.iteration)
        xs = [p.iteration for p in series]
        mean = [p.mean for p in series]
        lo = [p.mean - p.std for p in series]
        hi = [p.mean + p.std for p in series]
        color = COLORS.get(method)
        ax.plot(xs, mean, label=method.capitalize(), color=color, linewidth=1.2)
        ax.fill_between(xs, lo, hi, color=color, alpha=0.2, linewidth=0)
        table.extend([method, fam_s, p.iteration, repr(p.mean), repr(p.std)] for p in series)
    ax.set_title(f"{KIND_LABELS.get(kind, kind)}, s = {s}")
    ax.set_xlabel("Iteracja")
    ax.set_ylabel("Strata")
    ax.grid(True, alpha=0.3)
    if by_family:
        ax.legend(loc="best", fontsize=8)
    return fig, table


def plot_report(report: ExperimentReport, root: Path) -> list[Path]:
    """Jeden SVG na (rodzaj straty, s) i wykres słupkowy straty testowej; zwraca ścieżki."""
    if not report.rows:
        raise ContractError("Raport jest pusty, brak danych do wykresów")
    out_dir = root / PLOTS_DIR
    budgets = sorted({r.s for r in report.rows if r.method != "dense"})
    dense_s = sorted({r.s for r in report.rows if r.method == "dense"})
    panels = budgets or dense_s
    written = []

    kinds = sorted({p.kind for p in report.curves})
    for kind in kinds:
        for s in panels:
            fig, table = _panel(report.curves, kind, s, dense_s)
            path = out_dir / f"train_{kind}_s{s}.svg"
            save_svg(fig, path, "method,s,iteration,mean,std", table)
            written.append(path)

    summary = [row for row in aggregate(report.rows) if row.metric == "test_scw"]
    optimal = [row for row in aggregate(report.rows) if row.metric == "test_optimal"]
    # kolejność słupków: dla każdego s fix, learn; dense na końcu
    ordered = sorted(summary, key=lambda r: (r.method == "dense", r.s, METHOD_ORDER.index(r.method) if r.method in METHOD_ORDER else 99))
    fig, ax = plt.subplots(figsize=(6, 3.2), constrained_layout=True)
    labels = [f"{r.method.capitalize()}\ns={r.s}" if r.method != "dense" else "Dense" for r in ordered]
    ax.bar(
        range(len(ordered)),
        [r.mean for r in ordered],
        yerr=[r.std for r in ordered],
        color=[COLORS.get(r.method, "tab:gray") for r in ordered],
        capsize=3,
    )
    if optimal:
        ax.axhline(optimal[0].mean, color="black", linestyle=":", linewidth=1, label="Optimum SVD")
        ax.legend(loc="best", fontsize=8)
    ax.set_xticks(range(len(ordered)), labels, fontsize=8)
    ax.set_ylabel("Strata SCW (test)")
    ax.grid(True, axis="y", alpha=0.3)
    path = out_dir / "test_scw.svg"
    save_svg(fig, path, "method,s,mean,std,count", [[r.method, r.s, repr(r.mean), repr(r.std), r.count] for r in ordered])
    written.append(path)

    logger.info(f"Zapisano {len(written)} wykresów w {out_dir}")
    return written
