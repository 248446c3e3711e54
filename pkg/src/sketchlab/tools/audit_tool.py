from dataclasses import dataclass
from pathlib import Path

import numpy as np
import typer
from loguru import logger

from sketchlab.core.Atool import ATool, ConfigOption, JobsOption, OutOption, SetOption
from sketchlab.core.config import AuditSection, RunConfig
from sketchlab.core.tool_response import ToolResponse
from sketchlab.experiment import storage
from sketchlab.lowrank import gjtrace
from sketchlab.lowrank.pinv import penrose_defects, pinv_decell, pinv_greedy_projector, pinv_svd_oracle

AUDIT_FIELDS = ["m", "algorithm", "predicate_count", "max_degree", "branch_events", "ceiling", "max_defect"]


@dataclass(frozen=True)
class AuditRow:
    m: int
    algorithm: str
    predicate_count: int
    max_degree: int
    branch_events: int
    ceiling: int
    """Teoretyczny limit liczby predykatów: m dla decell, 2^m − 1 dla greedy."""
    max_defect: float
    """Największe residuum kontroli numerycznej na zestawie (Penrose / rzutnik)."""


class AuditTool(ATool):
    """Audyt złożoności GJ algorytmów pseudo-odwrotności."""

    @staticmethod
    def _suite(audit: AuditSection, m: int) -> list[np.ndarray]:
        cols = m + audit.extra_cols
        return gjtrace.rank_suite(m, cols, audit.per_rank, audit.seed) + gjtrace.dependence_suite(m, cols, audit.seed)

    @staticmethod
    def _defect(algorithm: str, suite: list[np.ndarray]) -> float:
        worst = 0.0
        for Z in suite:
            if algorithm == "decell":
                worst = max(worst, *penrose_defects(Z, pinv_decell(Z)))
            else:
                reference = pinv_svd_oracle(Z) @ Z
                diff = float(np.linalg.norm(pinv_greedy_projector(Z) - reference))
                worst = max(worst, diff / max(float(np.linalg.norm(reference)), 1.0))
        return worst

    def __audit(self, config: RunConfig) -> ToolResponse[list[AuditRow]]:
        audit = config.audit
        rows = []
        for m in range(audit.m_min, audit.m_max + 1):
            suite = self._suite(audit, m)
            for algorithm in audit.algorithms:
                if algorithm == "decell":
                    report, ceiling = gjtrace.audit_pinv_decell(m, suite), m
                else:
                    report, ceiling = gjtrace.audit_pinv_greedy(m, suite), 2**m - 1
                rows.append(
                    AuditRow(
                        m=m,
                        algorithm=algorithm,
                        predicate_count=report.predicate_count,
                        max_degree=report.max_degree,
                        branch_events=report.branch_events,
                        ceiling=ceiling,
                        max_defect=self._defect(algorithm, suite),
                    )
                )
        path = Path(config.output_dir) / "audit.csv"
        storage.write_csv(path, AUDIT_FIELDS, (vars(r) for r in rows))
        logger.info(f"Zapisano tabelę audytu: {path}")

        header = f"{'m':>3} {'algorithm':<9} {'predicates':>10} {'ceiling':>7} {'degree':>6} {'branches':>8} {'defect':>9}"
        table = [header] + [
            f"{r.m:>3} {r.algorithm:<9} {r.predicate_count:>10} {r.ceiling:>7} {r.max_degree:>6} "
            f"{r.branch_events:>8} {r.max_defect:>9.2e}"
            for r in rows
        ]
        return ToolResponse.ok(rows, "\n".join(table))

    def register(self, app: typer.Typer) -> None:
        """Rejestruje komendę ``audit-gj``."""

        @app.command(name="audit-gj")
        def audit_gj(
            config: ConfigOption = None,
            overrides: SetOption = None,
            jobs: JobsOption = None,
            out: OutOption = None,
        ) -> None:
            """Śledzi pinv_decell i metodę zachłanną: liczba predykatów i stopień dla m z konfiguracji."""
            response = self.guarded(lambda: self.__audit(self.load(config, overrides, jobs, out)))
            self.finish(response)
