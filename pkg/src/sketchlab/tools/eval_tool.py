from pathlib import Path

import typer

from sketchlab.core.Atool import ATool, ConfigOption, JobsOption, OutOption, SetOption
from sketchlab.core.config import RunConfig
from sketchlab.core.errors import ContractError
from sketchlab.core.tool_response import ToolResponse
from sketchlab.experiment.plotting import plot_report
from sketchlab.experiment.report import ExperimentReport, evaluate


class EvalTool(ATool):
    """Ocena wytrenowanych szkiców na zbiorach testowych."""

    @staticmethod
    def _describe(report: ExperimentReport, root: Path) -> str:
        lines = [f"Raport: {len(report.rows)} przebiegów → {root / 'report.csv'}"]
        for row in report.summary:
            if row.metric == "test_scw":
                lines.append(f"  {row.method:<5} s={row.s:<2} test SCW = {row.mean:.6f} ± {row.std:.6f} (n={row.count})")
        optimal = [r for r in report.summary if r.metric == "test_optimal"]
        if optimal:
            lines.append(f"  optimum SVD: {optimal[0].mean:.6f}")
        for gap in report.gaps:
            lines.append(
                f"  learn − fix, s={gap.s}, {gap.metric}: {gap.mean_gap:+.6f} (SE {gap.stderr:.6f}, par {gap.count})"
            )
        return "\n".join(lines)

    def __evaluate(self, config: RunConfig) -> ToolResponse[ExperimentReport]:
        root = Path(config.output_dir)
        report = evaluate(config)
        if not report.rows:
            raise ContractError(f"Brak ukończonych przebiegów w {root}, uruchom najpierw train")
        report.write(root)
        if config.plot:
            plot_report(report, root)
        description = self._describe(report, root)
        if report.missing:
            return ToolResponse.partial(
                report, f"{description}\nRaport niepełny, brakujące przebiegi: {', '.join(report.missing)}"
            )
        return ToolResponse.ok(report, description)

    def register(self, app: typer.Typer) -> None:
        """Rejestruje komendę ``eval``."""

        @app.command(name="eval")
        def eval_(
            config: ConfigOption = None,
            overrides: SetOption = None,
            jobs: JobsOption = None,
            out: OutOption = None,
        ) -> None:
            """Liczy straty treningowe i testowe, agregaty oraz różnice learn − fix."""
            response = self.guarded(lambda: self.__evaluate(self.load(config, overrides, jobs, out)))
            self.finish(response)
