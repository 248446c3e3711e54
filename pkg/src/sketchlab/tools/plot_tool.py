from pathlib import Path

import typer

from sketchlab.core.Atool import ATool, ConfigOption, JobsOption, OutOption, SetOption
from sketchlab.core.config import RunConfig
from sketchlab.core.tool_response import ToolResponse
from sketchlab.experiment.plotting import plot_report
from sketchlab.experiment.report import ExperimentReport


class PlotTool(ATool):
    """Wykresy SVG z zapisanego raportu."""

    def __plot(self, config: RunConfig) -> ToolResponse[list[Path]]:
        root = Path(config.output_dir)
        written = plot_report(ExperimentReport.read(root), root)
        return ToolResponse.ok(written, f"Zapisano {len(written)} wykresów w {root / 'plots'}")

    def register(self, app: typer.Typer) -> None:
        """Rejestruje komendę ``plot``."""

        @app.command(name="plot")
        def plot(
            config: ConfigOption = None,
            overrides: SetOption = None,
            jobs: JobsOption = None,
            out: OutOption = None,
        ) -> None:
            """Rysuje krzywe uczenia i wykres słupkowy straty testowej z report.csv i curves.csv."""
            response = self.guarded(lambda: self.__plot(self.load(config, overrides, jobs, out)))
            self.finish(response)
