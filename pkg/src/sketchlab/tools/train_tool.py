from pathlib import Path

import typer
from loguru import logger

from sketchlab.core.Atool import ATool, ConfigOption, JobsOption, OutOption, SetOption
from sketchlab.core.config import RunConfig
from sketchlab.core.errors import StorageError
from sketchlab.core.tool_response import ToolResponse
from sketchlab.experiment import runner, storage


class TrainTool(ATool):
    """Trening szkiców dla każdej kombinacji metoda × s × próba."""

    def __check_dataset(self, config: RunConfig) -> None:
        params = config.dataset.to_params()
        root = Path(config.output_dir)
        directory = storage.dataset_dir(root, params, 0)
        if not (directory / storage.MANIFEST_NAME).exists():
            raise StorageError(f"Brak zbioru danych w {directory}, uruchom najpierw gen-data")

    def __train(self, config: RunConfig) -> ToolResponse[list[dict]]:
        self.__check_dataset(config)
        results = runner.run_all(config)
        failed = [r["run_id"] for r in results if r["status"] != "done"]
        done = len(results) - len(failed)
        if failed:
            # pozostałe przebiegi są już zapisane; kod wyjścia to największy kod spośród nieudanych
            exit_code = max(r["exit_code"] for r in results if r["status"] != "done")
            logger.error(f"Nieudane przebiegi: {', '.join(failed)}")
            return ToolResponse.fail(
                f"Ukończono {done} przebiegów, {len(failed)} nieudanych: {', '.join(failed)}",
                exit_code,
            )
        return ToolResponse.ok(results, f"Ukończono {done} przebiegów w {config.output_dir}")

    def register(self, app: typer.Typer) -> None:
        """Rejestruje komendę ``train``."""

        @app.command(name="train")
        def train(
            config: ConfigOption = None,
            overrides: SetOption = None,
            jobs: JobsOption = None,
            out: OutOption = None,
            resume: bool = typer.Option(False, "--resume", help="Pomiń przebiegi ukończone według manifestu."),
        ) -> None:
            """Trenuje szkice fix/learn/dense i zapisuje przebiegi CSV oraz pliki szkiców."""

            def action() -> ToolResponse[list[dict]]:
                run_config = self.load(config, overrides, jobs, out)
                if resume:
                    run_config = run_config.model_copy(update={"resume": True})
                return self.__train(run_config)

            self.finish(self.guarded(action))
