from pathlib import Path

import typer
from loguru import logger

from sketchlab.core.Atool import ATool, ConfigOption, JobsOption, OutOption, SetOption
from sketchlab.core.config import RunConfig
from sketchlab.core.tool_response import ToolResponse
from sketchlab.experiment import storage


class GenDataTool(ATool):
    """Generowanie syntetycznego zbioru danych na dysk."""

    def __generate(self, config: RunConfig) -> ToolResponse[list[Path]]:
        params = config.dataset.to_params()
        root = Path(config.output_dir)
        logger.debug(f"Generowanie {params.count} instancji {params.n}×{params.d} do {root}")
        manifests = storage.write_dataset(root, params)
        return ToolResponse.ok(
            manifests,
            f"Zapisano {params.count} instancji × {len(manifests)} zbiór(ów), manifest: {manifests[0]}",
        )

    def register(self, app: typer.Typer) -> None:
        """Rejestruje komendę ``gen-data``."""

        @app.command(name="gen-data")
        def gen_data(
            config: ConfigOption = None,
            overrides: SetOption = None,
            jobs: JobsOption = None,
            out: OutOption = None,
        ) -> None:
            """Generuje instancje A = A_true + szum i manifest zbioru."""
            response = self.guarded(lambda: self.__generate(self.load(config, overrides, jobs, out)))
            self.finish(response)
