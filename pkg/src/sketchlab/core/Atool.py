from abc import ABC, abstractmethod
from pathlib import Path
from typing import Annotated, Callable, Optional, TypeVar

import typer
from loguru import logger

from sketchlab.core.config import RunConfig, load_config
from sketchlab.core.errors import SketchLabError
from sketchlab.core.log import configure_logging
from sketchlab.core.tool_response import ToolResponse

# Wspólne opcje wszystkich komend
ConfigOption = Annotated[Optional[Path], typer.Option("--config", "-c", help="Plik konfiguracji JSON.")]
SetOption = Annotated[Optional[list[str]], typer.Option("--set", help="Nadpisanie klucz=wartość (wielokrotne).")]
JobsOption = Annotated[Optional[int], typer.Option("--jobs", "-j", help="Liczba równoległych procesów.")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Katalog wyjściowy.")]

T = TypeVar("T")


class ATool(ABC):
    """Abstrakcyjna klasa bazowa dla wszystkich komend CLI."""

    @abstractmethod
    def register(self, app: typer.Typer) -> None:
        """Rejestruje komendy w aplikacji Typer."""
        pass

    @staticmethod
    def load(config: Path | None, overrides: list[str] | None, jobs: int | None, out: Path | None) -> RunConfig:
        """Wczytuje konfigurację z opcjami wiersza poleceń; ``verbose`` z pliku włącza DEBUG."""
        run_config = load_config(config, overrides or (), jobs=jobs, output_dir=out)
        if run_config.verbose:
            configure_logging(verbose=True)
        return run_config

    @staticmethod
    def guarded(action: Callable[[], ToolResponse[T]]) -> ToolResponse[T]:
        """Wykonuje akcję, zamieniając wyjątki biblioteki i IO na odpowiedź błędu."""
        try:
            return action()
        except (SketchLabError, OSError) as e:
            logger.error(f"{type(e).__name__}: {e}")
            return ToolResponse.from_error(e)

    @staticmethod
    def finish(response: ToolResponse) -> None:
        """Wypisuje opis odpowiedzi i kończy proces odpowiednim kodem wyjścia."""
        if response.success:
            if response.warning:
                logger.warning(response.description)
            typer.echo(response.description)
            return
        typer.echo(f"Błąd: {response.description}", err=True)
        raise typer.Exit(code=response.exit_code)
