from dataclasses import dataclass
from typing import Generic, TypeVar

from sketchlab.core.errors import SketchLabError


T = TypeVar("T")


@dataclass
class ToolResponse(Generic[T]):
    """Generyczna odpowiedź komendy CLI: wynik, opis i kod wyjścia procesu."""
    success: bool
    data: T | None
    description: str
    exit_code: int = 0
    warning: bool = False

    @staticmethod
    def ok(data: T, description: str = "") -> "ToolResponse[T]":
        """Zwraca pomyślną odpowiedź."""
        return ToolResponse(success=True, data=data, description=description)

    @staticmethod
    def partial(data: T, description: str) -> "ToolResponse[T]":
        """Wynik niepełny: praca wykonana, ale z ostrzeżeniem (kod wyjścia 0)."""
        return ToolResponse(success=True, data=data, description=description, warning=True)

    @staticmethod
    def fail(description: str, exit_code: int = 1) -> "ToolResponse[T]":
        """Zwraca odpowiedź błędu."""
        return ToolResponse(success=False, data=None, description=description, exit_code=exit_code)

    @staticmethod
    def from_error(error: Exception) -> "ToolResponse[T]":
        """Odpowiedź błędu z kodem wyjścia przypisanym do klasy wyjątku."""
        if isinstance(error, SketchLabError):
            return ToolResponse.fail(str(error), error.exit_code)
        if isinstance(error, OSError):
            return ToolResponse.fail(f"Błąd wejścia/wyjścia: {error}", 4)
        return ToolResponse.fail(str(error))
