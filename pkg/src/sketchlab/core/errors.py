"""Hierarchia wyjątków sketchlab.

Każdy wyjątek niesie kod wyjścia CLI, na który jest mapowany:
0 sukces, 2 błąd konfiguracji/parametrów, 3 błąd numeryczny, 4 błąd IO.
"""


class SketchLabError(Exception):
    """Bazowy wyjątek biblioteki."""

    exit_code: int = 1


class ParameterError(SketchLabError, ValueError):
    """Nieprawidłowe parametry lub niezgodne wymiary macierzy."""

    exit_code = 2


class ContractError(SketchLabError, ValueError):
    """Naruszony warunek wstępny (np. nieznormalizowane A, macierz nie-PSD)."""

    exit_code = 2


class FeasibilityError(SketchLabError):
    """Zadanie zbyt duże do wykonania (np. enumeracja C(d, k) ponad limit)."""

    exit_code = 2


class ConfigError(SketchLabError):
    """Błąd parsowania lub walidacji konfiguracji."""

    exit_code = 2


class ConvergenceError(SketchLabError, ArithmeticError):
    """Iteracyjny kernel SVD nie zbiegł w limicie iteracji."""

    exit_code = 3


class DivergenceError(SketchLabError, ArithmeticError):
    """Trening rozbiegł się (strata zastępcza ponad limit)."""

    exit_code = 3


class AuditFault(SketchLabError, ArithmeticError):
    """Dzielenie przez zero w śledzonym algorytmie (brak strażnika w gałęzi)."""

    exit_code = 3


class StorageError(SketchLabError, OSError):
    """Błąd zapisu/odczytu pliku lub uszkodzony format danych."""

    exit_code = 4
