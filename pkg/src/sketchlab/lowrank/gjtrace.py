"""Instrumentacja Goldberga–Jerruma: algorytmy liczone na śledzonych skalarach.

Każdy ``TracedScalar`` niesie górne ograniczenia stopnia licznika i mianownika
funkcji wymiernej zmiennych wejściowych oraz strukturalny identyfikator węzła
w DAG-u wyrażeń. ``GjTracer`` zbiera różne predykaty z węzłów rozgałęzień,
więc po przebiegu po zestawie wejść daje empiryczny certyfikat (Δ, p).

Identyfikator węzła to hash po (operacja, identyfikatory dzieci); zmienne
wejściowe hashowane są indeksem, stałe jednym wspólnym tokenem CONST. Dwa
algebraicznie równe, ale składniowo różne predykaty liczą się jako dwa.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import reduce
from itertools import product
from numbers import Real
from typing import Callable, Sequence

import numpy as np
from loguru import logger

from sketchlab.core.errors import AuditFault, ParameterError
from sketchlab.core.rng import Stream, generator
from sketchlab.lowrank.linalg import as_dense
from sketchlab.lowrank.pinv import DEFAULT_COEFF_TOL, decell_kernel, greedy_kernel, unit_scaled


class ArithOp(str, Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"


class BranchKind(str, Enum):
    GE0 = ">=0"
    LE0 = "<=0"
    EQ0 = "=0"


class _Tag(IntEnum):
    VAR = 1
    CONST = 2
    NEG = 3
    ADD = 4
    SUB = 5
    MUL = 6
    DIV = 7


_OP_TAGS = {ArithOp.ADD: _Tag.ADD, ArithOp.SUB: _Tag.SUB, ArithOp.MUL: _Tag.MUL, ArithOp.DIV: _Tag.DIV}
_CONST_NODE = hash((int(_Tag.CONST),))


@dataclass(frozen=True, slots=True)
class TracedScalar:
    """Wartość z ograniczeniami stopnia (num_deg, den_deg) i identyfikatorem węzła."""

    value: Real
    num_deg: int
    den_deg: int
    node: int
    tracer: "GjTracer" = field(compare=False, repr=False)

    @property
    def degree(self) -> int:
        return max(self.num_deg, self.den_deg)

    def _lift(self, other: object) -> "TracedScalar":
        if isinstance(other, TracedScalar):
            return other
        if isinstance(other, Real):
            return self.tracer.const(other)
        raise TypeError(f"Nie można śledzić operandu typu {type(other).__name__}")

    def __add__(self, other):
        return self.tracer.arith(ArithOp.ADD, self, self._lift(other))

    def __radd__(self, other):
        return self.tracer.arith(ArithOp.ADD, self._lift(other), self)

    def __sub__(self, other):
        return self.tracer.arith(ArithOp.SUB, self, self._lift(other))

    def __rsub__(self, other):
        return self.tracer.arith(ArithOp.SUB, self._lift(other), self)

    def __mul__(self, other):
        return self.tracer.arith(ArithOp.MUL, self, self._lift(other))

    def __rmul__(self, other):
        return self.tracer.arith(ArithOp.MUL, self._lift(other), self)

    def __truediv__(self, other):
        return self.tracer.arith(ArithOp.DIV, self, self._lift(other))

    def __rtruediv__(self, other):
        return self.tracer.arith(ArithOp.DIV, self._lift(other), self)

    def __neg__(self):
        return self.tracer.neg(self)


@dataclass(frozen=True)
class GjReport:
    """Empiryczny certyfikat (Δ, p) z jednego lub wielu audytów."""

    max_degree: int
    predicate_count: int
    branch_events: int
    predicates: frozenset[tuple[int, BranchKind]] = frozenset()

    def merge(self, other: "GjReport") -> "GjReport":
        """Łączy raporty: suma zbiorów predykatów, maksimum stopni, suma rozgałęzień."""
        predicates = self.predicates | other.predicates
        return GjReport(
            max_degree=max(self.max_degree, other.max_degree),
            predicate_count=len(predicates),
            branch_events=self.branch_events + other.branch_events,
            predicates=predicates,
        )


class GjTracer:
    """Stan jednego audytu. Nie jest współdzielony między wątkami."""

    def __init__(self, zero_tol: float = DEFAULT_COEFF_TOL) -> None:
        self.zero_tol = zero_tol
        self.max_degree = 0
        self.branch_events = 0
        self._predicates: set[tuple[int, BranchKind]] = set()

    # ── Liście ─────────────────────────────────────────────

    def variable(self, index: int, value: Real) -> TracedScalar:
        self.max_degree = max(self.max_degree, 1)
        return TracedScalar(value, 1, 0, hash((int(_Tag.VAR), index)), self)

    def const(self, value: Real) -> TracedScalar:
        return TracedScalar(value, 0, 0, _CONST_NODE, self)

    def wrap(self, Z: np.ndarray) -> np.ndarray:
        """Zamienia macierz liczb na macierz zmiennych (indeks wierszami)."""
        out = np.empty(Z.shape, dtype=object)
        for flat, (idx, value) in enumerate(np.ndenumerate(Z)):
            out[idx] = self.variable(flat, float(value) if isinstance(value, np.floating) else value)
        return out

    # ── Węzły obliczeniowe ─────────────────────────────────

    def arith(self, op: ArithOp, a: TracedScalar, b: TracedScalar) -> TracedScalar:
        op = ArithOp(op)
        if op in (ArithOp.ADD, ArithOp.SUB):
            num = max(a.num_deg + b.den_deg, b.num_deg + a.den_deg)
            den = a.den_deg + b.den_deg
            value = a.value + b.value if op is ArithOp.ADD else a.value - b.value
        elif op is ArithOp.MUL:
            num, den = a.num_deg + b.num_deg, a.den_deg + b.den_deg
            value = a.value * b.value
        else:
            if b.value == 0:
                raise AuditFault("Dzielenie przez zero w śledzonym algorytmie (brak strażnika rozgałęzienia)")
            num, den = a.num_deg + b.den_deg, a.den_deg + b.num_deg
            value = a.value / b.value
        node = hash((int(_OP_TAGS[op]), a.node, b.node))
        self.max_degree = max(self.max_degree, num, den)
        return TracedScalar(value, num, den, node, self)

    def neg(self, a: TracedScalar) -> TracedScalar:
        return TracedScalar(-a.value, a.num_deg, a.den_deg, hash((int(_Tag.NEG), a.node)), self)

    # ── Węzły rozgałęzień ──────────────────────────────────

    def branch(self, v: TracedScalar, kind: BranchKind) -> bool:
        kind = BranchKind(kind)
        self._predicates.add((v.node, kind))
        self.branch_events += 1
        if kind is BranchKind.GE0:
            return v.value >= 0
        if kind is BranchKind.LE0:
            return v.value <= 0
        return abs(v.value) <= self.zero_tol

    def report(self) -> GjReport:
        return GjReport(
            max_degree=self.max_degree,
            predicate_count=len(self._predicates),
            branch_events=self.branch_events,
            predicates=frozenset(self._predicates),
        )


def traced_arith(op: ArithOp | str, a: TracedScalar | Real, b: TracedScalar | Real) -> TracedScalar:
    """v'' = v ⊙ v' z regułami stopni bez skracania."""
    tracer = a.tracer if isinstance(a, TracedScalar) else b.tracer
    lift = lambda x: x if isinstance(x, TracedScalar) else tracer.const(x)  # noqa: E731
    return tracer.arith(ArithOp(op), lift(a), lift(b))


def traced_branch(v: TracedScalar, kind: BranchKind | str) -> bool:
    """Rejestruje predykat (węzeł, rodzaj) i zwraca wynik testu znaku."""
    return v.tracer.branch(v, BranchKind(kind))


class TracedOps:
    """Arytmetyka macierzowa na tablicach obiektów TracedScalar (dla rdzeni pinv)."""

    def __init__(self, tracer: GjTracer) -> None:
        self.tracer = tracer

    def matmul(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        rows, inner = X.shape
        cols = Y.shape[1]
        out = np.empty((rows, cols), dtype=object)
        for i in range(rows):
            for j in range(cols):
                if inner == 0:
                    out[i, j] = self.tracer.const(0)
                else:
                    out[i, j] = reduce(lambda acc, t: acc + t, (X[i, t] * Y[t, j] for t in range(inner)))
        return out

    def trace(self, X: np.ndarray) -> TracedScalar:
        return reduce(lambda acc, t: acc + t, (X[i, i] for i in range(X.shape[0])))

    def identity(self, size: int) -> np.ndarray:
        out = np.empty((size, size), dtype=object)
        for i, j in product(range(size), repeat=2):
            out[i, j] = self.tracer.const(1 if i == j else 0)
        return out

    def zeros(self, shape: tuple[int, int]) -> np.ndarray:
        out = np.empty(shape, dtype=object)
        for idx in np.ndindex(*shape):
            out[idx] = self.tracer.const(0)
        return out

    def add_diagonal(self, X: np.ndarray, c: TracedScalar) -> np.ndarray:
        out = X.copy()
        for i in range(min(out.shape)):
            out[i, i] = out[i, i] + c
        return out

    def scale(self, c: TracedScalar, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape, dtype=object)
        for idx in np.ndindex(*X.shape):
            out[idx] = c * X[idx]
        return out

    def is_zero(self, c: TracedScalar, scale: TracedScalar | Real | None = None) -> bool:
        # test dokładny: skala nie wchodzi do predykatu
        return traced_branch(c, BranchKind.EQ0)


# ── Audyty ────────────────────────────────────────────────


def _audit(
    m: int,
    input_suite: Sequence[np.ndarray],
    kernel: Callable[[np.ndarray, TracedOps], object],
    zero_tol: float,
) -> GjReport:
    if m < 1:
        raise ParameterError(f"m musi być ≥ 1, otrzymano {m}")
    if not input_suite:
        raise ParameterError("Zestaw wejść audytu jest pusty")
    tracer = GjTracer(zero_tol)
    ops = TracedOps(tracer)
    shapes = {np.shape(Z) for Z in input_suite}
    if len(shapes) != 1:
        # zmienne są indeksowane pozycją, więc kształty muszą się zgadzać
        raise ParameterError(f"Wszystkie macierze zestawu muszą mieć ten sam kształt, otrzymano {sorted(shapes)}")
    for Z in input_suite:
        Z = as_dense(Z, "Z")
        if Z.shape[0] != m:
            raise ParameterError(f"Macierz zestawu ma {Z.shape[0]} wierszy, oczekiwano m = {m}")
        scaled, _ = unit_scaled(Z)
        kernel(tracer.wrap(scaled), ops)
    return tracer.report()


def audit_pinv_decell(m: int, input_suite: Sequence[np.ndarray], zero_tol: float = DEFAULT_COEFF_TOL) -> GjReport:
    """Audyt wzoru Decella: oczekiwane p = m oraz Δ ≤ 2m."""
    report = _audit(m, input_suite, decell_kernel, zero_tol)
    logger.info(
        f"Audyt decell m={m}: predykaty {report.predicate_count}, "
        f"stopień {report.max_degree}, rozgałęzienia {report.branch_events}"
    )
    return report


def audit_pinv_greedy(m: int, input_suite: Sequence[np.ndarray], zero_tol: float = DEFAULT_COEFF_TOL) -> GjReport:
    """Audyt zachłannego wyboru wierszy: liczba predykatów zależy od wzorców zależności."""
    report = _audit(m, input_suite, greedy_kernel, zero_tol)
    logger.info(
        f"Audyt greedy m={m}: predykaty {report.predicate_count}, "
        f"stopień {report.max_degree}, rozgałęzienia {report.branch_events}"
    )
    return report


# ── Zestawy wejść ─────────────────────────────────────────


def rank_suite(m: int, cols: int, per_rank: int = 2, seed: int = 0) -> list[np.ndarray]:
    """Macierze m×cols każdego rzędu 0..m, wartości osobliwe z [0.5, 1]."""
    if cols < m:
        raise ParameterError(f"cols musi być ≥ m, otrzymano cols={cols}, m={m}")
    suite = []
    for r in range(m + 1):
        for sample in range(per_rank):
            rng = generator(seed, Stream.SUITE, m, r, sample)
            if r == 0:
                suite.append(np.zeros((m, cols)))
                continue
            U, _ = np.linalg.qr(rng.standard_normal((m, r)))
            V, _ = np.linalg.qr(rng.standard_normal((cols, r)))
            sigma = rng.uniform(0.5, 1.0, size=r)
            suite.append((U * sigma) @ V.T)
    return suite


def dependence_suite(m: int, cols: int, seed: int = 0) -> list[np.ndarray]:
    """Po jednej macierzy na każdy z 2^m wzorców zależności wierszy.

    Bit i wzorca mówi, czy wiersz i jest nowym kierunkiem, czy kombinacją
    liniową wcześniejszych wierszy (zerem, gdy wcześniejszych brak).
    """
    if cols < m:
        raise ParameterError(f"cols musi być ≥ m, otrzymano cols={cols}, m={m}")
    suite = []
    for pattern in range(2**m):
        rng = generator(seed, Stream.SUITE, m, pattern, 2**m)
        Z = np.zeros((m, cols))
        for i in range(m):
            if pattern >> i & 1:
                Z[i] = rng.standard_normal(cols)
            elif i > 0:
                Z[i] = rng.standard_normal(i) @ Z[:i]
        suite.append(Z)
    return suite


def full_rank_suite(m: int, cols: int, count: int = 4, seed: int = 0) -> list[np.ndarray]:
    """Tylko macierze pełnego rzędu wierszowego (jedna ścieżka zachłanna)."""
    return [generator(seed, Stream.SUITE, m, 0, 2**m + 1 + i).standard_normal((m, cols)) for i in range(count)]
