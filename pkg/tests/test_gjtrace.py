from fractions import Fraction

import numpy as np
import pytest

from sketchlab.core.errors import AuditFault, ParameterError
from sketchlab.lowrank import gjtrace
from sketchlab.lowrank.gjtrace import (
    ArithOp,
    BranchKind,
    GjReport,
    GjTracer,
    TracedOps,
    audit_pinv_decell,
    audit_pinv_greedy,
    traced_arith,
    traced_branch,
)
from sketchlab.lowrank.pinv import decell_kernel, faddeev_leverrier


def test_degree_rules():
    tracer = GjTracer()
    x, y = tracer.variable(0, 2.0), tracer.variable(1, 3.0)
    prod = traced_arith(ArithOp.MUL, x, y)
    assert (prod.num_deg, prod.den_deg, prod.value) == (2, 0, 6.0)
    quot = traced_arith("/", x, prod)
    assert (quot.num_deg, quot.den_deg) == (1, 2)
    total = traced_arith("+", quot, y)
    assert (total.num_deg, total.den_deg) == (3, 2)
    assert total.value == pytest.approx(2.0 / 6.0 + 3.0)
    assert tracer.report().max_degree == 3


def test_structurally_equal_expressions_share_a_node():
    tracer = GjTracer()
    x, y = tracer.variable(0, 1.0), tracer.variable(1, 2.0)
    assert (x * y + x).node == (x * y + x).node
    assert (x * y).node != (y * x).node
    traced_branch(x * y - x, BranchKind.GE0)
    traced_branch(x * y - x, BranchKind.GE0)
    traced_branch(x * y - x, BranchKind.LE0)
    report = tracer.report()
    assert report.predicate_count == 2
    assert report.branch_events == 3


def test_branch_outcomes():
    tracer = GjTracer(zero_tol=1e-10)
    v = tracer.variable(0, -1e-12)
    assert traced_branch(v, "=0")
    assert traced_branch(v, "<=0")
    assert not traced_branch(v, ">=0")


def test_division_by_zero_is_a_fault():
    tracer = GjTracer()
    x = tracer.variable(0, 1.0)
    with pytest.raises(AuditFault):
        x / 0
    with pytest.raises(AuditFault):
        x / (x - x)


def test_report_merge():
    a = GjReport(4, 1, 3, frozenset({(1, BranchKind.EQ0)}))
    b = GjReport(6, 2, 5, frozenset({(1, BranchKind.EQ0), (2, BranchKind.EQ0)}))
    merged = a.merge(b)
    assert (merged.max_degree, merged.predicate_count, merged.branch_events) == (6, 2, 8)


def _traced_line(tracer, Z0, D, t):
    m, cols = len(Z0), len(Z0[0])
    Z = np.empty((m, cols), dtype=object)
    for i in range(m):
        for j in range(cols):
            Z[i, j] = tracer.variable(i * cols + j, Z0[i][j] + t * D[i][j])
    return Z


def _integer_line(rng, m, cols):
    draw = lambda: [[Fraction(int(v)) for v in row] for row in rng.integers(-3, 4, size=(m, cols))]  # noqa: E731
    return draw(), draw()


def _fraction_rank(rows):
    rows = [list(r) for r in rows]
    rank, width = 0, len(rows[0])
    for col in range(width):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col] / rows[rank][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _is_rational_of_degree(ts, values, num_deg, den_deg):
    """Czy istnieją N (st. ≤ num_deg) i D ≢ 0 (st. ≤ den_deg) z N(t) = f(t)·D(t) we wszystkich punktach."""
    rows = [[t**a for a in range(num_deg + 1)] + [-v * t**b for b in range(den_deg + 1)] for t, v in zip(ts, values)]
    return _fraction_rank(rows) < num_deg + den_deg + 2


@pytest.mark.parametrize("m", [1, 2, 3])
def test_characteristic_coefficient_degrees_are_sound(m):
    """c_i jest wielomianem stopnia ≤ 2i: (2i+1)-sza różnica skończona wzdłuż prostej znika dokładnie."""
    Z0, D = _integer_line(np.random.default_rng(m), m, m + 1)

    def coefficients(t: int):
        tracer = GjTracer()
        ops = TracedOps(tracer)
        Z = _traced_line(tracer, Z0, D, t)
        return faddeev_leverrier(ops.matmul(Z, Z.T), ops)

    samples = [coefficients(t) for t in range(2 * m + 2)]
    for i in range(m):
        degree = samples[0][i].num_deg
        assert degree == 2 * (i + 1)
        values = [s[i].value for s in samples[: degree + 2]]
        for _ in range(degree + 1):
            values = [b - a for a, b in zip(values, values[1:])]
        assert values == [0]


def test_division_node_degrees_are_sound():
    tracer = GjTracer()
    ts = list(range(10))
    values, bounds = [], set()
    for t in ts:
        x, y = tracer.variable(0, Fraction(2 * t + 1)), tracer.variable(1, Fraction(t - 10))
        q = (x * y + x) / (y * y - 3) - x / y
        values.append(q.value)
        bounds.add((q.num_deg, q.den_deg))
    assert bounds == {(3, 3)}
    assert _is_rational_of_degree(ts, values, 3, 3)
    assert not _is_rational_of_degree(ts, values, 2, 2)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_decell_output_degrees_are_sound(m):
    """Każdy element Z† z rdzenia Decella jest funkcją wymierną o zadeklarowanych stopniach."""
    cols = m + 1
    Z0, D = _integer_line(np.random.default_rng(10 + m), m, cols)
    ts, outputs = [], []
    for t in range(100):
        if len(ts) == 4 * m + 2:
            break
        tracer = GjTracer()
        P, r = decell_kernel(_traced_line(tracer, Z0, D, t), TracedOps(tracer))
        # prosta przecina zbiór rank < m w skończenie wielu punktach
        if r == m:
            ts.append(Fraction(t))
            outputs.append(P)
    assert len(ts) == 4 * m + 2
    for idx in np.ndindex(cols, m):
        num_deg, den_deg = outputs[0][idx].num_deg, outputs[0][idx].den_deg
        assert (num_deg, den_deg) == (2 * m - 1, 2 * m)
        assert _is_rational_of_degree(ts, [P[idx].value for P in outputs], num_deg, den_deg)
    first = np.array([[float(Z0[i][j] + ts[0] * D[i][j]) for j in range(cols)] for i in range(m)])
    traced = np.array([[float(outputs[0][i, j].value) for j in range(m)] for i in range(cols)])
    np.testing.assert_allclose(traced, np.linalg.pinv(first), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("m", range(1, 9))
def test_decell_certificate(m):
    report = audit_pinv_decell(m, gjtrace.rank_suite(m, m + 2, per_rank=1))
    assert report.predicate_count == m
    assert report.max_degree <= 2 * m


@pytest.mark.parametrize("m", range(3, 7))
def test_greedy_exceeds_decell_on_mixed_suite(m):
    suite = gjtrace.rank_suite(m, m + 2, per_rank=1) + gjtrace.dependence_suite(m, m + 2)
    assert audit_pinv_greedy(m, suite).predicate_count > m
    assert audit_pinv_greedy(m, suite).predicate_count <= 2**m - 1


def test_greedy_on_full_rank_inputs_takes_one_path():
    m = 4
    report = audit_pinv_greedy(m, gjtrace.full_rank_suite(m, 6))
    assert report.predicate_count == m


def test_dependence_suite_realizes_every_pattern():
    m = 3
    suite = gjtrace.dependence_suite(m, 5)
    assert len(suite) == 2**m
    ranks = [np.linalg.matrix_rank(Z) for Z in suite]
    assert ranks == [bin(p).count("1") for p in range(2**m)]


def test_audit_validates_suite():
    with pytest.raises(ParameterError):
        audit_pinv_decell(2, [])
    with pytest.raises(ParameterError):
        audit_pinv_decell(2, [np.ones((3, 4))])
    with pytest.raises(ParameterError):
        audit_pinv_decell(2, [np.ones((2, 4)), np.ones((2, 3))])
