import numpy as np
import pytest

from sketchlab.core.errors import ContractError, DivergenceError, ParameterError
from sketchlab.lowrank import sketch as sk
from sketchlab.lowrank.linalg import svd
from sketchlab.lowrank.train import (
    InstanceFactors,
    TrainConfig,
    TrainMode,
    iht_train,
    sgd_train,
    surrogate_grad,
    surrogate_loss,
    train,
)


def _dataset(rng, count, n, d):
    out = []
    for _ in range(count):
        A = rng.standard_normal((n, d))
        out.append(A / np.linalg.norm(A))
    return out


def _direct_surrogate(S, A, k):
    U = np.linalg.svd(A, full_matrices=False)[0]
    I0 = np.eye(k, U.shape[1])
    return float(np.linalg.norm(U[:, :k].T @ S.T @ S @ U - I0) ** 2)


# ── Strata i gradient ─────────────────────────────────────


def test_loss_is_zero_at_top_singular_vectors(unit_matrix):
    A = unit_matrix(8, 5)
    S = svd(A).U[:, :2].T
    assert surrogate_loss(S, A, 2) == pytest.approx(0.0, abs=1e-20)
    assert np.linalg.norm(surrogate_grad(S, A, 2)) <= 1e-8


def test_zero_sketch_loss_equals_k(unit_matrix):
    assert surrogate_loss(np.zeros((3, 8)), unit_matrix(8, 5), 3) == pytest.approx(3.0, abs=1e-14)


def test_loss_matches_independent_formula(rng, unit_matrix):
    A = unit_matrix(9, 6)
    S = rng.standard_normal((4, 9))
    assert surrogate_loss(S, A, 2) == pytest.approx(_direct_surrogate(S, A, 2), abs=1e-12)


def test_loss_accepts_sparse_sketch(unit_matrix):
    A = unit_matrix(9, 6)
    S = sk.random_sparse_init(4, 9, 2, seed=1)
    assert surrogate_loss(S, A, 2) == pytest.approx(surrogate_loss(sk.densify(S), A, 2), abs=1e-15)


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(17)
    h = 1e-5
    for _ in range(100):
        m, n, d = 3, 6, 4
        k = int(rng.integers(1, 4))
        A = rng.standard_normal((n, d))
        A /= np.linalg.norm(A)
        S = rng.standard_normal((m, n)) * 0.5
        factors = InstanceFactors.of(A, k)
        _, grad = factors.loss_and_grad(S)
        numeric = np.zeros_like(S)
        for idx in np.ndindex(*S.shape):
            E = np.zeros_like(S)
            E[idx] = h
            numeric[idx] = (factors.loss(S + E) - factors.loss(S - E)) / (2 * h)
        assert np.linalg.norm(numeric - grad) <= 1e-5 * max(np.linalg.norm(grad), 1e-12)


def test_directional_derivative_along_sketch(rng, unit_matrix):
    A = unit_matrix(7, 5)
    S = rng.standard_normal((3, 7))
    h = 1e-5
    numeric = (surrogate_loss((1 + h) * S, A, 2) - surrogate_loss((1 - h) * S, A, 2)) / (2 * h)
    analytic = float(np.sum(surrogate_grad(S, A, 2) * S))
    assert numeric == pytest.approx(analytic, rel=1e-6)


def test_rank_deficient_input_uses_compact_factors(low_rank):
    A = low_rank(8, 6, 3, normalize=True)
    factors = InstanceFactors.of(A, 2)
    assert factors.U.shape == (8, 3)
    with pytest.raises(ContractError):
        InstanceFactors.of(A, 4)


# ── Trening ───────────────────────────────────────────────


def test_config_validation():
    with pytest.raises(ParameterError):
        TrainConfig(mode="fix", iterations=0)
    with pytest.raises(ParameterError):
        TrainConfig(mode="learn", eta=0.0)
    with pytest.raises(ValueError):
        TrainConfig(mode="sparse")
    assert TrainConfig(mode="dense").mode is TrainMode.DENSE


def test_one_step_from_optimum_keeps_sketch(unit_matrix):
    A = unit_matrix(6, 4)
    S0 = svd(A).U[:, :2].T
    trace = sgd_train([A], 2, TrainConfig(mode="dense", iterations=1, k=2), initial=S0)
    np.testing.assert_allclose(sk.densify(trace.final_sketch), S0, atol=1e-10)
    assert len(trace.records) == 1


def test_single_step_matches_hand_computed_gradient():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((4, 3))
    A /= np.linalg.norm(A)
    S0 = rng.standard_normal((2, 4))
    eta = 0.1
    trace = sgd_train([A], 2, TrainConfig(mode="dense", iterations=1, k=1, eta=eta), initial=S0)

    U = np.linalg.svd(A, full_matrices=False)[0]
    SU = S0 @ U
    E = SU[:, :1].T @ SU - np.eye(1, 3)
    grad = 2.0 * (SU @ E.T @ U[:, :1].T + SU[:, :1] @ E @ U.T)
    np.testing.assert_allclose(sk.densify(trace.final_sketch), S0 - eta * grad, atol=1e-10)


def test_fix_mode_keeps_support(rng):
    data = _dataset(rng, 5, 12, 6)
    supports = []
    config = TrainConfig(mode="fix", s=2, iterations=30, k=2, seed=3, log_every=10)
    trace = sgd_train(data, 4, config, on_step=lambda record, S: supports.append(S != 0.0))
    initial = sk.random_sparse_init(4, 12, 2, seed=3).support()
    assert all(np.array_equal(mask, initial) for mask in supports)
    assert trace.final_sketch.support().sum() <= initial.sum()
    assert len(trace.records) == 30
    assert [r.iteration for r in trace.records if r.scw_loss_train_mean is not None] == [10, 20, 30]


def test_scw_metrics_follow_their_cadence(rng):
    data = _dataset(rng, 4, 10, 5)
    config = TrainConfig(mode="learn", s=2, iterations=12, k=2, seed=2, log_every=5, sampled_scw_every=4)
    records = train(data, 3, config).records
    assert [r.iteration for r in records if r.scw_loss_sampled is not None] == [4, 8, 12]
    assert [r.iteration for r in records if r.scw_loss_train_mean is not None] == [5, 10, 12]
    assert all(r.surrogate_loss >= 0 for r in records)
    quiet_config = TrainConfig(mode="learn", s=2, iterations=12, k=2, seed=2, log_every=0, sampled_scw_every=0)
    quiet = train(data, 3, quiet_config)
    assert all(r.scw_loss_sampled is None and r.scw_loss_train_mean is None for r in quiet.records)
    assert [r.surrogate_loss for r in quiet.records] == [r.surrogate_loss for r in records]


@pytest.mark.parametrize("field", ["log_every", "sampled_scw_every"])
def test_negative_cadence_is_rejected(field):
    with pytest.raises(ParameterError, match=field):
        TrainConfig(mode="fix", **{field: -1})


def test_learn_mode_respects_budget(rng):
    data = _dataset(rng, 5, 12, 6)
    trace = iht_train(data, 4, TrainConfig(mode="learn", s=1, iterations=40, k=2, seed=1, log_every=0))
    assert all(r.max_column_nnz <= 1 for r in trace.records)
    assert max(len(col) for col in trace.final_sketch.columns) <= 1


def test_learn_with_full_budget_equals_dense(rng):
    data = _dataset(rng, 4, 10, 5)
    dense = sgd_train(data, 3, TrainConfig(mode="dense", iterations=25, k=2, seed=8, log_every=0))
    learn = iht_train(data, 3, TrainConfig(mode="learn", s=3, iterations=25, k=2, seed=8, log_every=0))
    assert learn.records == dense.records
    np.testing.assert_array_equal(sk.densify(learn.final_sketch), sk.densify(dense.final_sketch))


def test_training_is_deterministic(rng):
    data = _dataset(rng, 4, 10, 5)
    config = TrainConfig(mode="learn", s=2, iterations=20, k=2, seed=5, log_every=5)
    first, second = train(data, 4, config), train(data, 4, config)
    assert first == second


def test_training_reduces_surrogate_loss(rng):
    data = _dataset(rng, 6, 12, 6)
    config = TrainConfig(mode="dense", iterations=200, k=2, seed=0, log_every=0)
    trace = train(data, 4, config)
    start = np.mean([surrogate_loss(sk.random_sparse_init(4, 12, 4, seed=0), A, 2) for A in data])
    end = np.mean([surrogate_loss(trace.final_sketch, A, 2) for A in data])
    assert end < start


def test_divergence_guard(rng):
    data = _dataset(rng, 2, 8, 4)
    config = TrainConfig(mode="dense", eta=50.0, iterations=50, k=2, divergence_limit=1e3)
    with pytest.raises(DivergenceError):
        sgd_train(data, 3, config, initial=5.0 * rng.standard_normal((3, 8)))


def test_mode_mismatch_and_bad_inputs(rng):
    data = _dataset(rng, 2, 8, 4)
    with pytest.raises(ParameterError):
        sgd_train(data, 3, TrainConfig(mode="learn", k=2))
    with pytest.raises(ParameterError):
        iht_train(data, 3, TrainConfig(mode="fix", k=2))
    with pytest.raises(ParameterError):
        train([], 3, TrainConfig(mode="fix", k=2))
    with pytest.raises(ParameterError):
        train(data, 3, TrainConfig(mode="fix", s=4, k=2))
    with pytest.raises(ContractError):
        train([3.0 * data[0]], 3, TrainConfig(mode="fix", k=2))
