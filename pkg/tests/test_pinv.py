import numpy as np
import pytest

from sketchlab.core.errors import ContractError, ParameterError
from sketchlab.lowrank.pinv import (
    DEFAULT_COEFF_FLOOR,
    DEFAULT_COEFF_TOL,
    FloatOps,
    char_poly_coeffs,
    decell_kernel,
    inverse_cayley_hamilton,
    penrose_defects,
    pinv_decell,
    pinv_greedy_projector,
    pinv_svd_oracle,
)


def _with_rank(rng, m, cols, r):
    if r == 0:
        return np.zeros((m, cols))
    U, _ = np.linalg.qr(rng.standard_normal((m, r)))
    V, _ = np.linalg.qr(rng.standard_normal((cols, r)))
    return (U * rng.uniform(0.5, 1.0, size=r)) @ V.T * rng.uniform(0.1, 10.0)


def test_decell_matches_oracle_on_random_matrices():
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 1000:
        m = int(rng.integers(1, 9))
        r = int(rng.integers(0, m + 1))
        Z = _with_rank(rng, m, m + int(rng.integers(0, 4)), r)
        P = pinv_decell(Z)
        ref = pinv_svd_oracle(Z)
        if r == 0:
            assert not np.any(P)
        else:
            assert np.linalg.norm(P - ref) / np.linalg.norm(ref) <= 1e-7
        assert max(penrose_defects(Z, P)) <= 1e-7
        checked += 1


# błąd c_r w float64 rośnie jak eps/c_r, czyli jak 1/σ_min²
@pytest.mark.parametrize(("sigma_min", "max_m", "rtol"), [(1e-1, 5, 1e-6), (1e-2, 5, 1e-5), (1e-3, 4, 1e-4)])
def test_decell_with_small_trailing_singular_value(sigma_min, max_m, rtol):
    rng = np.random.default_rng(7)
    for _ in range(200):
        m = int(rng.integers(2, max_m + 1))
        cols = m + int(rng.integers(0, 4))
        U, _ = np.linalg.qr(rng.standard_normal((m, m)))
        V, _ = np.linalg.qr(rng.standard_normal((cols, m)))
        sigma = rng.uniform(0.5, 1.0, size=m)
        sigma[-1] = sigma_min
        Z = (U * sigma) @ V.T * rng.uniform(0.1, 10.0)
        ref = pinv_svd_oracle(Z)
        assert np.linalg.norm(pinv_decell(Z) - ref) / np.linalg.norm(ref) <= rtol


def test_decell_rank_ignores_singular_values_below_tolerance():
    Z = np.diag([1.0, 1e-7])
    P, r = decell_kernel(Z, FloatOps(DEFAULT_COEFF_TOL, DEFAULT_COEFF_FLOOR))
    assert r == 1
    np.testing.assert_allclose(P, Z.T, atol=1e-12)


def test_decell_of_zero_matrix_is_zero():
    P = pinv_decell(np.zeros((3, 5)))
    assert P.shape == (5, 3)
    assert not np.any(P)


def test_decell_wide_and_tall(rng):
    for shape in [(2, 6), (6, 2)]:
        Z = rng.standard_normal(shape)
        np.testing.assert_allclose(pinv_decell(Z), np.linalg.pinv(Z), atol=1e-8)


def test_char_poly_matches_numpy(rng):
    X = rng.standard_normal((4, 4))
    M = X @ X.T
    poly = char_poly_coeffs(M)
    assert poly.degree == 4
    np.testing.assert_allclose(poly.coeffs, np.poly(M)[1:], rtol=1e-9, atol=1e-9)
    for lam in np.linalg.eigvalsh(M):
        assert abs(poly.evaluate(lam)) <= 1e-8 * max(1.0, float(np.abs(np.poly(M)).max()))


def test_char_poly_requires_square():
    with pytest.raises(ParameterError):
        char_poly_coeffs(np.zeros((2, 3)))


def test_inverse_cayley_hamilton(rng):
    M = np.eye(5) + 0.1 * rng.standard_normal((5, 5))
    np.testing.assert_allclose(inverse_cayley_hamilton(M), np.linalg.inv(M), rtol=1e-8, atol=1e-10)


def test_inverse_cayley_hamilton_rejects_singular():
    with pytest.raises(ContractError):
        inverse_cayley_hamilton(np.array([[1.0, 2.0], [2.0, 4.0]]))


@pytest.mark.parametrize("rank", [0, 1, 2, 3])
def test_greedy_projector_matches_oracle(rng, rank):
    Z = _with_rank(rng, 3, 5, rank)
    np.testing.assert_allclose(pinv_greedy_projector(Z), pinv_svd_oracle(Z) @ Z, atol=1e-8)


def test_greedy_projector_with_dependent_rows(rng):
    a, b = rng.standard_normal((2, 4))
    Z = np.vstack([a, 2.0 * a, b, a - b])
    P = pinv_greedy_projector(Z)
    np.testing.assert_allclose(P, pinv_svd_oracle(Z) @ Z, atol=1e-8)
    np.testing.assert_allclose(P @ P, P, atol=1e-8)


def test_penrose_defects_detect_wrong_inverse(rng):
    Z = rng.standard_normal((3, 4))
    assert max(penrose_defects(Z, pinv_svd_oracle(Z))) <= 1e-10
    assert max(penrose_defects(Z, 2.0 * pinv_svd_oracle(Z))) > 0.1
