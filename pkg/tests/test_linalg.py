import numpy as np
import pytest
import scipy.linalg

from mtstep import linalg
from mtstep.errors import SingularMatrix


def random_spd(n, rng, shift=None):
    A = rng.standard_normal((n, n))
    return A @ A.T + (shift if shift is not None else n) * np.eye(n)


def test_solve_general_matches_numpy():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((7, 7))
    b = rng.standard_normal(7)
    x = linalg.solve_general(A, b)
    np.testing.assert_allclose(x, np.linalg.solve(A, b), rtol=1e-12)


def test_solve_general_matrix_rhs():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((5, 5))
    B = rng.standard_normal((5, 3))
    X = linalg.solve_general(A, B)
    np.testing.assert_allclose(A @ X, B, atol=1e-12)


def test_solve_general_indefinite_saddle():
    # Symmetric indefinite saddle-point block: LU with pivoting must cope.
    rng = np.random.default_rng(3)
    K = random_spd(4, rng)
    C = rng.standard_normal((2, 4))
    A = np.block([[K, C.T], [C, np.zeros((2, 2))]])
    b = rng.standard_normal(6)
    x = linalg.solve_general(A, b)
    np.testing.assert_allclose(A @ x, b, atol=1e-10)


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_solve_general_singular_raises():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrix):
        linalg.solve_general(A, np.ones(2))


def test_solve_general_rejects_nonsquare():
    with pytest.raises(ValueError):
        linalg.solve_general(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        linalg.solve_general(np.eye(3), np.ones(2))


def test_solve_general_empty():
    x = linalg.solve_general(np.zeros((0, 0)), np.zeros(0))
    assert x.shape == (0,)


def test_cholesky_round_trip():
    rng = np.random.default_rng(4)
    A = random_spd(6, rng)
    b = rng.standard_normal(6)
    factor = linalg.cholesky_factor(A)
    np.testing.assert_allclose(A @ linalg.cholesky_solve(factor, b), b, atol=1e-10)


def test_cholesky_matrix_rhs():
    rng = np.random.default_rng(5)
    A = random_spd(4, rng)
    B = rng.standard_normal((4, 2))
    factor = linalg.cholesky_factor(A)
    np.testing.assert_allclose(A @ linalg.cholesky_solve(factor, B), B, atol=1e-10)


def test_cholesky_rejects_indefinite():
    with pytest.raises(SingularMatrix):
        linalg.cholesky_factor(np.array([[1.0, 0.0], [0.0, -1.0]]))


def test_max_generalized_eigenvalue_vs_eigh():
    rng = np.random.default_rng(6)
    for n in (2, 5, 12):
        M = random_spd(n, rng)
        K = random_spd(n, rng, shift=0.5)
        expected = scipy.linalg.eigh(K, M, eigvals_only=True)[-1]
        got = linalg.max_generalized_eigenvalue(K, M)
        assert got == pytest.approx(expected, rel=1e-6)


def test_max_generalized_eigenvalue_identity_mass():
    K = np.diag([1.0, 4.0, 9.0])
    got = linalg.max_generalized_eigenvalue(K, np.eye(3))
    assert got == pytest.approx(9.0, rel=1e-7)


def test_max_generalized_eigenvalue_zero_stiffness():
    assert linalg.max_generalized_eigenvalue(np.zeros((3, 3)), np.eye(3)) == 0.0


def test_max_generalized_eigenvalue_shape_mismatch():
    with pytest.raises(ValueError):
        linalg.max_generalized_eigenvalue(np.eye(2), np.eye(3))
