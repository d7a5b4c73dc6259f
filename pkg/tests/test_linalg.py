import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invcone.errors import RankDeficientError
from invcone.linalg import eig, expm, expm_frechet, phi1, saad_expm, solve_least_squares


def taylor(A, k0=0, terms=40):
    # sum_k A^k / (k + k0)!
    out = np.zeros_like(A)
    P = np.eye(A.shape[0])
    for k in range(terms):
        out = out + P / math.factorial(k + k0)
        P = P @ A
    return out


def test_expm_matches_series(rng):
    for _ in range(20):
        A = rng.standard_normal((5, 5))
        A /= np.linalg.norm(A, 2)
        assert np.allclose(expm(A), taylor(A), rtol=0, atol=1e-14)


def test_expm_of_zero_and_commuting_sum(rng):
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))
    A = rng.standard_normal((4, 4))
    assert np.allclose(expm(2 * A), expm(A) @ expm(A), rtol=1e-12)


def test_expm_rejects_bad_input():
    with pytest.raises(ValueError):
        expm(np.ones((2, 3)))
    with pytest.raises(ValueError):
        expm(np.array([[np.nan]]))


def test_phi1_series_and_singular_argument(rng):
    A = rng.standard_normal((4, 4))
    A /= 2 * np.linalg.norm(A, 2)
    assert np.allclose(phi1(A), taylor(A, k0=1), atol=1e-14)
    assert np.allclose(phi1(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(A @ phi1(A), expm(A) - np.eye(4), atol=1e-14)


def test_saad_identity_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        B = rng.standard_normal((n, n))
        B /= max(1.0, np.linalg.norm(B, 2))
        c = rng.standard_normal(n)
        X = saad_expm(B, c)
        ref = taylor(B, k0=1) @ c
        scale = max(1.0, np.linalg.norm(ref))
        assert np.linalg.norm(X[:n, n] - ref) <= 1e-12 * scale
        assert np.allclose(X[:n, :n], expm(B), rtol=0, atol=1e-13)
        assert np.all(X[n, :n] == 0) and X[n, n] == 1


def test_frechet_against_finite_difference(rng):
    A = rng.standard_normal((4, 4)) * 0.5
    E = rng.standard_normal((4, 4))
    X, L = expm_frechet(A, E)
    h = 1e-6
    fd = (expm(A + h * E) - expm(A - h * E)) / (2 * h)
    assert np.allclose(X, expm(A))
    assert np.allclose(L, fd, atol=1e-8)


def test_eig_ordering():
    sp = eig(np.diag([0.5, -2.0, 1.0]))
    assert np.allclose(sp.eigenvalues, [-2.0, 1.0, 0.5])
    assert len(sp) == 3
    sp = eig(np.array([[0.0, -1.0], [1.0, 0.0]]), vectors=True)
    assert np.allclose(sp.moduli, 1.0)
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    for k in range(2):
        v = sp.eigenvectors[:, k]
        assert np.allclose(A @ v, sp.eigenvalues[k] * v)


def test_least_squares_normal_equations(rng):
    A = rng.standard_normal((8, 3))
    b = rng.standard_normal(8)
    x = solve_least_squares(A, b)
    assert np.allclose(A.T @ (A @ x - b), 0, atol=1e-12)


def test_least_squares_rank_deficiency(rng):
    A = rng.standard_normal((5, 2))
    A = np.hstack([A, A[:, :1]])
    with pytest.raises(RankDeficientError) as err:
        solve_least_squares(A, np.ones(5))
    assert err.value.rank == 2
    x = solve_least_squares(A, A @ np.ones(3), allow_rank_deficient=True)
    assert np.allclose(A @ x, A @ np.ones(3))
    with pytest.raises(ValueError):
        solve_least_squares(np.ones((2, 3)), np.ones(2))


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 3))
def test_expm_rotation(a, w):
    A = np.array([[a, -w], [w, a]])
    X = expm(A)
    ref = math.exp(a) * np.array([[math.cos(w), -math.sin(w)], [math.sin(w), math.cos(w)]])
    assert np.allclose(X, ref, rtol=1e-12, atol=1e-12)
