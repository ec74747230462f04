import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nqn.geometry import ActiveSet, Bounds, binding_set
from nqn.subgradient import (GradientHistory, QPNotConverged, min_norm_combination,
                             min_norm_simplex, predict_active_set, simplex_kkt_residual)

from helpers import simplex_grid


def _grid_min(P, step=1e-3):
    V = simplex_grid(P.shape[0], step) @ P
    return V[np.argmin(np.einsum("ij,ij->i", V, V))]


@pytest.mark.parametrize("l", [1, 2, 3])
def test_matches_grid_search(l):
    rng = np.random.default_rng(l)
    for trial in range(15):
        n = int(rng.integers(2, 6))
        P = rng.standard_normal((l, n))
        got = min_norm_combination(P).g_tilde
        assert np.linalg.norm(got - _grid_min(P)) <= 2e-3


@pytest.mark.parametrize("l", [2, 5, 10, 20])
def test_kkt_and_simplex_on_random_gram_matrices(l):
    rng = np.random.default_rng(10 + l)
    for trial in range(50):
        n = int(rng.integers(1, 30))
        P = rng.standard_normal((l, n)) * np.exp(rng.uniform(-2, 2, size=(l, 1)))
        G = P @ P.T
        lam, _ = min_norm_simplex(G)
        assert np.all(lam >= 0.0)
        assert abs(lam.sum() - 1.0) <= 1e-10
        assert simplex_kkt_residual(G, lam) <= 1e-8


def test_myopic_2d_pair_gives_known_combination():
    # the two smooth-piece gradients of |x1 - x2| + (x1 + 0.1 x2)^2 / 2 at (-0.5, -0.5)
    P = np.array([[0.45, -1.055], [-1.55, 0.945]])
    res = min_norm_combination(P)
    np.testing.assert_allclose(res.g_tilde, [-0.3025, -0.3025], atol=1e-12)
    assert res.kkt_residual <= 1e-12


def test_single_gradient_is_returned_unchanged():
    g = np.array([1.0, -2.0])
    res = min_norm_combination(g)
    np.testing.assert_array_equal(res.g_tilde, g)
    np.testing.assert_array_equal(res.lam, [1.0])


def test_origin_in_hull_gives_zero():
    P = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert np.linalg.norm(min_norm_combination(P).g_tilde) <= 1e-12


def test_iteration_cap_raises():
    rng = np.random.default_rng(0)
    P = rng.standard_normal((8, 3))
    with pytest.raises(QPNotConverged):
        min_norm_simplex(P @ P.T, max_iter=1)


def test_empty_inputs_rejected():
    with pytest.raises(ValueError):
        min_norm_simplex(np.empty((0, 0)))
    with pytest.raises(ValueError):
        min_norm_combination(GradientHistory(2))


def test_history_is_bounded_fifo():
    h = GradientHistory(2, capacity=3)
    for k in range(5):
        h.push(np.zeros(2), np.array([k, 0.0]))
    assert len(h) == 3
    np.testing.assert_array_equal(h.gradients()[:, 0], [2, 3, 4])
    with pytest.raises(ValueError):
        h.push(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        GradientHistory(2, capacity=0)


@st.composite
def gradient_sets(draw):
    l = draw(st.integers(1, 8))
    n = draw(st.integers(1, 6))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return np.random.default_rng(seed).standard_normal((l, n))


@settings(max_examples=150, deadline=None)
@given(gradient_sets())
def test_norm_no_larger_than_any_vertex(P):
    g = min_norm_combination(P).g_tilde
    assert np.linalg.norm(g) <= np.min(np.linalg.norm(P, axis=1)) + 1e-12


@settings(max_examples=100, deadline=None)
@given(gradient_sets())
def test_duplicating_an_entry_leaves_result_unchanged(P):
    g1 = min_norm_combination(P).g_tilde
    g2 = min_norm_combination(np.vstack([P, P[:1]])).g_tilde
    np.testing.assert_allclose(g1, g2, atol=1e-9)


def test_predict_with_same_gradient_is_binding_set():
    b = Bounds(np.zeros(3), np.ones(3))
    x = np.array([0.0, 1.0, 0.5])
    g = np.array([1.0, 1.0, 1.0])
    assert predict_active_set(x, g, g, b) == binding_set(x, g, b)


def test_predict_on_myopic_2d_marks_first_coordinate():
    a = -0.6
    b = Bounds(np.array([-np.inf, -np.inf]), np.array([-0.5, np.inf]))
    x = np.array([-0.5, a])
    g = np.array([0.5 + 0.1 * a, -1.05 + 0.01 * a])
    g_tilde = np.array([-0.3025, -0.3025])
    assert len(binding_set(x, g, b)) == 0
    assert predict_active_set(x, g, g_tilde, b) == ActiveSet.from_indices(2, upper=[0])


def test_predict_interior_point_is_empty():
    b = Bounds(np.zeros(2), np.ones(2))
    x = np.array([0.5, 0.5])
    assert len(predict_active_set(x, np.ones(2), -np.ones(2), b)) == 0
