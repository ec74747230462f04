import numpy as np
import pytest

from nqn.correction import correct, lemma1_check
from nqn.geometry import ActiveSet, Bounds, binding_set, stationarity_residual, t_operator, \
    tight_set
from nqn.lbfgs import LBFGSMemory

from helpers import random_box_point, random_memory


def test_no_tight_coordinates_means_one_unrestricted_solve():
    mem = random_memory(np.random.default_rng(0), 4, 2)
    b = Bounds(-np.ones(4), np.ones(4))
    x = np.zeros(4)
    g = np.array([1.0, -2.0, 0.5, 0.0])
    out = correct(x, g, b, ActiveSet.empty(4), mem)
    assert out.loop_count == 1 and len(out.final_set) == 0 and out.rounds == 0
    np.testing.assert_allclose(out.direction, mem.solve(g).direction)


def test_feasible_direction_needs_no_correction():
    mem = LBFGSMemory(3, 3, theta=1.0)
    b = Bounds(np.zeros(3), np.full(3, 5.0))
    x = np.array([0.0, 1.0, 2.0])
    g = np.array([1.0, 1.0, -1.0])  # binding at 0; free direction is -g
    a0 = binding_set(x, g, b)
    out = correct(x, g, b, a0, mem)
    assert out.loop_count == 1 and out.final_set == a0
    np.testing.assert_allclose(out.direction, [0.0, -1.0, 1.0])


def test_myopic_2d_limit_model_adds_first_coordinate():
    # curvature huge along (1, -1), so the inverse model is close to a multiple of [[1,1],[1,1]]
    mem = LBFGSMemory(2, 1, theta=1.0)
    v = np.array([1.0, -1.0])
    assert mem.update(1e-3 * v, 1e3 * v)
    a = -0.6
    b = Bounds(np.array([-np.inf, -np.inf]), np.array([-0.5, np.inf]))
    x = np.array([-0.5, a])
    g = np.array([0.5 + 0.1 * a, -1.05 + 0.01 * a])
    a0 = binding_set(x, g, b)
    assert len(a0) == 0
    out = correct(x, g, b, a0, mem)
    assert out.final_set == ActiveSet.from_indices(2, upper=[0])
    assert out.loop_count == 2
    assert [list(c) for c in out.added_per_round] == [[0]]
    assert out.direction[0] == 0.0 and out.direction[1] > 0.0


def test_rejects_non_tight_initial_set():
    mem = LBFGSMemory(2, 1)
    b = Bounds(np.zeros(2), np.ones(2))
    with pytest.raises(ValueError):
        correct(np.array([0.0, 0.5]), np.ones(2), b, ActiveSet.from_indices(2, lower=[1]), mem)


def test_zero_gradient_gives_zero_direction_and_lemma_holds():
    mem = random_memory(np.random.default_rng(1), 3, 2)
    b = Bounds(np.zeros(3), np.ones(3))
    x = np.array([0.0, 0.3, 1.0])
    g = np.zeros(3)
    out = correct(x, g, b, binding_set(x, g, b), mem)
    assert not np.any(out.direction) and lemma1_check(x, g, b, out)


def test_constructed_stationary_point():
    mem = random_memory(np.random.default_rng(2), 4, 3)
    b = Bounds(np.zeros(4), np.full(4, 2.0))
    x = np.array([0.0, 1.0, 0.0, 2.0])
    g = np.array([3.0, 0.0, 0.5, -1.0])
    out = correct(x, g, b, binding_set(x, g, b), mem)
    assert not np.any(out.direction)
    assert not np.any(stationarity_residual(x, g, b))
    assert lemma1_check(x, g, b, out)


def test_properties_on_random_instances():
    rng = np.random.default_rng(3)
    for trial in range(500):
        n = int(rng.integers(1, 10))
        b, x = random_box_point(rng, n, p_tight=0.6)
        mem = random_memory(rng, n, int(rng.integers(1, 6)))
        g = rng.standard_normal(n)
        a0 = binding_set(x, g, b)
        out = correct(x, g, b, a0, mem)
        tight = tight_set(x, b)
        # nesting, bounded rounds, feasibility of the final direction
        assert a0.issubset(out.final_set)
        assert not np.any(out.final_set.mask & ~tight)
        assert out.rounds <= int(tight.sum())
        assert out.loop_count == out.rounds + 1
        np.testing.assert_array_equal(t_operator(x, out.direction, b), out.direction)
        assert np.all(out.direction[out.final_set.mask] == 0.0)
        seen = a0.mask.copy()
        for added in out.added_per_round:
            assert len(added) > 0 and not np.any(seen[added])
            seen[added] = True
        assert lemma1_check(x, g, b, out)
