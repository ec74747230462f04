import numpy as np
import pytest

from nqn.geometry import Bounds
from nqn.linesearch import (LineSearchConfig, LSStatus, armijo_holds, curvature_holds,
                            max_breakpoint, modified_wolfe)

INF = np.inf


def _counted(fg):
    calls = []

    def wrapped(x):
        calls.append(np.array(x))
        return fg(x)
    return wrapped, calls


def _check_accepted(out, x, p, b, fg, cfg=LineSearchConfig()):
    f0, _ = fg(x)
    assert b.contains(out.x_new)
    assert armijo_holds(f0, out.slope, out.f_new, out.alpha, cfg.c1)
    if out.status is LSStatus.WOLFE:
        assert curvature_holds(out.g_new, out.x_new, p, b, out.slope, cfg.c2)


def test_max_breakpoint_examples():
    b = Bounds(np.array([0.0, 0.0]), np.array([10.0, 10.0]))
    assert max_breakpoint(np.array([5.0, 5.0]), np.array([1.0, -1.0]), b) == 5.0
    assert max_breakpoint(np.array([5.0, 5.0]), np.array([0.0, 0.0]), b) == INF
    # the second coordinate already sits on the bound it moves towards
    assert max_breakpoint(np.array([4.0, 0.0]), np.array([2.0, -1.0]), b) == INF
    lo = Bounds(np.array([-3.0]), np.array([INF]))
    assert max_breakpoint(np.zeros(1), np.array([-1.0]), lo) == 3.0
    two = Bounds(np.array([-INF, -INF]), np.array([2.0, 5.0]))
    assert max_breakpoint(np.zeros(2), np.ones(2), two) == 5.0
    # unbounded direction
    assert max_breakpoint(np.zeros(1), np.ones(1), Bounds.unbounded(1)) == INF


def test_unit_step_on_quadratic_is_wolfe():
    fg = lambda x: (0.5 * x @ x, x.copy())
    b = Bounds.unbounded(2)
    x = np.array([1.0, -2.0])
    out = modified_wolfe(x, -x, b, fg)
    assert out.status is LSStatus.WOLFE and out.alpha == 1.0 and out.trial_count == 1
    np.testing.assert_array_equal(out.x_new, [0.0, 0.0])


def test_blocked_direction_makes_no_evaluations():
    fg, calls = _counted(lambda x: (float(x[0]), np.array([1.0])))
    b = Bounds(np.zeros(1), np.ones(1))
    out = modified_wolfe(np.zeros(1), np.array([-1.0]), b, fg, f0=0.0, g0=np.array([1.0]))
    assert out.status is LSStatus.NO_DIRECTION and out.trial_count == 0 and not calls


def test_absolute_value_brackets_the_kink():
    fg = lambda x: (abs(float(x[0])), np.array([1.0 if x[0] >= 0 else -1.0]))
    b = Bounds.unbounded(1)
    x = np.array([1.0])
    out = modified_wolfe(x, np.array([-3.0]), b, fg)
    assert out.accepted
    _check_accepted(out, x, np.array([-3.0]), b, fg)
    assert out.f_new < 1.0


def test_unbounded_decrease_doubles_then_hits_steep_wall():
    # f = -x up to 1, then rising with slope 1e12; no Wolfe point exists close to the kink
    def fg(x):
        t = float(x[0])
        if t <= 1.0:
            return -t, np.array([-1.0])
        return -1.0 + 1e12 * (t - 1.0), np.array([1e12])
    b = Bounds.unbounded(1)
    x = np.array([0.0])
    p = np.array([1e-3])
    out = modified_wolfe(x, p, b, fg)
    assert out.accepted
    _check_accepted(out, x, p, b, fg)
    assert out.x_new[0] <= 1.0


def test_decrease_only_when_bracket_collapses():
    # curvature is never satisfied: slope stays negative wherever f decreases
    def fg(x):
        t = float(x[0])
        if t <= 1.0:
            return -t, np.array([-1.0])
        return -1.0 + 1e12 * (t - 1.0), np.array([1e12])
    x, p, b = np.array([0.0]), np.array([0.7]), Bounds.unbounded(1)
    out = modified_wolfe(x, p, b, fg)
    assert out.status is LSStatus.DECREASE
    assert out.f_new < 0.0 and out.x_new[0] <= 1.0
    _check_accepted(out, x, p, b, fg)


def test_ascent_direction_is_a_search_error():
    fg = lambda x: (0.5 * x @ x, x.copy())
    x = np.array([1.0])
    out = modified_wolfe(x, np.array([1.0]), Bounds.unbounded(1), fg)
    assert out.status is LSStatus.ERROR and out.x_new is None and out.alpha == 0.0
    assert out.trial_count == 0 and out.slope > 0.0


def test_non_finite_trials_are_never_accepted():
    def fg(x):
        t = float(x[0])
        if t > 0.5:
            return np.nan, np.array([np.nan])
        return (t - 0.4) ** 2, np.array([2 * (t - 0.4)])
    x = np.array([0.0])
    out = modified_wolfe(x, np.array([1.0]), Bounds.unbounded(1), fg)
    assert out.accepted and np.isfinite(out.f_new) and out.x_new[0] <= 0.5


def test_step_is_capped_at_the_last_breakpoint():
    fg = lambda x: (float(-x.sum()), -np.ones(x.size))
    b = Bounds(np.zeros(2), np.array([1.0, 2.0]))
    x = np.zeros(2)
    out = modified_wolfe(x, np.array([1.0, 1.0]), b, fg)
    # the projected path stops moving at alpha = 2
    assert out.alpha <= 2.0 and out.accepted
    np.testing.assert_allclose(out.x_new, [1.0, out.alpha])


def test_trial_count_bounded_by_cap():
    fg = lambda x: (float(x[0]) ** 2, np.array([2.0 * x[0]]))
    cfg = LineSearchConfig(max_iters=3)
    out = modified_wolfe(np.array([1.0]), np.array([-1e-9]), Bounds.unbounded(1), fg, cfg)
    assert out.trial_count <= 3


def test_config_validation():
    with pytest.raises(ValueError):
        LineSearchConfig(c1=0.5, c2=0.4)
    with pytest.raises(ValueError):
        LineSearchConfig(eps_abs=0.0)


def test_armijo_difference_form():
    assert armijo_holds(1.0, -1.0, 1.0 - 1e-20, 1.0, 1e-8) is False
    assert armijo_holds(0.0, -1.0, -1e-8, 1.0, 1e-8) is True


def test_random_smooth_searches_satisfy_conditions():
    rng = np.random.default_rng(0)
    for trial in range(200):
        n = int(rng.integers(1, 6))
        A = rng.standard_normal((n, n))
        A = A @ A.T + 0.1 * np.eye(n)
        c = rng.standard_normal(n)

        def fg(x, A=A, c=c):
            return (0.5 * x @ A @ x - c @ x + np.abs(x).sum(),
                    A @ x - c + np.where(x >= 0, 1.0, -1.0))
        b = Bounds(-rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n))
        x = rng.uniform(b.lower, b.upper)
        _, g = fg(x)
        p = -g * rng.uniform(0.1, 10)
        out = modified_wolfe(x, p, b, fg)
        if out.accepted:
            _check_accepted(out, x, p, b, fg)
        else:
            assert out.status in (LSStatus.ERROR, LSStatus.NO_DIRECTION)
