"""Projected weak Wolfe bracketing line search.

The search runs along ``alpha -> P(x + alpha * pbar)`` with
``pbar = T(x, p)``.  A trial is accepted when

    f(x_t) - f(x) <= alpha * c1 * g^T pbar             (sufficient decrease)
    grad f(x_t)^T T(x_t, p) >= c2 * g^T pbar            (weak curvature)

Without bounds this is the Lewis-Overton bisection/doubling bracket.
"""
import enum
from dataclasses import dataclass

import numpy as np

from . import _box_kernels as _k

MAX_BRACKET_ITERS = 200


class LSStatus(str, enum.Enum):
    WOLFE = "WolfeStep"
    DECREASE = "DecreaseOnly"
    NO_DIRECTION = "NoDirection"
    ERROR = "SearchError"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class LineSearchConfig:
    c1: float = 1e-8
    c2: float = 0.9
    eps_abs: float = 1e-16
    eps_rel: float = 1e-6
    max_iters: int = MAX_BRACKET_ITERS

    def __post_init__(self):
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise ValueError("need 0 < c1 < c2 < 1, got c1=%g c2=%g" % (self.c1, self.c2))
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("bracketing tolerances must be positive")


@dataclass
class LineSearchOutcome:
    status: LSStatus
    alpha: float
    trial_count: int
    x_new: np.ndarray = None
    f_new: float = None
    g_new: np.ndarray = None
    pbar: np.ndarray = None
    slope: float = 0.0

    @property
    def accepted(self):
        return self.status in (LSStatus.WOLFE, LSStatus.DECREASE)


def max_breakpoint(x, p, b):
    """Largest step at which some coordinate of the ray reaches its bound.

    Coordinates that do not move, or that already sit on the bound they move
    towards, contribute ``+inf``.
    """
    return float(_k.max_breakpoint(np.ascontiguousarray(x, dtype=float),
                                   np.ascontiguousarray(p, dtype=float), b.lower, b.upper))


def armijo_holds(f0, slope, f_trial, alpha, c1):
    # difference form keeps the test strict when alpha*c1*slope is below ulp(f0)
    return bool(f_trial - f0 <= alpha * c1 * slope)


def curvature_holds(g_trial, x_trial, p, b, slope, c2):
    return bool(g_trial @ _k.t_operator(x_trial, p, b.lower, b.upper) >= c2 * slope)


def modified_wolfe(x, p, b, fg, cfg=None, f0=None, g0=None):
    """Find a step along the projected path from ``x`` in direction ``p``.

    ``fg(x)`` returns ``(f, grad)``; each call is one trial.  ``f0``/``g0``
    are the values at ``x`` when the caller already has them.
    """
    cfg = cfg or LineSearchConfig()
    x = np.ascontiguousarray(x, dtype=float)
    p = np.ascontiguousarray(p, dtype=float)
    lo, up = b.lower, b.upper
    if f0 is None or g0 is None:
        f0, g0 = fg(x)
    gamma_max = float(_k.max_breakpoint(x, p, lo, up))
    lower_step = 0.0
    upper_step = gamma_max
    alpha = min(1.0, upper_step)
    pbar = _k.t_operator(x, p, lo, up)
    if not np.any(pbar != 0.0):
        return LineSearchOutcome(LSStatus.NO_DIRECTION, 0.0, 0, pbar=pbar)
    slope = float(g0 @ pbar)
    if not slope < 0.0:
        # Armijo is vacuous along a non-descent path and would accept a stall
        return LineSearchOutcome(LSStatus.ERROR, 0.0, 0, pbar=pbar, slope=slope)

    trials = 0
    kept = None  # evaluation at alpha == lower_step
    for _ in range(cfg.max_iters):
        x_t = _k.project(x + alpha * pbar, lo, up)
        f_t, g_t = fg(x_t)
        trials += 1
        # non-finite values count as failed decrease so they never become iterates
        finite = np.isfinite(f_t) and np.all(np.isfinite(g_t))
        if not (finite and armijo_holds(f0, slope, f_t, alpha, cfg.c1)):
            upper_step = alpha
        elif not curvature_holds(g_t, x_t, p, b, slope, cfg.c2):
            lower_step = alpha
            kept = (x_t, f_t, g_t)
        else:
            return LineSearchOutcome(LSStatus.WOLFE, alpha, trials, x_t, float(f_t), g_t,
                                     pbar, slope)

        if upper_step < gamma_max:
            alpha = 0.5 * (upper_step + lower_step)
        else:
            alpha = min(2.0 * lower_step, upper_step)

        if upper_step - lower_step < cfg.eps_abs + cfg.eps_rel * lower_step:
            if lower_step > 0.0:
                x_t, f_t, g_t = kept
                return LineSearchOutcome(LSStatus.DECREASE, lower_step, trials, x_t,
                                         float(f_t), g_t, pbar, slope)
            return LineSearchOutcome(LSStatus.ERROR, 0.0, trials, pbar=pbar, slope=slope)

    return LineSearchOutcome(LSStatus.ERROR, 0.0, trials, pbar=pbar, slope=slope)
