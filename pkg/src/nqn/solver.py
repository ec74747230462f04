"""The NQN outer loop.

Each iteration checks first-order stationarity, picks an active set by one
of four rules, computes a restricted L-BFGS direction (optionally running
the correction loop), performs the projected weak Wolfe line search and
updates the curvature memory.

===========  =====================  ==========
variant      initial active set     correction
===========  =====================  ==========
``V1``       binding set of ``g``   no
``V2``       predicted set          no
``V3``       binding set of ``g``   yes
``V4``       predicted set          yes
===========  =====================  ==========

The predicted set is the union of the binding sets of ``g`` and of the
least-norm combination of recent gradients.
"""
import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import _box_kernels as _k
from .correction import correct
from .geometry import ActiveSet
from .lbfgs import LBFGSMemory, NumericalBreakdown, theta_init
from .linesearch import LineSearchConfig, LSStatus, modified_wolfe
from .subgradient import GradientHistory, QPNotConverged, min_norm_combination, \
    predict_active_set

VARIANTS = ("V1", "V2", "V3", "V4")


class Termination(str, enum.Enum):
    STATIONARY = "Stationary"
    BUDGET = "BudgetExhausted"
    NO_DIRECTION = "NoDirection"
    LS_ERROR = "LineSearchError"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "V3"
    m: int = 20
    M: int = 20
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    eps_skip: float = 1e-8
    budget: int = None  # None means budget_multiplier * n
    budget_multiplier: int = 100
    stationarity_tol: float = 0.0
    record_active_sets: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError("variant must be one of %s, got %r" % (VARIANTS, self.variant))
        if self.m < 1 or self.M < 1:
            raise ValueError("m and M must be >= 1")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.budget_multiplier < 1:
            raise ValueError("budget_multiplier must be >= 1")
        if self.stationarity_tol < 0:
            raise ValueError("stationarity_tol must be >= 0")

    @property
    def predicts(self):
        return self.variant in ("V2", "V4")

    @property
    def corrects(self):
        return self.variant in ("V3", "V4")

    def budget_for(self, n):
        return int(self.budget) if self.budget is not None else self.budget_multiplier * int(n)


@dataclass
class IterationInfo:
    """What happened in one iteration; handed to the solver callback."""
    k: int
    x: np.ndarray
    f: float
    g: np.ndarray
    initial_set: ActiveSet
    final_set: ActiveSet
    n_tight: int
    correction_rounds: int
    direction: np.ndarray
    line_search: object
    grad_evals: int
    pair_stored: bool = False
    qp_fallback: bool = False


@dataclass
class RunRecord:
    f_history: list = field(default_factory=list)
    evals_history: list = field(default_factory=list)
    grad_eval_count: int = 0
    active_set_sizes: list = field(default_factory=list)
    correction_rounds: list = field(default_factory=list)
    ls_statuses: list = field(default_factory=list)
    termination: Termination = None
    qp_fallbacks: int = 0
    skipped_updates: int = 0
    best_f: float = np.inf
    best_x: np.ndarray = None
    wall_time: float = 0.0
    active_sets: list = None  # final set indices per iteration, if recorded

    @property
    def iterations(self):
        return len(self.active_set_sizes)


def select_active_set(variant, x, g, history, b, stats=None):
    """Initial active set for ``variant`` and whether correction follows.

    For ``V2``/``V4`` a failed subgradient QP falls back to the binding
    set; ``stats["qp_fallbacks"]`` is incremented when ``stats`` is given.
    """
    if variant not in VARIANTS:
        raise ValueError("unknown variant %r" % (variant,))
    lo, up = _k.binding_masks(x, g, b.lower, b.upper)
    use_correction = variant in ("V3", "V4")
    if variant in ("V1", "V3") or history is None or len(history) == 0:
        return ActiveSet(lo, up), use_correction
    try:
        g_tilde = min_norm_combination(history).g_tilde
    except QPNotConverged:
        if stats is not None:
            stats["qp_fallbacks"] = stats.get("qp_fallbacks", 0) + 1
        return ActiveSet(lo, up), use_correction
    return predict_active_set(x, g, g_tilde, b), use_correction


def nqn_solve(problem, x0, cfg=None, callback=None):
    """Run NQN from ``x0`` (which must lie in the box) and return a :class:`RunRecord`.

    ``problem`` needs ``bounds`` and ``evaluate(x) -> (f, g)``.  Terminal
    conditions are reported in ``RunRecord.termination``; nothing is raised
    for them.
    """
    cfg = cfg or SolverConfig()
    b = problem.bounds
    x = np.ascontiguousarray(x0, dtype=float).copy()
    n = x.shape[0]
    if not b.contains(x):
        raise ValueError("x0 is not inside the bounds; project it first")
    budget = cfg.budget_for(n)
    t_start = time.perf_counter()

    rec = RunRecord()
    rec.active_sets = [] if cfg.record_active_sets else None
    evals = [0]

    def fg(z):
        evals[0] += 1
        return problem.evaluate(z)

    f, g = fg(x)
    mem = LBFGSMemory(n, cfg.m)
    history = GradientHistory(n, cfg.M) if cfg.predicts else None
    if history is not None:
        history.push(x, g)
    stats = {}
    rec.f_history.append(f)
    rec.evals_history.append(evals[0])
    rec.best_f, rec.best_x = f, x.copy()

    k = 0
    while True:
        if float(np.max(np.abs(_k.t_operator(x, -g, b.lower, b.upper)), initial=0.0)) \
                <= cfg.stationarity_tol:
            rec.termination = Termination.STATIONARY
            break
        if evals[0] >= budget:
            rec.termination = Termination.BUDGET
            break

        mem.theta = theta_init(g)
        before = stats.get("qp_fallbacks", 0)
        a_init, use_correction = select_active_set(cfg.variant, x, g, history, b, stats)
        try:
            if use_correction:
                out = correct(x, g, b, a_init, mem)
                a_final, p, rounds, n_tight = out.final_set, out.direction, out.rounds, \
                    out.n_tight
            else:
                p = mem.solve(g, a_init.mask).direction
                a_final, rounds = a_init, 0
                n_tight = int(np.count_nonzero(_k.tight_mask(x, b.lower, b.upper)))
        except NumericalBreakdown:
            rec.termination = Termination.NO_DIRECTION
            break

        ls = modified_wolfe(x, p, b, fg, cfg.line_search, f0=f, g0=g)
        info = IterationInfo(k, x, f, g, a_init, a_final, n_tight, rounds, p, ls, evals[0],
                             qp_fallback=stats.get("qp_fallbacks", 0) > before)
        rec.active_set_sizes.append((len(a_init), len(a_final)))
        rec.correction_rounds.append(rounds)
        rec.ls_statuses.append(ls.status)
        if rec.active_sets is not None:
            rec.active_sets.append(a_final.indices)

        if ls.status == LSStatus.NO_DIRECTION:
            rec.termination = Termination.NO_DIRECTION
        elif ls.status == LSStatus.ERROR:
            rec.termination = Termination.LS_ERROR
        if not ls.accepted:
            if callback is not None:
                callback(info)
            break

        x_new, f_new, g_new = ls.x_new, ls.f_new, ls.g_new
        info.pair_stored = mem.update(x_new - x, g_new - g, cfg.eps_skip)
        if callback is not None:
            callback(info)
        x, f, g = x_new, f_new, g_new
        if history is not None:
            history.push(x, g)
        rec.f_history.append(f)
        rec.evals_history.append(evals[0])
        if f < rec.best_f:
            rec.best_f, rec.best_x = f, x.copy()
        k += 1

    rec.grad_eval_count = evals[0]
    rec.qp_fallbacks = stats.get("qp_fallbacks", 0)
    rec.skipped_updates = mem.n_skipped
    rec.wall_time = time.perf_counter() - t_start
    return rec
