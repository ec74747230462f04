"""Iterative active-set correction.

Starting from a candidate set, repeatedly solve the restricted model and
add every tight coordinate whose direction component points out of the
box, until the direction is feasible as is.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _box_kernels as _k
from .geometry import ActiveSet, stationarity_residual


@dataclass
class CorrectionOutcome:
    final_set: ActiveSet
    direction: np.ndarray
    loop_count: int
    added_per_round: list = field(default_factory=list)
    n_tight: int = 0

    @property
    def rounds(self):
        """Number of rounds that grew the set."""
        return len(self.added_per_round)


def correct(x, g, b, a_init, mem):
    """Grow ``a_init`` until the model direction is instantaneously feasible.

    ``a_init`` must contain only tight coordinates.  Raises
    :class:`nqn.lbfgs.NumericalBreakdown` if a restricted solve breaks down.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    tight = _k.tight_mask(x, b.lower, b.upper)
    n_tight = int(np.count_nonzero(tight))
    if n_tight == 0:
        p = mem.solve(g, None).direction
        return CorrectionOutcome(ActiveSet.empty(x.shape[0]), p, 1, [], 0)
    if np.any(a_init.mask & ~tight):
        raise ValueError("initial active set contains coordinates that are not tight")

    at_lower = a_init.at_lower.copy()
    at_upper = a_init.at_upper.copy()
    added = []
    loops = 0
    while True:
        loops += 1
        active = at_lower | at_upper
        p = mem.solve(g, active).direction
        blocked = _k.blocked_mask(x, p, b.lower, b.upper, active)
        if not blocked.any():
            return CorrectionOutcome(ActiveSet(at_lower, at_upper), p, loops, added, n_tight)
        idx = np.flatnonzero(blocked)
        added.append(idx)
        # p_i < 0 can only be blocked by the lower bound, p_i > 0 by the upper
        at_lower[idx] |= p[idx] < 0.0
        at_upper[idx] |= (p[idx] > 0.0) & ~at_lower[idx]


def lemma1_check(x, g, b, outcome):
    """False only if the loop produced ``p = 0`` at a non-stationary point."""
    if np.any(outcome.direction != 0.0):
        return True
    return not np.any(stationarity_residual(x, g, b) != 0.0)
