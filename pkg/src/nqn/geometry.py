"""Box-constraint primitives: projection, the instantaneous projection
operator, binding sets and the stationarity residual.

Tightness is exact floating-point equality with a bound.  Iterates only
become tight through :func:`project`, which writes the bound value itself.
"""
from dataclasses import dataclass

import numpy as np

from . import _box_kernels as _k


class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.ascontiguousarray(self.lower, dtype=float)
        up = np.ascontiguousarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != up.shape:
            raise ContractViolation("lower and upper must be 1-d arrays of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(up)):
            raise ContractViolation("bounds may not contain NaN")
        if np.any(lo > up):
            raise ContractViolation("infeasible bounds: lower > upper somewhere")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def unbounded(cls, n):
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    @property
    def n(self):
        return self.lower.shape[0]

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class ActiveSet:
    """Coordinates held at a bound, each tagged lower or upper.

    ``at_lower`` and ``at_upper`` are disjoint boolean masks.
    """

    at_lower: np.ndarray
    at_upper: np.ndarray

    @classmethod
    def empty(cls, n):
        return cls(np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))

    @classmethod
    def from_indices(cls, n, lower=(), upper=()):
        lo = np.zeros(n, dtype=bool)
        up = np.zeros(n, dtype=bool)
        lo[list(lower)] = True
        up[list(upper)] = True
        return cls(lo, up & ~lo)

    @property
    def mask(self):
        return self.at_lower | self.at_upper

    @property
    def indices(self):
        return np.flatnonzero(self.mask)

    def __len__(self):
        return int(np.count_nonzero(self.at_lower) + np.count_nonzero(self.at_upper))

    def __contains__(self, i):
        return bool(self.at_lower[i] or self.at_upper[i])

    def __eq__(self, other):
        if not isinstance(other, ActiveSet):
            return NotImplemented
        return bool(
            np.array_equal(self.at_lower, other.at_lower)
            and np.array_equal(self.at_upper, other.at_upper)
        )

    __hash__ = None

    def union(self, other):
        lo = self.at_lower | other.at_lower
        return ActiveSet(lo, (self.at_upper | other.at_upper) & ~lo)

    def issubset(self, other):
        return bool(np.all(other.mask[self.mask]))

    def __repr__(self):
        return "ActiveSet(lower=%s, upper=%s)" % (
            np.flatnonzero(self.at_lower).tolist(),
            np.flatnonzero(self.at_upper).tolist(),
        )


def _as_vec(v, n, name):
    v = np.ascontiguousarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != n:
        raise ContractViolation("%s has shape %s, expected (%d,)" % (name, v.shape, n))
    return v


def _require_feasible(x, b):
    if not (np.all(x >= b.lower) and np.all(x <= b.upper)):
        raise ContractViolation("x is not inside the bounds")


def project(x, b):
    """Clamp ``x`` onto the box ``[b.lower, b.upper]``."""
    x = _as_vec(x, b.n, "x")
    return _k.project(x, b.lower, b.upper)


def t_operator(x, p, b):
    """Zero the components of ``p`` that would leave the box from ``x``."""
    x = _as_vec(x, b.n, "x")
    p = _as_vec(p, b.n, "p")
    _require_feasible(x, b)
    return _k.t_operator(x, p, b.lower, b.upper)


def tight_set(x, b):
    """Boolean mask of coordinates sitting exactly on a bound."""
    x = _as_vec(x, b.n, "x")
    return _k.tight_mask(x, b.lower, b.upper)


def binding_set(x, g, b):
    """Tight coordinates where ``g`` predicts no decrease from moving inward.

    Uses non-strict comparisons: ``x_i = l_i, g_i >= 0`` or ``x_i = u_i, g_i <= 0``.
    """
    x = _as_vec(x, b.n, "x")
    g = _as_vec(g, b.n, "g")
    _require_feasible(x, b)
    lo, up = _k.binding_masks(x, g, b.lower, b.upper)
    return ActiveSet(lo, up)


def stationarity_residual(x, g, b):
    """``T(x, -g)``; identically zero exactly at first-order stationary points."""
    return t_operator(x, -np.asarray(g, dtype=float), b)


def is_stationary(x, g, b, tol=0.0):
    r = stationarity_residual(x, g, b)
    if r.size == 0:
        return True
    return float(np.max(np.abs(r))) <= tol
