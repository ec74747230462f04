"""Elementwise box kernels, numba and numpy flavours.

Both flavours must agree bit-for-bit on finite input; tests/test_kernels.py
checks this.  Public wrappers live in :mod:`nqn.geometry`.
"""
import numpy as np

from ._accel import njit, pick


# ---------------------------------------------------------------- numpy path

def _project_np(x, lower, upper):
    return np.minimum(np.maximum(x, lower), upper)


def _t_operator_np(x, p, lower, upper):
    out = p.copy()
    at_l = x == lower
    at_u = x == upper
    out[at_l] = np.maximum(out[at_l], 0.0)
    out[at_u] = np.minimum(out[at_u], 0.0)
    return out


def _binding_masks_np(x, g, lower, upper):
    lo = (x == lower) & (g >= 0.0)
    up = (x == upper) & (g <= 0.0) & ~lo
    return lo, up


def _tight_mask_np(x, lower, upper):
    return (x == lower) | (x == upper)


def _max_breakpoint_np(x, p, lower, upper):
    gam = np.full(x.shape, np.inf)
    pos = (p > 0.0) & (x != upper)
    neg = (p < 0.0) & (x != lower)
    gam[pos] = (upper[pos] - x[pos]) / p[pos]
    gam[neg] = (x[neg] - lower[neg]) / -p[neg]
    if gam.size == 0:
        return np.inf
    return float(gam.max())


def _blocked_mask_np(x, p, lower, upper, active):
    # indices that are tight, not yet active and where p leaves the box
    return ~active & (((x == lower) & (p < 0.0)) | ((x == upper) & (p > 0.0)))


# ---------------------------------------------------------------- numba path

@njit
def _project_nb(x, lower, upper):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        v = x[i]
        if v < lower[i]:
            v = lower[i]
        if v > upper[i]:
            v = upper[i]
        out[i] = v
    return out


@njit
def _t_operator_nb(x, p, lower, upper):
    out = p.copy()
    for i in range(x.shape[0]):
        if x[i] == lower[i] and out[i] < 0.0:
            out[i] = 0.0
        if x[i] == upper[i] and out[i] > 0.0:
            out[i] = 0.0
    return out


@njit
def _binding_masks_nb(x, g, lower, upper):
    n = x.shape[0]
    lo = np.zeros(n, dtype=np.bool_)
    up = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if x[i] == lower[i] and g[i] >= 0.0:
            lo[i] = True
        elif x[i] == upper[i] and g[i] <= 0.0:
            up[i] = True
    return lo, up


@njit
def _tight_mask_nb(x, lower, upper):
    n = x.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        out[i] = x[i] == lower[i] or x[i] == upper[i]
    return out


@njit
def _max_breakpoint_nb(x, p, lower, upper):
    best = -np.inf
    n = x.shape[0]
    if n == 0:
        return np.inf
    for i in range(n):
        if p[i] > 0.0 and x[i] != upper[i]:
            gam = (upper[i] - x[i]) / p[i]
        elif p[i] < 0.0 and x[i] != lower[i]:
            gam = (x[i] - lower[i]) / -p[i]
        else:
            gam = np.inf
        if gam > best:
            best = gam
    return best


@njit
def _blocked_mask_nb(x, p, lower, upper, active):
    n = x.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if active[i]:
            continue
        if (x[i] == lower[i] and p[i] < 0.0) or (x[i] == upper[i] and p[i] > 0.0):
            out[i] = True
    return out


project = pick(_project_nb, _project_np)
t_operator = pick(_t_operator_nb, _t_operator_np)
binding_masks = pick(_binding_masks_nb, _binding_masks_np)
tight_mask = pick(_tight_mask_nb, _tight_mask_np)
max_breakpoint = pick(_max_breakpoint_nb, _max_breakpoint_np)
blocked_mask = pick(_blocked_mask_nb, _blocked_mask_np)
