"""Shared builders and brute-force oracles for the test suite."""
import numpy as np

from nqn.geometry import Bounds
from nqn.lbfgs import LBFGSMemory
from nqn.problems import ProblemInstance


def random_spd(rng, n, cond=1e3):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    return (Q * eig) @ Q.T


def random_memory(rng, n, m, pairs=None, theta=None):
    """Memory filled from a random SPD curvature model, every pair with ``s^T y > 0``."""
    mem = LBFGSMemory(n, m, theta=float(rng.uniform(0.5, 10.0)) if theta is None else theta)
    H = random_spd(rng, n)
    target = m if pairs is None else pairs
    while len(mem) < target:
        s = rng.standard_normal(n) * np.exp(rng.uniform(-3, 3))
        y = H @ s + 0.05 * np.linalg.norm(H @ s) * rng.standard_normal(n) / np.sqrt(n)
        mem.update(s, y)
    return mem


def dense_restricted_solve(mem, g, active_mask):
    """Direct solve of the restricted model against the materialized matrix."""
    B = mem.dense()
    free = ~np.asarray(active_mask, dtype=bool)
    p = np.zeros(mem.n)
    if free.any():
        p[free] = -np.linalg.solve(B[np.ix_(free, free)], g[free])
    return p


def random_box_point(rng, n, p_tight=0.4, p_inf=0.2):
    """Random bounds (some infinite) and a feasible point with some tight coordinates."""
    lo = rng.uniform(-3, 0, size=n)
    up = lo + rng.uniform(0.5, 4, size=n)
    lo[rng.random(n) < p_inf] = -np.inf
    up[rng.random(n) < p_inf] = np.inf
    x = np.where(np.isfinite(lo), lo, -4.0) + rng.uniform(0.1, 0.4, size=n)
    x = np.minimum(x, np.where(np.isfinite(up), up, np.inf))
    r = rng.random(n)
    at_lo = (r < p_tight / 2) & np.isfinite(lo)
    at_up = (r >= p_tight / 2) & (r < p_tight) & np.isfinite(up)
    x[at_lo] = lo[at_lo]
    x[at_up] = up[at_up]
    return Bounds(lo, up), x


def simplex_grid(l, step):
    """All points of the unit simplex in R^l on a grid of the given step, one per row."""
    k = int(round(1.0 / step))
    if l == 1:
        return np.ones((1, 1))
    axes = np.meshgrid(*([np.arange(k + 1)] * (l - 1)), indexing="ij")
    head = np.stack([a.ravel() for a in axes], axis=1)
    head = head[head.sum(axis=1) <= k]
    return np.hstack([head, k - head.sum(axis=1, keepdims=True)]) / k


def quadratic_problem(A, c, lower, upper):
    """``f = x^T A x / 2 - c^T x`` as a problem instance."""
    A = np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float)

    def kernel(x):
        Ax = A @ x
        return 0.5 * x @ Ax - c @ x, Ax - c

    b = Bounds(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))
    return ProblemInstance("quadratic", len(c), b, np.linalg.solve(A, c), None, kernel,
                           None, lambda x: kernel(x)[0])
