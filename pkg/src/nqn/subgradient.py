"""Gradient history and the least-norm convex combination of stored gradients.

The combination approximates a minimum-norm element of a small
neighbourhood's subdifferential without extra gradient evaluations: the
"neighbourhood" is simply the most recent accepted iterates.
"""
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _box_kernels as _k
from .geometry import ActiveSet


class QPNotConverged(RuntimeError):
    """The simplex QP hit its iteration cap."""


@dataclass
class MinNormResult:
    g_tilde: np.ndarray
    lam: np.ndarray
    kkt_residual: float
    iterations: int


class GradientHistory:
    """Bounded FIFO of ``(x, grad f(x))`` at accepted iterates."""

    def __init__(self, n, capacity=20):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.n = int(n)
        self.capacity = int(capacity)
        self.entries = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self.entries)

    def push(self, x, g):
        x = np.array(x, dtype=float)
        g = np.array(g, dtype=float)
        if x.shape != (self.n,) or g.shape != (self.n,):
            raise ValueError("history entries must have length %d" % self.n)
        self.entries.append((x, g))
        return self

    def gradients(self):
        return np.array([g for _, g in self.entries]).reshape(len(self.entries), self.n)


def simplex_kkt_residual(G, lam):
    """Largest violation of the KKT conditions of ``min lam^T G lam / 2`` on the simplex.

    Scaled by ``max(1, max_i G_ii)`` so the value is independent of gradient units.
    """
    Gl = G @ lam
    nu = float(lam @ Gl)
    slack = Gl - nu
    viol = max(
        0.0,
        float(np.max(-slack, initial=0.0)),
        float(np.max(np.abs(lam * slack), initial=0.0)),
        abs(float(lam.sum()) - 1.0),
        float(np.max(-lam, initial=0.0)),
    )
    scale = max(1.0, float(np.max(np.diag(G), initial=0.0)))
    return viol / scale


def _affine_minimizer(Gs):
    k = Gs.shape[0]
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = Gs
    K[:k, k] = -1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_simplex(G, max_iter=None):
    """Wolfe's minimum-norm-point method over a Gram matrix.

    Returns ``(lam, iterations)`` with ``lam`` on the unit simplex.
    """
    G = np.asarray(G, dtype=float)
    l = G.shape[0]
    if l == 0:
        raise ValueError("need at least one gradient")
    if max_iter is None:
        max_iter = 10 * l * l + 100
    scale = max(1.0, float(np.max(np.diag(G))))
    tol = 1e-13 * scale
    lam = np.zeros(l)
    j0 = int(np.argmin(np.diag(G)))
    lam[j0] = 1.0
    support = [j0]
    it = 0
    while True:
        it += 1
        if it > max_iter:
            raise QPNotConverged("min-norm QP exceeded %d iterations" % max_iter)
        Gl = G @ lam
        xx = float(lam @ Gl)
        j = int(np.argmin(Gl))
        if Gl[j] >= xx - tol or j in support:
            break
        support.append(j)
        while True:
            it += 1
            if it > max_iter:
                raise QPNotConverged("min-norm QP exceeded %d iterations" % max_iter)
            idx = np.array(support)
            mu = _affine_minimizer(G[np.ix_(idx, idx)])
            if np.all(mu > 0.0):
                lam[:] = 0.0
                lam[idx] = mu
                break
            cur = lam[idx]
            neg = mu <= 0.0
            ratios = np.full(idx.shape[0], np.inf)
            ratios[neg] = cur[neg] / (cur[neg] - mu[neg])
            blocking = int(np.argmin(ratios))
            new = cur + ratios[blocking] * (mu - cur)
            new[blocking] = 0.0  # leaves the support exactly
            keep = new > 0.0
            lam[:] = 0.0
            lam[idx[keep]] = new[keep]
            support = [int(i) for i in idx[keep]]
    lam = np.maximum(lam, 0.0)
    lam /= lam.sum()
    return lam, it


def min_norm_combination(history, max_iter=None):
    """Least-norm convex combination of the history's gradients."""
    P = history.gradients() if isinstance(history, GradientHistory) else np.atleast_2d(
        np.asarray(history, dtype=float))
    if P.shape[0] == 0:
        raise ValueError("history is empty")
    if P.shape[0] == 1:
        return MinNormResult(P[0].copy(), np.ones(1), 0.0, 0)
    G = P @ P.T
    lam, it = min_norm_simplex(G, max_iter)
    return MinNormResult(lam @ P, lam, simplex_kkt_residual(G, lam), it)


def predict_active_set(x, g, g_tilde, b):
    """Union of the binding sets under ``g_tilde`` and under ``g``."""
    x = np.asarray(x, dtype=float)
    lo1, up1 = _k.binding_masks(x, np.asarray(g_tilde, dtype=float), b.lower, b.upper)
    lo2, up2 = _k.binding_masks(x, np.asarray(g, dtype=float), b.lower, b.upper)
    lo = lo1 | lo2
    return ActiveSet(lo, (up1 | up2) & ~lo)
