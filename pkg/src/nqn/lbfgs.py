"""Limited-memory BFGS model in compact form with active-set restricted solves.

The model matrix is

    B = theta*I - W K^{-1} W^T,   W = [Y, theta*S],
    K = [[-D, L^T], [L, theta*S^T S]]

with ``D = diag(s_i^T y_i)`` and ``L`` the strictly lower part of ``S^T Y``.
A solve restricted to free rows ``F`` uses Sherman-Morrison-Woodbury on the
2k x 2k matrix ``N = K - W_F^T W_F / theta``; its Gram blocks are updated
from whichever of the free or fixed rows is smaller.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

THETA_MIN = 1.0
THETA_MAX = 1e8
PIVOT_TOL = 1e-12


class NumericalBreakdown(ArithmeticError):
    """The restricted middle matrix could not be factored reliably."""


@dataclass
class SubspaceSolveReport:
    direction: np.ndarray
    free_dimension: int
    flop_estimate: int


def theta_init(g):
    """Initial scaling ``max(1, min(||g||_inf, 1e8))``."""
    g = np.asarray(g, dtype=float)
    gmax = float(np.max(np.abs(g))) if g.size else 0.0
    if not np.isfinite(gmax):
        return THETA_MAX
    return max(THETA_MIN, min(gmax, THETA_MAX))


class LBFGSMemory:
    """Ring buffer of curvature pairs with cached inner-product matrices.

    Pairs are stored oldest first.  ``SS``, ``SY`` and ``YY`` hold
    ``S S^T``, ``S Y^T`` and ``Y Y^T`` (rows are pairs), updated in O(k n)
    per accepted pair.
    """

    def __init__(self, n, m, theta=1.0):
        if m < 1:
            raise ValueError("memory size m must be >= 1")
        self.n = int(n)
        self.m = int(m)
        self.theta = float(theta)
        self.S = np.empty((0, self.n))
        self.Y = np.empty((0, self.n))
        self.SS = np.empty((0, 0))
        self.SY = np.empty((0, 0))
        self.YY = np.empty((0, 0))
        self.n_skipped = 0
        self.n_accepted = 0

    def __len__(self):
        return self.S.shape[0]

    def copy(self):
        new = LBFGSMemory(self.n, self.m, self.theta)
        for name in ("S", "Y", "SS", "SY", "YY"):
            setattr(new, name, getattr(self, name).copy())
        new.n_skipped = self.n_skipped
        new.n_accepted = self.n_accepted
        return new

    def update(self, s, y, eps_skip=1e-8):
        """Store ``(s, y)`` if ``s^T y > eps_skip ||s|| ||y||``; return whether stored."""
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        sy = float(s @ y)
        if not (np.isfinite(sy) and sy > eps_skip * np.linalg.norm(s) * np.linalg.norm(y)):
            self.n_skipped += 1
            return False
        S, Y = self.S, self.Y
        if S.shape[0] == self.m:
            S, Y = S[1:], Y[1:]
            SS, SY, YY = self.SS[1:, 1:], self.SY[1:, 1:], self.YY[1:, 1:]
        else:
            SS, SY, YY = self.SS, self.SY, self.YY
        k = S.shape[0]
        Ss, Sy, Ys, Yy = S @ s, S @ y, Y @ s, Y @ y
        newSS = np.empty((k + 1, k + 1))
        newSS[:k, :k] = SS
        newSS[k, :k] = newSS[:k, k] = Ss
        newSS[k, k] = s @ s
        newYY = np.empty((k + 1, k + 1))
        newYY[:k, :k] = YY
        newYY[k, :k] = newYY[:k, k] = Yy
        newYY[k, k] = y @ y
        newSY = np.empty((k + 1, k + 1))
        newSY[:k, :k] = SY
        newSY[:k, k] = Sy  # s_i^T y_new
        newSY[k, :k] = Ys  # s_new^T y_i
        newSY[k, k] = sy
        self.S = np.vstack([S, s[None, :]])
        self.Y = np.vstack([Y, y[None, :]])
        self.SS, self.SY, self.YY = newSS, newSY, newYY
        self.n_accepted += 1
        return True

    def solve(self, g, active_mask=None):
        """Minimize ``g^T p + p^T B p / 2`` with ``p`` fixed to zero on ``active_mask``."""
        g = np.asarray(g, dtype=float)
        n = self.n
        if active_mask is None:
            active_mask = np.zeros(n, dtype=bool)
        free = ~active_mask
        n_free = int(np.count_nonzero(free))
        n_act = n - n_free
        theta = self.theta
        p = np.zeros(n)
        k = len(self)
        if n_free == 0:
            return SubspaceSolveReport(p, 0, 0)
        gF = g[free]
        if k == 0:
            p[free] = -gF / theta
            return SubspaceSolveReport(p, n_free, n_free)

        S, Y = self.S, self.Y
        if n_act == 0:
            SF, YF = S, Y
            SSa = np.zeros((k, k))
            SYf, YYf = self.SY, self.YY
        else:
            SF, YF = S[:, free], Y[:, free]
            SA, YA = S[:, active_mask], Y[:, active_mask]
            SSa = SA @ SA.T
            if n_act <= n_free:
                SYf = self.SY - SA @ YA.T
                YYf = self.YY - YA @ YA.T
            else:
                SYf = SF @ YF.T
                YYf = YF @ YF.T
        D = np.diag(self.SY).copy()
        L = np.tril(self.SY, -1)

        # N = [[-E, N12], [N21, theta*SSa]]
        E = YYf / theta
        E[np.diag_indices(k)] += D
        N21 = L - SYf
        N12 = N21.T
        v1 = YF @ gF
        v2 = theta * (SF @ gF)

        cE = _Chol(E)
        EinvN12 = cE.solve(N12)
        Einv_v1 = cE.solve(v1)
        P = theta * SSa + N21 @ EinvN12
        P = 0.5 * (P + P.T)
        u2 = _Chol(P).solve(v2 + N21 @ Einv_v1)
        u1 = EinvN12 @ u2 - Einv_v1
        corr = YF.T @ u1 + theta * (SF.T @ u2)
        p[free] = -gF / theta - corr / (theta * theta)
        t = min(n_act, n_free)
        flops = 2 * k * k * t + 6 * k * n_free + 4 * n_free + (2 * k) ** 3
        return SubspaceSolveReport(p, n_free, int(flops))

    def dense(self):
        """Materialize ``B`` by applying the BFGS rank-two update oldest first.

        Test oracle only; independent of the compact-form caches.
        """
        B = self.theta * np.eye(self.n)
        for s, y in zip(self.S, self.Y):
            sy = float(s @ y)
            if not sy > 0.0:
                raise ValueError("stored pair violates the curvature condition")
            Bs = B @ s
            B = B + np.outer(y, y) / sy - np.outer(Bs, Bs) / float(s @ Bs)
        return 0.5 * (B + B.T)


class _Chol:
    """Cholesky factor of ``diag(d) A_s diag(d)`` with unit-diagonal ``A_s``.

    The symmetric equilibration makes the pivot test independent of how
    differently the stored pairs are scaled.
    """

    def __init__(self, A):
        diag = np.diag(A)
        if not np.all(np.isfinite(diag)) or np.any(diag <= 0.0):
            raise NumericalBreakdown("non-positive diagonal in a definite block")
        self.d = np.sqrt(diag)
        As = A / np.outer(self.d, self.d)
        try:
            self.c = cho_factor(As, lower=True, check_finite=True)
        except (LinAlgError, ValueError) as exc:
            raise NumericalBreakdown(str(exc)) from exc
        piv = np.diag(self.c[0]) ** 2
        if not np.all(np.isfinite(piv)) or piv.min() <= PIVOT_TOL:
            raise NumericalBreakdown("relative pivot below %.0e" % PIVOT_TOL)

    def solve(self, b):
        d = self.d if b.ndim == 1 else self.d[:, None]
        return cho_solve(self.c, b / d) / d


def update(mem, s, y, eps_skip=1e-8):
    """Functional wrapper around :meth:`LBFGSMemory.update`."""
    mem.update(s, y, eps_skip)
    return mem


def subspace_solve(mem, g, active):
    """Direction from the restricted quadratic model; ``active`` is an ActiveSet or mask."""
    mask = active.mask if hasattr(active, "mask") else np.asarray(active, dtype=bool)
    return mem.solve(g, mask)


def dense_materialize(mem):
    return mem.dense()
