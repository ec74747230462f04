"""Objective/gradient kernels for the test problems.

Every problem has ``_<name>_np`` (vectorized numpy) and ``_<name>_nb``
(numba loops).  Both return ``(f, g)`` and share the same tie-breaking:
``sign(0) = +1`` and max-type terms select the lowest attaining index.
Indices in comments are 0-based.  The numpy kernels keep the input dtype,
so they also run in ``np.longdouble`` for the finite-difference oracle.
"""
from functools import lru_cache

import numpy as np

from ._accel import njit, pick


def _sgn(t):
    return np.where(t >= 0.0, 1.0, -1.0)


@lru_cache(maxsize=8)
def _hilbert(n):
    i = np.arange(n, dtype=float)
    H = 1.0 / (i[:, None] + i[None, :] + 1.0)
    H.setflags(write=False)
    return H


# ----------------------------------------------------------------- numpy

def _myopic_decoupled_np(x):
    a, b = x[0::2], x[1::2]
    d = a - b
    s = _sgn(d)
    q = a + 0.1 * b
    g = np.empty_like(x)
    g[0::2] = s + 2.0 * q
    g[1::2] = -s + 0.2 * q
    return np.sum(np.abs(d) + q * q), g


def _myopic_coupled_np(x):
    a, b = x[:-1], x[1:]
    d = a - b
    s = _sgn(d)
    q = a + 0.1 * b
    g = np.zeros_like(x)
    g[:-1] += s + 2.0 * q
    g[1:] += -s + 0.2 * q
    return np.sum(np.abs(d) + q * q), g


def _nesterov3_np(x):
    terms = np.empty_like(x)
    terms[0] = abs(x[0])
    d = x[:-1] - x[1:]
    terms[1:] = np.abs(d)
    j = int(np.argmax(terms))
    g = np.zeros_like(x)
    if j == 0:
        g[0] = 1.0 if x[0] >= 0.0 else -1.0
    else:
        s = 1.0 if d[j - 1] >= 0.0 else -1.0
        g[j - 1] = s
        g[j] = -s
    return terms[j], g


def _l1_np(x):
    return np.sum(np.abs(x)), _sgn(x)


def _l2_np(x):
    r = np.sqrt(np.sum(x * x))
    if r == 0.0:
        return r, np.zeros_like(x)
    return r, x / r


def _maxq_np(x):
    sq = x * x
    j = int(np.argmax(sq))
    g = np.zeros_like(x)
    g[j] = 2.0 * x[j]
    return sq[j], g


def _maxhilb_np(x):
    H = _hilbert(x.shape[0])
    v = H @ x
    j = int(np.argmax(np.abs(v)))
    s = 1.0 if v[j] >= 0.0 else -1.0
    return abs(v[j]), s * H[j]


def _l1hilb_np(x):
    H = _hilbert(x.shape[0])
    v = H @ x
    return np.sum(np.abs(v)), H @ _sgn(v)


def _chained_lq_np(x):
    a, b = x[:-1], x[1:]
    base = -a - b
    second = a * a + b * b - 1.0
    use2 = second > 0.0
    g = np.zeros_like(x)
    g[:-1] += np.where(use2, -1.0 + 2.0 * a, -1.0)
    g[1:] += np.where(use2, -1.0 + 2.0 * b, -1.0)
    return np.sum(base + np.where(use2, second, 0.0)), g


def _chained_cb3_1_np(x):
    a, b = x[:-1], x[1:]
    e = np.exp(b - a)
    t = np.stack([a ** 4 + b * b, (2.0 - a) ** 2 + (2.0 - b) ** 2, 2.0 * e])
    j = np.argmax(t, axis=0)
    ga = np.choose(j, [4.0 * a ** 3, -2.0 * (2.0 - a), -2.0 * e])
    gb = np.choose(j, [2.0 * b, -2.0 * (2.0 - b), 2.0 * e])
    g = np.zeros_like(x)
    g[:-1] += ga
    g[1:] += gb
    return np.sum(np.max(t, axis=0)), g


def _nonsmooth_brown_np(x):
    a, b = x[:-1], x[1:]
    A, B = np.abs(a), np.abs(b)
    ea, eb = b * b + 1.0, a * a + 1.0
    t1 = A ** ea
    t2 = B ** eb
    logA = np.log(np.where(A > 0.0, A, 1.0))
    logB = np.log(np.where(B > 0.0, B, 1.0))
    g = np.zeros_like(x)
    g[:-1] += ea * A ** (b * b) * _sgn(a) + t2 * logB * 2.0 * a
    g[1:] += t1 * logA * 2.0 * b + eb * B ** (a * a) * _sgn(b)
    return np.sum(t1 + t2), g


def _active_faces_np(x):
    y0 = -np.sum(x)
    vals = np.empty(x.shape[0] + 1, dtype=x.dtype)
    vals[0] = abs(y0)
    vals[1:] = np.abs(x)
    j = int(np.argmax(vals))
    top = vals[j]
    if j == 0:
        s = 1.0 if y0 >= 0.0 else -1.0
        g = np.full_like(x, -s / (top + 1.0))
    else:
        g = np.zeros_like(x)
        g[j - 1] = (1.0 if x[j - 1] >= 0.0 else -1.0) / (top + 1.0)
    return np.log(top + 1.0), g


# ----------------------------------------------------------------- numba

@njit
def _sgn1(t):
    return 1.0 if t >= 0.0 else -1.0


@njit
def _myopic_decoupled_nb(x):
    n = x.shape[0]
    g = np.empty(n)
    f = 0.0
    for i in range(0, n - 1, 2):
        a = x[i]
        b = x[i + 1]
        d = a - b
        s = _sgn1(d)
        q = a + 0.1 * b
        f += abs(d) + q * q
        g[i] = s + 2.0 * q
        g[i + 1] = -s + 0.2 * q
    return f, g


@njit
def _myopic_coupled_nb(x):
    n = x.shape[0]
    g = np.zeros(n)
    f = 0.0
    for i in range(n - 1):
        a = x[i]
        b = x[i + 1]
        d = a - b
        s = _sgn1(d)
        q = a + 0.1 * b
        f += abs(d) + q * q
        g[i] += s + 2.0 * q
        g[i + 1] += -s + 0.2 * q
    return f, g


@njit
def _nesterov3_nb(x):
    n = x.shape[0]
    best = abs(x[0])
    j = 0
    for i in range(1, n):
        t = abs(x[i - 1] - x[i])
        if t > best:
            best = t
            j = i
    g = np.zeros(n)
    if j == 0:
        g[0] = _sgn1(x[0])
    else:
        s = _sgn1(x[j - 1] - x[j])
        g[j - 1] = s
        g[j] = -s
    return best, g


@njit
def _l1_nb(x):
    n = x.shape[0]
    g = np.empty(n)
    f = 0.0
    for i in range(n):
        f += abs(x[i])
        g[i] = _sgn1(x[i])
    return f, g


@njit
def _l2_nb(x):
    n = x.shape[0]
    r2 = 0.0
    for i in range(n):
        r2 += x[i] * x[i]
    r = np.sqrt(r2)
    g = np.zeros(n)
    if r == 0.0:
        return 0.0, g
    for i in range(n):
        g[i] = x[i] / r
    return r, g


@njit
def _maxq_nb(x):
    n = x.shape[0]
    best = x[0] * x[0]
    j = 0
    for i in range(1, n):
        t = x[i] * x[i]
        if t > best:
            best = t
            j = i
    g = np.zeros(n)
    g[j] = 2.0 * x[j]
    return best, g


@njit
def _hilbert_apply_nb(x):
    n = x.shape[0]
    # entries depend on i + j only; multiply by reciprocals, as the numpy matrix does
    r = np.empty(2 * n - 1)
    for k in range(2 * n - 1):
        r[k] = 1.0 / (k + 1.0)
    v = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += x[j] * r[i + j]
        v[i] = acc
    return v


@njit
def _maxhilb_nb(x):
    n = x.shape[0]
    v = _hilbert_apply_nb(x)
    j = 0
    best = abs(v[0])
    for i in range(1, n):
        if abs(v[i]) > best:
            best = abs(v[i])
            j = i
    s = _sgn1(v[j])
    g = np.empty(n)
    for k in range(n):
        g[k] = s / (j + k + 1.0)
    return best, g


@njit
def _l1hilb_nb(x):
    n = x.shape[0]
    v = _hilbert_apply_nb(x)
    s = np.empty(n)
    f = 0.0
    for i in range(n):
        f += abs(v[i])
        s[i] = _sgn1(v[i])
    return f, _hilbert_apply_nb(s)


@njit
def _chained_lq_nb(x):
    n = x.shape[0]
    g = np.zeros(n)
    f = 0.0
    for i in range(n - 1):
        a = x[i]
        b = x[i + 1]
        second = a * a + b * b - 1.0
        if second > 0.0:
            f += -a - b + second
            g[i] += -1.0 + 2.0 * a
            g[i + 1] += -1.0 + 2.0 * b
        else:
            f += -a - b
            g[i] += -1.0
            g[i + 1] += -1.0
    return f, g


@njit
def _chained_cb3_1_nb(x):
    n = x.shape[0]
    g = np.zeros(n)
    f = 0.0
    for i in range(n - 1):
        a = x[i]
        b = x[i + 1]
        e = np.exp(b - a)
        t0 = a ** 4 + b * b
        t1 = (2.0 - a) ** 2 + (2.0 - b) ** 2
        t2 = 2.0 * e
        if t0 >= t1 and t0 >= t2:
            f += t0
            g[i] += 4.0 * a ** 3
            g[i + 1] += 2.0 * b
        elif t1 >= t2:
            f += t1
            g[i] += -2.0 * (2.0 - a)
            g[i + 1] += -2.0 * (2.0 - b)
        else:
            f += t2
            g[i] += -2.0 * e
            g[i + 1] += 2.0 * e
    return f, g


@njit
def _nonsmooth_brown_nb(x):
    n = x.shape[0]
    g = np.zeros(n)
    f = 0.0
    for i in range(n - 1):
        a = x[i]
        b = x[i + 1]
        A = abs(a)
        B = abs(b)
        ea = b * b + 1.0
        eb = a * a + 1.0
        t1 = A ** ea
        t2 = B ** eb
        f += t1 + t2
        logA = np.log(A) if A > 0.0 else 0.0
        logB = np.log(B) if B > 0.0 else 0.0
        g[i] += ea * A ** (b * b) * _sgn1(a) + t2 * logB * 2.0 * a
        g[i + 1] += t1 * logA * 2.0 * b + eb * B ** (a * a) * _sgn1(b)
    return f, g


@njit
def _active_faces_nb(x):
    n = x.shape[0]
    y0 = 0.0
    for i in range(n):
        y0 -= x[i]
    top = abs(y0)
    j = 0
    for i in range(n):
        if abs(x[i]) > top:
            top = abs(x[i])
            j = i + 1
    g = np.zeros(n)
    if j == 0:
        c = -_sgn1(y0) / (top + 1.0)
        for i in range(n):
            g[i] = c
    else:
        g[j - 1] = _sgn1(x[j - 1]) / (top + 1.0)
    return np.log(top + 1.0), g


NUMPY_KERNELS = {
    "Myopic_Decoupled": _myopic_decoupled_np,
    "Myopic_Coupled": _myopic_coupled_np,
    "Nesterov_3": _nesterov3_np,
    "L1": _l1_np,
    "L2": _l2_np,
    "MAXQ": _maxq_np,
    "MAXHILB": _maxhilb_np,
    "L1HILB": _l1hilb_np,
    "Chained_LQ": _chained_lq_np,
    "Chained_CB3_1": _chained_cb3_1_np,
    "Nonsmooth_Brown": _nonsmooth_brown_np,
    "Active_Faces": _active_faces_np,
}

NUMBA_KERNELS = {
    "Myopic_Decoupled": _myopic_decoupled_nb,
    "Myopic_Coupled": _myopic_coupled_nb,
    "Nesterov_3": _nesterov3_nb,
    "L1": _l1_nb,
    "L2": _l2_nb,
    "MAXQ": _maxq_nb,
    "MAXHILB": _maxhilb_nb,
    "L1HILB": _l1hilb_nb,
    "Chained_LQ": _chained_lq_nb,
    "Chained_CB3_1": _chained_cb3_1_nb,
    "Nonsmooth_Brown": _nonsmooth_brown_nb,
    "Active_Faces": _active_faces_nb,
}

KERNELS = {name: pick(NUMBA_KERNELS[name], NUMPY_KERNELS[name]) for name in NUMPY_KERNELS}
