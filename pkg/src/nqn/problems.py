"""Test-problem registry, box construction, starting points and a
finite-difference gradient check.

All registered problems are unconstrained test functions made
bound-constrained by :func:`make_bounds`, which shifts a box of width 5
away from the unconstrained minimizer on every even (1-based) coordinate.
See ``docs/problems.md`` for formulas and sources.
"""
from dataclasses import dataclass, field

import numpy as np

from ._problem_kernels import KERNELS, NUMPY_KERNELS
from .geometry import Bounds


class ProblemConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemDef:
    name: str
    formula: str
    source: str
    x_star: object  # callable n -> unconstrained minimizer
    kink_gap: object  # callable x -> distance-like measure to the nonsmooth set
    even_only: bool = False
    f_star_constrained: object = None  # callable n -> optimum under make_bounds, if known


@dataclass
class ProblemInstance:
    name: str
    dim: int
    bounds: Bounds
    x_star_uncon: np.ndarray
    f_star_hint: float = None
    kernel: object = field(default=None, repr=False)
    kink_gap: object = field(default=None, repr=False)
    precise_value: object = field(default=None, repr=False)

    def evaluate(self, x):
        x = np.ascontiguousarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError("%s expects a vector of length %d" % (self.name, self.dim))
        f, g = self.kernel(x)
        return float(f), g

    __call__ = evaluate


# ---------------------------------------------------------------- kink gaps

def _top_two_gap(v):
    if v.shape[0] < 2:
        return np.inf
    top2 = np.partition(v, -2)[-2:]
    return float(top2[1] - top2[0])


def _gap_myopic_decoupled(x):
    return float(np.min(np.abs(x[0::2] - x[1::2])))


def _gap_pairs_abs_diff(x):
    return float(np.min(np.abs(x[:-1] - x[1:])))


def _gap_nesterov3(x):
    terms = np.concatenate([[abs(x[0])], np.abs(x[:-1] - x[1:])])
    return min(_top_two_gap(terms), float(terms.max()))


def _gap_abs(x):
    return float(np.min(np.abs(x)))


def _gap_l2(x):
    return float(np.linalg.norm(x))


def _gap_maxq(x):
    return _top_two_gap(x * x)


def _hilb(x):
    i = np.arange(x.shape[0], dtype=float)
    return (1.0 / (i[:, None] + i[None, :] + 1.0)) @ x


def _gap_maxhilb(x):
    v = np.abs(_hilb(x))
    return min(_top_two_gap(v), float(v.max()))


def _gap_l1hilb(x):
    return float(np.min(np.abs(_hilb(x))))


def _gap_chained_lq(x):
    return float(np.min(np.abs(x[:-1] ** 2 + x[1:] ** 2 - 1.0)))


def _gap_cb3(x):
    a, b = x[:-1], x[1:]
    t = np.sort(np.stack([a ** 4 + b * b, (2 - a) ** 2 + (2 - b) ** 2, 2 * np.exp(b - a)]), axis=0)
    return float(np.min(t[2] - t[1]))


def _gap_active_faces(x):
    v = np.concatenate([[abs(np.sum(x))], np.abs(x)])
    return min(_top_two_gap(v), float(v.max()))


_zeros = lambda n: np.zeros(n)  # noqa: E731

REGISTRY = {
    d.name: d
    for d in [
        ProblemDef(
            "Active_Faces",
            "max{ln(|sum_i x_i| + 1), max_i ln(|x_i| + 1)}",
            "Haarala, Miettinen & Makela (2004), problem 'Number of active faces'",
            _zeros, _gap_active_faces),
        ProblemDef(
            "Chained_CB3_1",
            "sum_{i<n} max{x_i^4 + x_{i+1}^2, (2-x_i)^2 + (2-x_{i+1})^2, 2 exp(x_{i+1} - x_i)}",
            "Haarala, Miettinen & Makela (2004), 'Chained CB3 I'",
            lambda n: np.ones(n), _gap_cb3),
        ProblemDef(
            "Chained_LQ",
            "sum_{i<n} max{-x_i - x_{i+1}, -x_i - x_{i+1} + x_i^2 + x_{i+1}^2 - 1}",
            "Haarala, Miettinen & Makela (2004), 'Chained LQ'",
            lambda n: np.full(n, 1.0 / np.sqrt(2.0)), _gap_chained_lq),
        ProblemDef(
            "L1", "sum_i |x_i|", "Skajaa (2010), 'L1'", _zeros, _gap_abs,
            f_star_constrained=lambda n: 0.5 * (n // 2)),
        ProblemDef(
            "L1HILB", "sum_i |sum_j x_j / (i + j - 1)|",
            "Haarala, Miettinen & Makela (2004), 'L1HILB'", _zeros, _gap_l1hilb),
        ProblemDef(
            "L2", "||x||_2", "Lewis & Overton (2013), Euclidean norm", _zeros, _gap_l2,
            f_star_constrained=lambda n: 0.5 * np.sqrt(n // 2)),
        ProblemDef(
            "MAXHILB", "max_i |sum_j x_j / (i + j - 1)|",
            "Haarala, Miettinen & Makela (2004), 'MXHILB'", _zeros, _gap_maxhilb),
        ProblemDef(
            "MAXQ", "max_i x_i^2", "Haarala, Miettinen & Makela (2004), 'MAXQ'", _zeros,
            _gap_maxq, f_star_constrained=lambda n: 0.25),
        ProblemDef(
            "Myopic_Coupled", "sum_{i=1}^{n-1} |x_i - x_{i+1}| + (x_i + 0.1 x_{i+1})^2",
            "myopic-gradient test problem, coupled form", _zeros, _gap_pairs_abs_diff,
            even_only=True),
        ProblemDef(
            "Myopic_Decoupled",
            "sum_{i odd} |x_i - x_{i+1}| + (x_i + 0.1 x_{i+1})^2",
            "myopic-gradient test problem, separable form", _zeros, _gap_myopic_decoupled,
            even_only=True, f_star_constrained=lambda n: 0.3 * (n // 2)),
        ProblemDef(
            "Nesterov_3", "max{|x_1|, max_{i>=2} |x_{i-1} - x_i|}",
            "M. Overton, private communication", _zeros, _gap_nesterov3,
            f_star_constrained=lambda n: 0.25),
        ProblemDef(
            "Nonsmooth_Brown",
            "sum_{i<n} |x_i|^(x_{i+1}^2 + 1) + |x_{i+1}|^(x_i^2 + 1)",
            "Haarala, Miettinen & Makela (2004), 'Nonsmooth generalization of Brown 2'",
            _zeros, _gap_abs),
    ]
}


def problem_names():
    return sorted(REGISTRY)


def make_bounds(x_star_uncon):
    """Shifted box: on 1-based even ``i`` the box is ``[x*_i - 5.5, x*_i - 0.5]``,
    on odd ``i`` it is ``[-100, 100]``."""
    xs = np.asarray(x_star_uncon, dtype=float)
    lower = np.full(xs.shape, -100.0)
    upper = np.full(xs.shape, 100.0)
    even = np.arange(1, xs.shape[0] + 1) % 2 == 0
    lower[even] = xs[even] - 5.5
    upper[even] = xs[even] - 0.5
    return Bounds(lower, upper)


def get_problem(name, n):
    try:
        d = REGISTRY[name]
    except KeyError:
        raise ProblemConfigError(
            "unknown problem %r; valid names: %s" % (name, ", ".join(problem_names()))
        ) from None
    n = int(n)
    if n < 2:
        raise ProblemConfigError("%s needs n >= 2" % name)
    if d.even_only and n % 2:
        raise ProblemConfigError("%s is defined for even n only, got n=%d" % (name, n))
    xs = np.asarray(d.x_star(n), dtype=float)
    hint = None if d.f_star_constrained is None else float(d.f_star_constrained(n))
    np_kernel = NUMPY_KERNELS[name]
    return ProblemInstance(name, n, make_bounds(xs), xs, hint, KERNELS[name], d.kink_gap,
                           lambda x: np_kernel(x)[0])


def evaluate(name, n, x):
    return get_problem(name, n).evaluate(x)


def myopic_2d():
    """``|x1 - x2| + (x1 + 0.1 x2)^2 / 2`` subject to ``x1 <= -0.5`` only."""
    def kernel(x):
        d = x[0] - x[1]
        s = 1.0 if d >= 0.0 else -1.0
        q = x[0] + 0.1 * x[1]
        return abs(d) + 0.5 * q * q, np.array([s + q, -s + 0.1 * q])

    b = Bounds(np.array([-np.inf, -np.inf]), np.array([-0.5, np.inf]))
    return ProblemInstance("Myopic_2D", 2, b, np.zeros(2), None, kernel,
                           lambda x: abs(x[0] - x[1]), lambda x: kernel(x)[0])


# ---------------------------------------------------------------- starts

@dataclass(frozen=True)
class StartSpec:
    seed: int = 0
    count: int = 10


def _start_rng(seed):
    # Philox is counter-based: identical streams on every platform for a key
    return np.random.Generator(np.random.Philox(key=int(seed)))


def box_midpoint(b):
    lo = np.where(np.isfinite(b.lower), b.lower, np.minimum(-100.0, b.upper))
    up = np.where(np.isfinite(b.upper), b.upper, np.maximum(100.0, b.lower))
    return 0.5 * (lo + up)


def make_start(b, seed):
    mid = box_midpoint(b)
    delta = _start_rng(seed).uniform(-2.0, 2.0, size=b.n)
    return np.minimum(np.maximum(mid + delta, b.lower), b.upper)


def make_starts(b, spec=StartSpec()):
    """Midpoint of the box plus ``U(-2, 2)`` noise, projected into the box.

    Start ``j`` uses seed ``spec.seed + j``, so a single start can be
    regenerated from its own seed.
    """
    return [make_start(b, spec.seed + j) for j in range(spec.count)]


# ---------------------------------------------------------------- FD check

@dataclass
class FDCheck:
    max_rel_error: float
    x: np.ndarray
    resampled: bool
    on_kink: bool


def fd_gradient(value, x, h=None, dtype=np.longdouble):
    """Central-difference gradient of the scalar function ``value``.

    Runs in ``dtype`` (extended precision by default).  Each component uses
    a wide fourth-order stencil, whose roundoff ``eps * |f| / h`` is small
    even when ``|f|`` dwarfs the component, unless it disagrees with a
    narrow second-order stencil by more than the latter's roundoff bound;
    that signals a kink inside the wide stencil and the narrow value is kept.
    A user-supplied ``h`` forces the plain second-order formula.
    """
    x = np.asarray(x, dtype=float)
    eps = float(np.finfo(dtype).eps)
    xw = x.astype(dtype)
    out = np.empty(x.shape[0])

    def shifted(i, step):
        z = xw.copy()
        z[i] += step
        return value(z)

    if h is not None:
        h = np.broadcast_to(h, x.shape)
        for i in range(x.shape[0]):
            hi = dtype(h[i])
            out[i] = float((shifted(i, hi) - shifted(i, -hi)) / (2 * hi))
        return out

    for i in range(x.shape[0]):
        scale = 1.0 + abs(x[i])
        h2 = dtype(eps ** (1.0 / 3.0) * scale)
        h4 = dtype(eps ** 0.2 * scale)
        fp, fm = shifted(i, h2), shifted(i, -h2)
        d2 = (fp - fm) / (2 * h2)
        f2, f1, fm1, fm2 = (shifted(i, k * h4) for k in (2, 1, -1, -2))
        d4 = (-f2 + 8 * f1 - 8 * fm1 + fm2) / (12 * h4)
        fmax = max(abs(fp), abs(fm), abs(f2), abs(fm2))
        bound = 10 * eps * fmax / h2 + 1e-6 * max(1.0, abs(float(d2)))
        out[i] = float(d4 if abs(d4 - d2) <= bound else d2)
    return out


def fd_check(problem, x, h=None, rng=None, tie_tol=1e-7, margin=1e-3, max_resample=100):
    """Compare the analytic gradient with central differences.

    Points whose kink gap is below ``max(tie_tol, margin)`` are replaced by a
    nearby random point first; ``on_kink`` flags gaps below ``tie_tol``.
    """
    x = np.asarray(x, dtype=float).copy()
    rng = rng if rng is not None else np.random.default_rng(0)
    gap = problem.kink_gap(x) if problem.kink_gap else np.inf
    on_kink = gap < tie_tol
    resampled = False
    tries = 0
    while gap < max(tie_tol, margin):
        if tries >= max_resample:
            raise RuntimeError("could not find a point away from the kinks of %s" % problem.name)
        x = x + 1e-2 * (1.0 + np.abs(x)) * rng.uniform(-1.0, 1.0, size=x.shape)
        gap = problem.kink_gap(x)
        resampled = True
        tries += 1
    g = problem.evaluate(x)[1]
    if problem.precise_value is not None:
        fd = fd_gradient(problem.precise_value, x, h)
    else:
        fd = fd_gradient(lambda z: problem.evaluate(np.asarray(z, dtype=float))[0], x, h,
                         dtype=float)
    err = float(np.max(np.abs(fd - g) / np.maximum(1.0, np.abs(g))))
    return FDCheck(err, x, resampled, bool(on_kink))


def fd_check_problem(problem, points=100, seed=0):
    """Worst FD error over ``points`` random starts-like points of ``problem``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for j in range(points):
        x = make_start(problem.bounds, seed * 100003 + j)
        worst = max(worst, fd_check(problem, x, rng=rng).max_rel_error)
    return worst
