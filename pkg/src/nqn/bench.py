"""Run matrix, convergence flags, performance profiles and report files.

A run is one ``(problem, n, start seed, variant)`` tuple.  Each run is
classified per tolerance ``eps`` against ``f*``, the best value any
variant reached on the same ``(problem, n, seed)`` instance::

    OK     some iterate has (f_k - f*) / (f_0 - f*) < eps
    MAX    not OK and the gradient budget ran out
    OTHER  not OK for any other reason (no direction, line-search error, ...)

Costs for the Dolan-More profiles are gradient evaluations until the
first OK iterate.
"""
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .problems import get_problem, make_start, problem_names
from .solver import VARIANTS, SolverConfig, Termination, nqn_solve

DEFAULT_EPSILONS = (1e-2, 1e-4, 1e-6, 1e-8)
CSV_HEADER = "problem,n,start_seed,variant,flag,grad_evals,best_f,wall_time"
FLAGS = ("OK", "MAX", "OTHER")


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class RunMatrixSpec:
    problems: tuple = tuple(problem_names())
    dims: tuple = (100,)
    seeds: tuple = tuple(range(10))
    variants: tuple = VARIANTS
    epsilons: tuple = DEFAULT_EPSILONS
    budget_multiplier: int = 100
    flag_eps: float = 1e-4  # tolerance behind the CSV ``flag`` column
    output_dir: str = None
    jobs: int = 1
    record_wall_time: bool = False

    def __post_init__(self):
        for name in ("problems", "dims", "seeds", "variants", "epsilons"):
            if len(getattr(self, name)) == 0:
                raise SpecError("%s must not be empty" % name)
        unknown = [p for p in self.problems if p not in problem_names()]
        if unknown:
            raise SpecError("unknown problem(s) %s; valid names: %s"
                            % (", ".join(unknown), ", ".join(problem_names())))
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise SpecError("unknown variant(s) %s" % ", ".join(bad))
        if any(e <= 0 for e in self.epsilons) or self.flag_eps <= 0:
            raise SpecError("tolerances must be positive")
        if self.budget_multiplier < 1 or self.jobs < 1:
            raise SpecError("budget_multiplier and jobs must be >= 1")

    def tasks(self):
        """All runs in canonical order: problem, n, seed, variant."""
        return [(p, n, s, v)
                for p in sorted(self.problems)
                for n in sorted(self.dims)
                for s in sorted(self.seeds)
                for v in sorted(self.variants)]


# ---------------------------------------------------------------- spec files

def _split(value):
    return [t for t in re.split(r"[,\s]+", value.strip()) if t]


def _int_list(value):
    out = []
    for tok in _split(value):
        if ".." in tok:
            a, b = tok.split("..", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(tok))
    return tuple(out)


def _bool(value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean: %r" % value)


_PARSERS = {
    "problems": lambda v: tuple(problem_names()) if v.strip() == "all" else tuple(_split(v)),
    "dims": _int_list,
    "seeds": _int_list,
    "variants": lambda v: tuple(t.upper() for t in _split(v)),
    "epsilons": lambda v: tuple(float(t) for t in _split(v)),
    "budget_multiplier": int,
    "flag_eps": float,
    "output_dir": str.strip,
    "jobs": int,
    "record_wall_time": _bool,
}


def parse_spec_text(text):
    """Parse ``key = value`` lines (``#`` starts a comment) into a dict of typed values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError("line %d: expected 'key = value', got %r" % (lineno, raw))
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in _PARSERS:
            raise SpecError("line %d: unknown key %r (known: %s)"
                            % (lineno, key, ", ".join(sorted(_PARSERS))))
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise SpecError("line %d: bad value for %s: %s" % (lineno, key, exc)) from None
    return values


def load_spec(path, **overrides):
    """Spec file values, then non-``None`` ``overrides`` on top of them."""
    try:
        with open(path, encoding="utf-8") as fh:
            values = parse_spec_text(fh.read())
    except OSError as exc:
        raise SpecError("cannot read spec file %s: %s" % (path, exc.strerror)) from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunMatrixSpec(**values)


# ---------------------------------------------------------------- running

@dataclass
class RunResult:
    """The parts of a :class:`~nqn.solver.RunRecord` the reports need."""
    problem: str
    n: int
    seed: int
    variant: str
    best_f: float
    grad_evals: int
    termination: str
    f_history: list
    evals_history: list
    correction_rounds: int = 0
    wall_time: float = 0.0

    @property
    def key(self):
        return (self.problem, self.n, self.seed)

    @property
    def f0(self):
        return self.f_history[0]


def run_one(problem, n, seed, variant, budget_multiplier=100):
    prob = get_problem(problem, n)
    x0 = make_start(prob.bounds, seed)
    rec = nqn_solve(prob, x0, SolverConfig(variant=variant, budget_multiplier=budget_multiplier))
    return RunResult(problem, n, seed, variant, rec.best_f, rec.grad_eval_count,
                     rec.termination.value, rec.f_history, rec.evals_history,
                     int(sum(rec.correction_rounds)), rec.wall_time)


def _run_task(args):
    return run_one(*args)


def run_matrix(spec, progress=None):
    """Execute every run of ``spec``; results come back in canonical order."""
    tasks = [t + (spec.budget_multiplier,) for t in spec.tasks()]
    results = []
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            for res in pool.map(_run_task, tasks, chunksize=1):
                results.append(res)
                if progress:
                    progress(res)
    else:
        for t in tasks:
            res = _run_task(t)
            results.append(res)
            if progress:
                progress(res)
    results.sort(key=lambda r: (r.problem, r.n, r.seed, r.variant))
    return results


# ---------------------------------------------------------------- classification

def best_values(results):
    """``f*`` per instance: the lowest ``best_f`` of any participating run."""
    fstar = {}
    for r in results:
        fstar[r.key] = min(fstar.get(r.key, math.inf), r.best_f)
    return fstar


def _first_ok_index(f_history, f_star, eps):
    f0 = f_history[0]
    if f0 <= f_star:
        return 0
    denom = f0 - f_star
    for i, f in enumerate(f_history):
        if (f - f_star) / denom < eps:
            return i
    return None


def classify(record, f_star, f0=None, eps=1e-4):
    """``"OK"``, ``"MAX"`` or ``"OTHER"`` for a run record or :class:`RunResult`."""
    hist = list(record.f_history)
    if f0 is not None:
        hist[0] = f0
    if _first_ok_index(hist, f_star, eps) is not None:
        return "OK"
    term = getattr(record.termination, "value", record.termination)
    return "MAX" if term == Termination.BUDGET.value else "OTHER"


def cost_to_solve(record, f_star, eps):
    """Gradient evaluations until the first OK iterate (``inf`` if never)."""
    i = _first_ok_index(record.f_history, f_star, eps)
    return math.inf if i is None else float(record.evals_history[i])


@dataclass
class ProfileTable:
    eps: float
    solvers: list
    instances: list
    costs: dict  # solver -> array over instances
    ratios: dict  # solver -> array over instances
    taus: np.ndarray
    rho: dict  # solver -> array over taus

    def solved_fraction(self, solver):
        r = self.ratios[solver]
        return float(np.count_nonzero(np.isfinite(r))) / len(r) if len(r) else 0.0

    def rho_at(self, solver, tau):
        r = self.ratios[solver]
        return float(np.count_nonzero(r <= tau)) / len(r) if len(r) else 0.0


def build_profiles(results, eps, f_star=None):
    """Dolan-More profile over the instances every solver ran on."""
    f_star = f_star or best_values(results)
    by = {}
    for r in results:
        by.setdefault(r.variant, {})[r.key] = r
    solvers = sorted(by)
    instances = sorted(set.intersection(*(set(d) for d in by.values()))) if by else []
    costs = {s: np.array([cost_to_solve(by[s][k], f_star[k], eps) for k in instances])
             for s in solvers}
    if instances:
        best = np.min(np.vstack([costs[s] for s in solvers]), axis=0)
    else:
        best = np.empty(0)
    ratios = {}
    with np.errstate(invalid="ignore", divide="ignore"):
        for s in solvers:
            r = np.where(np.isfinite(costs[s]), costs[s] / best, np.inf)
            ratios[s] = r
    finite = np.concatenate([r[np.isfinite(r)] for r in ratios.values()] or [np.empty(0)])
    taus = np.unique(np.concatenate([[1.0], finite]))
    rho = {s: np.array([np.count_nonzero(ratios[s] <= t) for t in taus], dtype=float)
           / max(len(instances), 1) for s in solvers}
    return ProfileTable(eps, solvers, instances, costs, ratios, taus, rho)


def flag_counts(results, eps, f_star=None):
    """``{variant: {"OK": .., "MAX": .., "OTHER": .., "NoDirection": .., "LineSearchError": ..}}``."""
    f_star = f_star or best_values(results)
    out = {}
    for r in results:
        c = out.setdefault(r.variant, dict.fromkeys(FLAGS + ("NoDirection", "LineSearchError"),
                                                    0))
        flag = classify(r, f_star[r.key], eps=eps)
        c[flag] += 1
        if flag == "OTHER" and r.termination in c:
            c[r.termination] += 1
    return out


def correction_ratio(results, num="V3", den="V4"):
    """Per problem: total correction rounds of ``num`` over those of ``den``."""
    present = {r.variant for r in results}
    if num not in present or den not in present:
        return {}
    tot = {}
    for r in results:
        if r.variant in (num, den):
            d = tot.setdefault(r.problem, {num: 0, den: 0})
            d[r.variant] += r.correction_rounds
    out = {}
    for p, d in sorted(tot.items()):
        if d[den] > 0:
            out[p] = d[num] / d[den]
        else:
            out[p] = math.nan if d[num] == 0 else math.inf
    return out


# ---------------------------------------------------------------- reports

def _open_for_write(path):
    try:
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(exc.errno, "cannot write %s: %s" % (path, exc.strerror)) from None


def write_csv(results, path, eps=1e-4, record_wall_time=False):
    f_star = best_values(results)
    with _open_for_write(path) as fh:
        fh.write(CSV_HEADER + "\n")
        for r in results:
            wall = "%.6f" % r.wall_time if record_wall_time else ""
            fh.write("%s,%d,%d,%s,%s,%d,%r,%s\n" % (
                r.problem, r.n, r.seed, r.variant, classify(r, f_star[r.key], eps=eps),
                r.grad_evals, float(r.best_f), wall))


def summary_text(results, epsilons):
    f_star = best_values(results)
    variants = sorted({r.variant for r in results})
    n_inst = len({r.key for r in results})
    lines = ["instances: %d" % n_inst, ""]
    head = "%-8s" % "variant"
    for eps in epsilons:
        head += " | %-26s" % ("eps=%.0e  OK  MAX  OTHER" % eps)
    lines.append(head)
    for v in variants:
        row = "%-8s" % v
        for eps in epsilons:
            c = flag_counts(results, eps, f_star).get(v, dict.fromkeys(FLAGS, 0))
            other = "%d + %d" % (c.get("NoDirection", 0), c.get("LineSearchError", 0))
            row += " | %-10s%3d  %3d  %-7s" % ("", c["OK"], c["MAX"], other)
        lines.append(row)
    lines += ["", "OTHER is split as NoDirection + LineSearchError.", "",
              "solved fraction (profile at tau = inf):"]
    for eps in epsilons:
        prof = build_profiles(results, eps, f_star)
        lines.append("  eps=%.0e  " % eps + "  ".join(
            "%s=%.4f" % (s, prof.solved_fraction(s)) for s in prof.solvers))
    ratios = correction_ratio(results)
    if ratios:
        lines += ["", "correction rounds V3/V4 per problem:"]
        for p, q in ratios.items():
            lines.append("  %-18s %s" % (p, "n/a" if math.isnan(q) else "%.3f" % q))
    return "\n".join(lines) + "\n"


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def profile_svg(prof, width=480, height=340):
    """Self-contained SVG of a profile: ``log2(tau)`` on x, ``rho`` on y."""
    ml, mr, mt, mb = 50, 90, 30, 40
    pw, ph = width - ml - mr, height - mt - mb
    tmax = float(prof.taus[-1]) if len(prof.taus) else 1.0
    xmax = max(math.log2(tmax) * 1.05, 1.0)

    def px(t):
        return ml + pw * (math.log2(t) / xmax if np.isfinite(t) else 1.0)

    def py(r):
        return mt + ph * (1.0 - r)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="%d" height="%d">'
           % (width, height),
           '<rect x="0" y="0" width="%d" height="%d" fill="white"/>' % (width, height),
           '<text x="%d" y="18" font-size="13" font-family="sans-serif">'
           'performance profile, eps = %.0e</text>' % (ml, prof.eps),
           '<rect x="%d" y="%d" width="%d" height="%d" fill="none" stroke="black"/>'
           % (ml, mt, pw, ph)]
    for r in (0.0, 0.25, 0.5, 0.75, 1.0):
        out.append('<text x="%d" y="%.1f" font-size="10" text-anchor="end" '
                   'font-family="sans-serif">%.2f</text>' % (ml - 4, py(r) + 3, r))
    for k in range(int(math.floor(xmax)) + 1):
        out.append('<text x="%.1f" y="%d" font-size="10" text-anchor="middle" '
                   'font-family="sans-serif">%d</text>' % (px(2.0 ** k), mt + ph + 14, 2 ** k))
    out.append('<text x="%.1f" y="%d" font-size="11" text-anchor="middle" '
               'font-family="sans-serif">tau (gradient evaluations / best)</text>'
               % (ml + pw / 2, height - 6))
    for i, s in enumerate(prof.solvers):
        pts = []
        prev = 0.0
        for t, r in zip(prof.taus, prof.rho[s]):
            pts.append((px(t), py(prev)))
            pts.append((px(t), py(r)))
            prev = r
        pts.append((ml + pw, py(prev)))
        color = _COLORS[i % len(_COLORS)]
        out.append('<polyline fill="none" stroke="%s" stroke-width="1.5" points="%s"/>'
                   % (color, " ".join("%.2f,%.2f" % p for p in pts)))
        ly = mt + 14 + 16 * i
        out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" stroke-width="1.5"/>'
                   % (ml + pw + 8, ly, ml + pw + 28, ly, color))
        out.append('<text x="%d" y="%d" font-size="11" font-family="sans-serif">%s</text>'
                   % (ml + pw + 32, ly + 4, s))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(results, out_dir, epsilons=DEFAULT_EPSILONS, flag_eps=1e-4, record_wall_time=False):
    """Write ``runs.csv``, ``summary.txt`` and one ``profile_eps_*.svg`` per tolerance."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, "cannot create %s: %s" % (out_dir, exc.strerror)) from None
    paths = [os.path.join(out_dir, "runs.csv")]
    write_csv(results, paths[0], flag_eps, record_wall_time)
    paths.append(os.path.join(out_dir, "summary.txt"))
    with _open_for_write(paths[-1]) as fh:
        fh.write(summary_text(results, epsilons))
    f_star = best_values(results)
    for eps in epsilons:
        paths.append(os.path.join(out_dir, "profile_eps_%.0e.svg" % eps))
        with _open_for_write(paths[-1]) as fh:
            fh.write(profile_svg(build_profiles(results, eps, f_star)))
    return paths


def run_and_emit(spec, out_dir=None, progress=None):
    out_dir = out_dir or spec.output_dir
    if not out_dir:
        raise SpecError("no output directory given")
    results = run_matrix(spec, progress)
    return results, emit(results, out_dir, spec.epsilons, spec.flag_eps, spec.record_wall_time)


__all__ = [
    "RunMatrixSpec", "SpecError", "RunResult", "ProfileTable", "parse_spec_text", "load_spec",
    "run_one", "run_matrix", "best_values", "classify", "cost_to_solve", "build_profiles",
    "flag_counts", "correction_ratio", "write_csv", "summary_text", "profile_svg", "emit",
    "run_and_emit",
]
