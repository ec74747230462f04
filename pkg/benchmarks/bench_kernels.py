#!/usr/bin/env python3
"""Numba vs pure-numpy kernels.

Times every problem kernel and the box kernels with both implementations
in one process, then times full V3 solves in subprocesses, each problem twice,
once with NQN_DISABLE_JIT=1.  The end-to-end timings exclude import and
compilation.

    python benchmarks/bench_kernels.py [--n 100] [--repeat 2000]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from nqn import _box_kernels as bk
from nqn import _problem_kernels as pk
from nqn._accel import HAS_NUMBA
from nqn.problems import get_problem, make_start, problem_names


def _time(fn, args, repeat):
    fn(*args)  # compile / warm up
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def _row(name, t_np, t_nb):
    print("%-22s %10.2f us %10.2f us %8.1fx" % (name, 1e6 * t_np, 1e6 * t_nb, t_np / t_nb))


def kernels(n, repeat):
    print("%-22s %13s %13s %9s" % ("kernel", "numpy", "numba", "speedup"))
    for name in problem_names():
        prob = get_problem(name, n)
        x = make_start(prob.bounds, 0)
        f_np, g_np = pk.NUMPY_KERNELS[name](x)
        f_nb, g_nb = pk.NUMBA_KERNELS[name](x)
        assert np.isclose(f_np, f_nb, rtol=1e-12) and np.allclose(g_np, g_nb, rtol=1e-10)
        _row(name, _time(pk.NUMPY_KERNELS[name], (x,), repeat),
             _time(pk.NUMBA_KERNELS[name], (x,), repeat))

    rng = np.random.default_rng(0)
    lo, up = -np.ones(n), np.ones(n)
    x = rng.uniform(-1, 1, n)
    x[::3] = -1.0
    p = rng.standard_normal(n)
    active = rng.random(n) < 0.3
    for name, args in [("project", (2 * x, lo, up)),
                       ("t_operator", (x, p, lo, up)),
                       ("binding_masks", (x, p, lo, up)),
                       ("max_breakpoint", (x, p, lo, up)),
                       ("blocked_mask", (x, p, lo, up, active))]:
        _row(name, _time(getattr(bk, "_%s_np" % name), args, repeat),
             _time(getattr(bk, "_%s_nb" % name), args, repeat))


_SOLVE_SNIPPET = """
import time
from nqn._accel import backend_name
from nqn.problems import get_problem, make_start
from nqn.solver import SolverConfig, nqn_solve
p = get_problem(%r, %d)
x0 = make_start(p.bounds, 0)
nqn_solve(p, x0, SolverConfig(budget=20))  # load or compile the kernels
t0 = time.perf_counter()
rec = nqn_solve(p, x0, SolverConfig(variant="V3"))
print(backend_name(), time.perf_counter() - t0, rec.grad_eval_count, rec.best_f)
"""


def end_to_end(n, problems=("Chained_CB3_1", "Nonsmooth_Brown", "MAXHILB")):
    print()
    print("%-18s %-8s %10s %8s  %s" % ("solve (V3)", "backend", "seconds", "evals", "best_f"))
    for name in problems:
        for flag in ("0", "1"):
            env = dict(os.environ, NQN_DISABLE_JIT=flag)
            proc = subprocess.run([sys.executable, "-c", _SOLVE_SNIPPET % (name, n)], env=env,
                                  capture_output=True, text=True, check=True)
            backend, secs, evals, best = proc.stdout.split()
            print("%-18s %-8s %10.3f %8s  %s" % (name, backend, float(secs), evals, best))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    if not HAS_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    kernels(args.n, args.repeat)
    end_to_end(args.n)


if __name__ == "__main__":
    main()
