"""``nqn`` command line: solve one instance, run a benchmark matrix,
check gradients, list the problem catalog.

Exit status is 0 on success, 1 when ``solve`` ends with flag OTHER (or
``check-grads`` exceeds its tolerance) and 2 on usage or configuration
errors.
"""
import argparse
import os
import sys

from . import __version__
from ._accel import backend_name
from .bench import SpecError, classify, load_spec, run_and_emit
from .problems import (REGISTRY, ProblemConfigError, fd_check_problem, get_problem, make_start,
                       problem_names)
from .solver import VARIANTS, SolverConfig, nqn_solve

FD_TOL = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, "%s: error: %s\n" % (self.prog, message))


def build_parser():
    p = _Parser(prog="nqn", description="Bound-constrained nonsmooth L-BFGS solver and "
                                        "benchmark harness.")
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="run one problem instance")
    s.add_argument("--problem", help="problem name (see list-problems)")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--variant", default="V3", type=str.upper, choices=VARIANTS)
    s.add_argument("--seed", type=int, default=0, help="start seed")
    s.add_argument("--budget-mult", type=int, default=100,
                   help="gradient budget as a multiple of n")
    s.add_argument("--eps", type=float, default=1e-4, help="tolerance for the OK flag")
    s.add_argument("--trace", metavar="PATH", help="write one CSV line per iteration")

    b = sub.add_parser("bench", help="run a benchmark matrix from a spec file")
    b.add_argument("--spec", required=True, metavar="FILE")
    b.add_argument("--out", metavar="DIR", help="output directory (default: $NQN_OUT_DIR, "
                                                "then output_dir from the spec file)")
    b.add_argument("--jobs", type=int, help="worker processes")
    b.add_argument("--record-wall-time", action="store_true", default=None,
                   help="fill the wall_time CSV column (makes the CSV run-dependent)")
    b.add_argument("--verbose", action="store_true")

    c = sub.add_parser("check-grads", help="finite-difference check of every gradient")
    c.add_argument("--n", type=int, default=50)
    c.add_argument("--points", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--problem", action="append", help="restrict to this problem (repeatable)")

    sub.add_parser("list-problems", help="print the problem catalog")
    return p


def _cmd_solve(args, out):
    if not args.problem:
        print("error: --problem is required; valid names: %s" % ", ".join(problem_names()),
              file=sys.stderr)
        return 2
    prob = get_problem(args.problem, args.n)
    x0 = make_start(prob.bounds, args.seed)
    cfg = SolverConfig(variant=args.variant, budget_multiplier=args.budget_mult)
    lines = []

    def trace(info):
        ls = info.line_search
        lines.append("%d,%r,%d,%d,%r,%s,%d\n" % (
            info.k, float(info.f), len(info.initial_set), len(info.final_set), float(ls.alpha),
            ls.status.value, info.grad_evals))

    rec = nqn_solve(prob, x0, cfg, trace if args.trace else None)
    if args.trace:
        try:
            with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
                fh.writelines(lines)
        except OSError as exc:
            print("error: cannot write %s: %s" % (args.trace, exc.strerror), file=sys.stderr)
            return 2
    f_star = rec.best_f if prob.f_star_hint is None else min(rec.best_f, prob.f_star_hint)
    flag = classify(rec, f_star, eps=args.eps)
    print("flag %s" % flag, file=out)
    print("best_f %r" % rec.best_f, file=out)
    print("grad_evals %d" % rec.grad_eval_count, file=out)
    print("termination %s" % rec.termination.value, file=out)
    print("f_star %r (%s)" % (f_star, "known optimum" if prob.f_star_hint is not None
                              and f_star == prob.f_star_hint else "best value of this run"),
          file=out)
    return 1 if flag == "OTHER" else 0


def _cmd_bench(args, out):
    env_out = os.environ.get("NQN_OUT_DIR") or None
    spec = load_spec(args.spec, jobs=args.jobs, record_wall_time=args.record_wall_time)
    if args.out:
        out_dir, source = args.out, "--out flag"
    elif env_out:
        out_dir, source = env_out, "NQN_OUT_DIR"
    elif spec.output_dir:
        out_dir, source = spec.output_dir, "spec file output_dir"
    else:
        raise SpecError("no output directory: pass --out, set NQN_OUT_DIR or add output_dir "
                        "to the spec file")
    if args.verbose:
        print("precedence: command-line flags > NQN_OUT_DIR (output directory only) > "
              "spec file > built-in defaults", file=out)
        print("output directory: %s (from %s)" % (out_dir, source), file=out)
        print("jobs: %d, budget_multiplier: %d, record_wall_time: %s, backend: %s"
              % (spec.jobs, spec.budget_multiplier, spec.record_wall_time, backend_name()),
              file=out)
    total = len(spec.tasks())
    done = [0]

    def progress(res):
        done[0] += 1
        if args.verbose:
            print("[%d/%d] %s n=%d seed=%d %s: %s, %d evals"
                  % (done[0], total, res.problem, res.n, res.seed, res.variant,
                     res.termination, res.grad_evals), file=out)

    _, paths = run_and_emit(spec, out_dir, progress)
    for path in paths:
        print("wrote %s" % path, file=out)
    return 0


def _cmd_check_grads(args, out):
    names = args.problem or problem_names()
    worst = 0.0
    for name in names:
        err = fd_check_problem(get_problem(name, args.n), args.points, args.seed)
        worst = max(worst, err)
        print("%-18s max_rel_error %.3e" % (name, err), file=out)
    ok = worst <= FD_TOL
    print("overall %.3e %s" % (worst, "PASS" if ok else "FAIL"), file=out)
    return 0 if ok else 1


def _cmd_list(args, out):
    for name in problem_names():
        d = REGISTRY[name]
        note = " (even n)" if d.even_only else ""
        print("%-18s %s%s  [%s]" % (name, d.formula, note, d.source), file=out)
    return 0


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    handler = {"solve": _cmd_solve, "bench": _cmd_bench, "check-grads": _cmd_check_grads,
               "list-problems": _cmd_list}[args.command]
    try:
        return handler(args, out)
    except (ProblemConfigError, SpecError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
