"""Command-line front end: ``stringavg {solve,superiorize,generate,check}``.

Exit codes: 0 converged / valid, 2 iteration limit reached, 1 usage or
input error. Summaries go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from .dsap import STRATEGY_NAMES, SolverConfig, Status, make_strategy, solve
from .perturbation import (
    DistanceToAnchor,
    Geometric,
    Linear,
    PerturbationSchedule,
    PowerLaw,
    SeededRandomUnit,
    SquaredNorm,
    Zero,
    perturbed_solve,
    superiorize,
)
from .problems_io import ProblemFileError, dumps_problem, generate_random, load_problem, write_trace
from .strings import StarConstraints, validate_star

log = logging.getLogger("stringavg")

EXIT_OK, EXIT_ERROR, EXIT_MAXITER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text):
    try:
        return np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _strategy_args(p):
    p.add_argument("--problem", required=True, metavar="PATH")
    p.add_argument("--strategy", default="sequential", choices=STRATEGY_NAMES)
    p.add_argument("--blocks", type=int, default=None, help="string count for partition strategies")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=None, help="minimum weight Δ, default 0.9/max(m, strings)")
    p.add_argument("--qbar", type=int, default=None, help="maximum string length, default m")


def _solver_args(p, default_rule):
    _strategy_args(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--x0", type=_floats, default=None, metavar="CSV", help="start point, default origin (write --x0=-1,2 for a leading minus)")
    p.add_argument("--trace", default=None, metavar="PATH")
    p.add_argument("--beta-rule", default=default_rule, choices=("zero", "geometric", "powerlaw"))
    p.add_argument("--beta0", type=float, default=1.0)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--exponent", type=float, default=2.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stringavg", description="Dynamic string-averaging projection solver.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run DSAP (random-unit perturbations if --beta-rule is set)")
    _solver_args(p, "zero")

    p = sub.add_parser("superiorize", help="compare unperturbed and superiorized runs")
    _solver_args(p, "geometric")
    p.add_argument("--objective", default="squared-norm", choices=("squared-norm", "linear", "distance-to-anchor"))
    p.add_argument("--anchor", type=_floats, default=None, metavar="CSV")
    p.add_argument("--c", type=_floats, default=None, metavar="CSV")

    p = sub.add_parser("generate", help="write a random consistent problem")
    p.add_argument("--kind", default="mixed", choices=("halfspaces", "mixed"))
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--out", default=None, metavar="PATH", help="default: stdout")

    p = sub.add_parser("check", help="validate a problem and a strategy's admissibility")
    _strategy_args(p)
    p.add_argument("--dry-run", type=int, default=100, metavar="K", help="iterations to dry-run")
    return parser


def _load(path):
    problem = load_problem(path)
    log.info("loaded %s: n=%d, m=%d", path, problem.dimension, problem.m)
    return problem


def _build_strategy(args, m):
    if args.blocks is not None and not 1 <= args.blocks <= m:
        raise UsageError(f"--blocks must lie in [1, m={m}]")
    probe = make_strategy(args.strategy, m, blocks=args.blocks, seed=args.seed)
    delta = 0.9 / max(m, probe.max_strings) if args.delta is None else args.delta
    qbar = m if args.qbar is None else args.qbar
    if not 0.0 < delta < 1.0 / m:
        raise UsageError(f"Δ must lie in (0, 1/m) = (0, {1.0 / m:g}), got {delta:g}")
    if probe.max_length > qbar:
        raise UsageError(f"string length {probe.max_length} exceeds q̄={qbar} (strings of length up to m={m})")
    try:
        star = StarConstraints(m, delta, qbar)
        strategy = make_strategy(args.strategy, m, blocks=args.blocks, seed=args.seed, star=star)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    log.info("strategy %s with Δ=%g, q̄=%d", strategy.name, delta, qbar)
    return strategy


def _beta_rule(args):
    if args.beta_rule == "zero":
        return Zero()
    try:
        if args.beta_rule == "geometric":
            return Geometric(args.beta0, args.ratio)
        return PowerLaw(args.beta0, args.exponent)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args):
    if args.max_iters < 1:
        raise UsageError("--max-iters must be >= 1")
    if not args.tol > 0:
        raise UsageError("--tol must be > 0")
    return SolverConfig(proximity_tol=args.tol, max_iterations=args.max_iters)


def _x0(args, problem):
    if args.x0 is None:
        return np.zeros(problem.dimension)
    if args.x0.size != problem.dimension:
        raise UsageError(f"--x0 has {args.x0.size} coordinates, problem dimension is {problem.dimension}")
    return args.x0


def cmd_solve(args) -> int:
    config = _config(args)
    rule = _beta_rule(args)
    problem = _load(args.problem)
    strategy = _build_strategy(args, problem.m)
    x0 = _x0(args, problem)
    t0 = time.monotonic()
    if isinstance(rule, Zero):
        res = solve(problem, strategy, config, x0)
    else:
        res = perturbed_solve(problem, strategy, config, x0, PerturbationSchedule(rule, SeededRandomUnit(args.seed)))
    elapsed = time.monotonic() - t0
    if args.trace:
        write_trace(res.trace, args.trace)
        log.info("trace written to %s", args.trace)
    print(f"status: {res.status.value}")
    print(f"iterations: {len(res.trace)}")
    print(f"final proximity: {res.trace.final_proximity:.17g}")
    print(f"result: {','.join(format(v, '.17g') for v in res.result)}")
    print(f"wall time: {elapsed:.3f} s")
    return EXIT_OK if res.status is Status.CONVERGED else EXIT_MAXITER


def _objective(args, n):
    if args.objective == "squared-norm":
        return SquaredNorm()
    vec, flag = (args.anchor, "--anchor") if args.objective == "distance-to-anchor" else (args.c, "--c")
    if vec is None:
        raise UsageError(f"objective {args.objective} requires {flag}")
    if vec.size != n:
        raise UsageError(f"{flag} has {vec.size} coordinates, problem dimension is {n}")
    return DistanceToAnchor(vec) if args.objective == "distance-to-anchor" else Linear(vec)


def cmd_superiorize(args) -> int:
    config = _config(args)
    rule = _beta_rule(args)
    problem = _load(args.problem)
    strategy = _build_strategy(args, problem.m)
    objective = _objective(args, problem.dimension)
    x0 = _x0(args, problem)
    t0 = time.monotonic()
    base = solve(problem, strategy, config, x0)
    sup = superiorize(problem, strategy, config, x0, objective, rule)
    elapsed = time.monotonic() - t0
    if args.trace:
        write_trace(sup.trace, args.trace)
        log.info("trace written to %s", args.trace)
    rows = [
        ("status", base.status.value, sup.status.value),
        ("iterations", len(base.trace), len(sup.trace)),
        ("final proximity", format(base.trace.final_proximity, ".17g"), format(sup.trace.final_proximity, ".17g")),
        ("objective", format(objective(base.result), ".17g"), format(objective(sup.result), ".17g")),
    ]
    print(f"{'':<16} {'baseline':<24} {'superiorized':<24}")
    for name, b, s in rows:
        print(f"{name:<16} {str(b):<24} {str(s):<24}".rstrip())
    print(f"wall time: {elapsed:.3f} s")
    return EXIT_OK if sup.status is Status.CONVERGED else EXIT_MAXITER


def cmd_generate(args) -> int:
    try:
        problem = generate_random(args.kind, args.n, args.m, args.seed, args.margin)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    meta = {"kind": args.kind, "margin": args.margin, "seed": args.seed}
    text = dumps_problem(problem, meta)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out} (n={problem.dimension}, m={problem.m})")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    if args.dry_run < 1:
        raise UsageError("--dry-run must be >= 1")
    problem = _load(args.problem)
    strategy = _build_strategy(args, problem.m)
    bad = 0
    for k in range(args.dry_run):
        report = validate_star(strategy.amalgamator(k), strategy.star)
        if not report.ok:
            bad += 1
            print(f"iteration {k + 1}: {report}", file=sys.stderr)
    star = strategy.star
    if bad:
        print(f"invalid: {bad} of {args.dry_run} emitted amalgamators violate Δ={star.delta:g}, q̄={star.qbar}",
              file=sys.stderr)
        return EXIT_ERROR
    print(f"ok: problem n={problem.dimension} m={problem.m}; {strategy.name} with Δ={star.delta:g}, "
          f"q̄={star.qbar} admissible for {args.dry_run} iterations")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "superiorize": cmd_superiorize,
    "generate": cmd_generate,
    "check": cmd_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr, format="%(levelname)s: %(message)s"
        )
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    except (ProblemFileError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
