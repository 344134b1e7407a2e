"""Command-line interface: ``klearn {gen,sample,estimate,check,experiment}``.

Exit codes: 0 success, 1 usage error, 2 domain error (unsatisfiable input,
violated precondition, malformed file), 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import conditions
from ._rng import derive_seed
from .distribution import DEFAULT_CAP, enumerate_gibbs, sample_exact_many, sample_rejection
from .errors import BudgetExhaustedError, KlearnError
from .estimator import EstimatorConfig, estimate
from .experiments import (
    PRESETS,
    ExperimentConfig,
    render_consistency,
    render_impossibility,
    run_consistency,
    run_impossibility,
)
from .formula import Assignment, random_bounded_formula, read_dimacs, write_dimacs
from .gadgets import build_psi0, build_psi1, build_psi2, build_psi3

EXIT_USAGE, EXIT_DOMAIN, EXIT_BUDGET = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _epsilon(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'auto', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return value


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# -- gen -----------------------------------------------------------------------

def cmd_gen(args) -> int:
    info = {"variant": args.variant}
    comments = []
    if args.variant in ("psi0", "psi1"):
        formula = (build_psi0 if args.variant == "psi0" else build_psi1)(args.n, args.k)
        comments.append(f"gadget variant={args.variant} n={args.n} k={args.k}")
    elif args.variant in ("psi2", "psi3"):
        if args.b is None:
            raise UsageError("--b is required for psi2/psi3")
        builder = build_psi2 if args.variant == "psi2" else build_psi3
        spec, formula = builder(args.n, args.k, args.b, args.seed, args.mode, args.cap)
        comments += spec.metadata()
        info.update(jstar=spec.j_star, verified=spec.verified, attempts=spec.attempts)
    else:
        if args.d is None or args.m is None:
            raise UsageError("--d and --m are required for random formulas")
        formula = random_bounded_formula(args.n, args.k, args.d, args.m, args.seed, monotone=args.monotone)
        comments.append(
            f"random n={args.n} k={args.k} d={args.d} m={args.m} seed={args.seed} monotone={str(args.monotone).lower()}"
        )
    info.update(n=formula.n, k=formula.k, d=formula.d, degree=formula.max_degree, clauses=formula.m)
    _emit(write_dimacs(formula, comments), args.out)
    print(json.dumps(info), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return 0


# -- sample --------------------------------------------------------------------

def cmd_sample(args) -> int:
    formula = read_dimacs(args.formula)
    if args.sampler == "exact":
        table = enumerate_gibbs(formula, args.beta, args.cap)
        reports = sample_exact_many(table, args.seed, args.count)
    else:
        reports = [
            sample_rejection(formula, args.beta, derive_seed(args.seed, i), args.max_attempts)
            for i in range(args.count)
        ]
    _emit("".join(r.assignment.to_bits() + "\n" for r in reports), args.out)
    return 0


# -- estimate ------------------------------------------------------------------

def cmd_estimate(args) -> int:
    formula = read_dimacs(args.formula)
    if args.assignment_file:
        with open(args.assignment_file) as fh:
            text = fh.read().split()
        if not text:
            raise UsageError("assignment file is empty")
        bits = text[0]
    elif args.assignment:
        bits = args.assignment
    else:
        raise UsageError("one of --assignment or --assignment-file is required")
    assignment = Assignment.from_bits(bits)
    if assignment.n != formula.n:
        raise UsageError(f"assignment has {assignment.n} values, formula has n={formula.n}")
    result = estimate(formula, assignment, EstimatorConfig(args.B, args.epsilon))
    print(json.dumps(result.as_dict()))
    return 0


# -- check ---------------------------------------------------------------------

def cmd_check(args) -> int:
    if args.B is None and args.beta_star is None and args.alpha is None:
        raise UsageError("supply at least one of --B, --beta-star, --alpha")
    even_k = args.k >= 4 and args.k % 2 == 0
    reports = []
    if args.B is not None:
        reports.append(conditions.learnable_condition(args.d, args.k, args.B))
        reports.append(conditions.lll_condition_check(args.d, args.k, args.B))
    if args.beta_star is not None and even_k:
        reports.append(conditions.impossibility_thm13(args.d, args.k, args.beta_star))
        if abs(args.beta_star) > 1:
            reports.append(conditions.impossibility_thm12(args.d, args.k, args.beta_star))
    if args.alpha is not None and even_k:
        reports.append(conditions.impossibility_thm37(args.d, args.k, args.alpha))
    out = [r.as_dict() for r in reports]
    if args.alpha is not None and args.beta_star is not None:
        out.append({"name": "alpha_condition", "holds": conditions.alpha_condition(args.alpha, args.beta_star)})
    print(json.dumps(out, indent=1))
    return 0


# -- experiment ----------------------------------------------------------------

def _experiment_config(args, kind: str) -> ExperimentConfig:
    values = {}
    if getattr(args, "preset", None):
        values.update(PRESETS[args.preset])
    for key in ("k", "d", "beta_star", "B"):
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)
    config = ExperimentConfig(
        kind=kind,
        trials=args.trials,
        seed=args.seed,
        output_path=args.output,
        format=args.format,
        cap=args.cap,
        **values,
    )
    if args.n_grid is not None:
        config.n_grid = args.n_grid
    if args.epsilon is not None:
        config.epsilon = None if args.epsilon == "auto" else args.epsilon
    if kind == "consistency":
        config.sampler = args.sampler
        config.clause_count = args.clause_count
        config.monotone = not args.signed
        config.max_attempts = args.max_attempts
        config.jobs = args.jobs
        config.timing = args.timing
    else:
        config.variant = args.variant
        config.b = args.b
        config.beta_pair = (args.beta1, args.beta2)
    return config


def cmd_consistency(args) -> int:
    config = _experiment_config(args, "consistency")
    records = run_consistency(config)
    trials, summary = render_consistency(records, config.format)
    if config.output_path in (None, "-"):
        sys.stdout.write(trials)
        sys.stderr.write(summary)
    else:
        _emit(trials, config.output_path)
        sys.stdout.write(summary)
    return 0


def cmd_impossibility(args) -> int:
    config = _experiment_config(args, "impossibility")
    _emit(render_impossibility(run_impossibility(config), config.format), config.output_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="klearn", description="One-shot estimation for weighted k-SAT.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a gadget or random formula as DIMACS")
    p.add_argument("variant", choices=["psi0", "psi1", "psi2", "psi3", "random"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int, help="clause count (random)")
    p.add_argument("--monotone", action="store_true", help="all-positive literals (random)")
    p.add_argument("--mode", choices=["verified", "analytic"], default="verified")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sample", help="draw assignments from the Gibbs law")
    p.add_argument("formula")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--sampler", choices=["exact", "rejection"], default="exact")
    p.add_argument("--max-attempts", type=int, default=1_000_000)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="estimate beta from one satisfying assignment")
    p.add_argument("formula")
    p.add_argument("--assignment", help="0/1 string, variable 0 leftmost")
    p.add_argument("--assignment-file")
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("check", help="evaluate learnability / impossibility conditions")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--B", type=float)
    p.add_argument("--beta-star", type=float)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("experiment", help="run a seeded experiment")
    exp = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("consistency", "impossibility"):
        q = exp.add_parser(kind)
        q.add_argument("--n-grid", type=_int_list)
        q.add_argument("--k", type=int)
        q.add_argument("--beta-star", type=float)
        q.add_argument("--B", type=float)
        q.add_argument("--trials", type=int, default=200 if kind == "consistency" else 100)
        q.add_argument("--seed", type=_seed, default=0)
        q.add_argument("--epsilon", type=_epsilon, help="bisection width, or 'auto' for n^-1/2")
        q.add_argument("--cap", type=int, default=DEFAULT_CAP)
        q.add_argument("--output", help="output path (default stdout)")
        q.add_argument("--format", choices=["csv", "json"], default="csv")
        if kind == "consistency":
            q.add_argument("--preset", choices=sorted(PRESETS))
            q.add_argument("--d", type=int)
            q.add_argument("--sampler", choices=["exact", "rejection"], default="rejection")
            q.add_argument("--clause-count", type=int)
            q.add_argument("--signed", action="store_true", help="uniform literal signs instead of monotone")
            q.add_argument("--max-attempts", type=int, default=1_000_000)
            q.add_argument("--jobs", type=int, default=1)
            q.add_argument("--timing", action="store_true", help="fill wall_time_ms (output no longer reproducible)")
            q.set_defaults(func=cmd_consistency)
        else:
            q.add_argument("--variant", choices=["psi0", "psi1", "psi2", "psi3"], default="psi0")
            q.add_argument("--b", type=float, default=2.0)
            q.add_argument("--beta1", type=float, default=3.0)
            q.add_argument("--beta2", type=float, default=4.0)
            q.set_defaults(func=cmd_impossibility)
    return parser


def _impossibility_defaults(args) -> None:
    if getattr(args, "kind", None) == "impossibility":
        if args.k is None:
            args.k = 4
        if args.n_grid is None:
            args.n_grid = [12]
        if args.beta_star is None:
            args.beta_star = args.k * math.log(2)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _impossibility_defaults(args)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"klearn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"klearn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExhaustedError as exc:
        print(f"klearn: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except KlearnError as exc:
        print(f"klearn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
