"""Command-line front end: fragmentation experiments, exponent queries,
oracle checks, matrix generation, and the acceptance suite.

Exit codes: 0 success, 2 config error, 3 input parse error, 4 invariant
violation.  Trial seeds are derived by spawning a numpy SeedSequence from
the master seed (one child per trial, split again into schedule and sample
streams), so identical configs reproduce byte-identical reports and trials
stay independent under parallel execution.  METRIC_FRAG_THREADS caps the
worker pool; the default of 1 runs trials serially.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    MetricFragError,
    NonzeroDiagonal,
    NotSymmetric,
    ParseError,
    TriangleViolation,
    ZeroOffDiagonal,
)
from .exponents import beta_p, interval_sum, solve_beta, solve_theta, sup_interval_sum
from .fragmentation import fragment_iterated, jensen_lower_bound, validate_result
from .generators import generate, parse_generator_spec
from .oracle import embeddable, max_subset
from .radii import load_schedule, mn07_geometric_schedule, optimal_schedule
from .spaces import FiniteMetricSpace, format_matrix_text, read_matrix_file

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    input: str | None
    generator: str | None
    D: float
    trials: int
    seed: int
    schedule: str = "optimal"
    output: str = "json"
    out: str | None = None
    checks: bool = False


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    n: int
    sizes: tuple[int, ...]          # sorted
    trial_rows: tuple[tuple[int, float | None, int], ...]  # (trial, u, size) in trial order
    mean: float
    se: float
    max_size: int
    bound: float                    # n^(1 - beta(2/D))
    jensen: float
    violations: int
    failed_trials: tuple[int, ...]
    wall_clock_s: float

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA_VERSION,
            "input": self.config.input or self.config.generator,
            "n": self.n,
            "D": self.config.D,
            "trials": self.config.trials,
            "seed": self.config.seed,
            "schedule": self.config.schedule,
            "sizes": list(self.sizes),
            "mean": self.mean,
            "se": self.se,
            "max": self.max_size,
            "bound": self.bound,
            "jensen_lower_bound": self.jensen,
            "checks": {
                "enabled": self.config.checks,
                "violations": self.violations,
                "failed_trials": list(self.failed_trials),
            },
            "wall_clock_s": self.wall_clock_s,
        }
        return json.dumps(doc, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        lines = ["trial,u,survivors"]
        for trial, u, size in self.trial_rows:
            lines.append(f"{trial},{'' if u is None else repr(u)},{size}")
        return "\n".join(lines) + "\n"


def _load_space(config) -> FiniteMetricSpace:
    if config.input:
        return read_matrix_file(config.input)
    return generate(parse_generator_spec(config.generator))


def _run_trial(args) -> tuple[int, float | None, int, list[str]]:
    dist, diameter, d_min, D, mode, beta_val, custom_values, trial, child_ss, checks = args
    space = FiniteMetricSpace(n=dist.shape[0], dist=dist, diameter=diameter, d_min=d_min)
    sched_ss, sample_ss = child_ss.spawn(2)
    u = None
    if mode == "optimal":
        u = float(np.random.default_rng(sched_ss).random())
        schedule = optimal_schedule(beta_val, u)
    elif mode == "mn07":
        schedule = mn07_geometric_schedule(np.random.default_rng(sched_ss))
    else:
        from .radii import custom_schedule

        schedule = custom_schedule(custom_values)
    result = fragment_iterated(space, schedule, D, np.random.default_rng(sample_ss))
    bad = validate_result(space, result) if checks else []
    return trial, u, len(result.survivors), bad


def run(config: ExperimentConfig) -> ExperimentReport:
    """Execute the experiment described by the config and aggregate a report."""
    if config.trials < 1:
        raise MetricFragError(f"trials must be >= 1, got {config.trials}")
    if not config.D > 2.0:
        raise MetricFragError(f"fragmentation needs distortion > 2, got {config.D}")
    start = time.perf_counter()
    space = _load_space(config)
    beta_val = solve_beta(2.0 / config.D).value
    custom_values = None
    mode = config.schedule
    if mode.startswith("file:"):
        custom_values = list(load_schedule(mode[len("file:"):]).known_values())
        mode = "custom"
    elif mode not in ("optimal", "mn07"):
        raise MetricFragError(f"unknown schedule {config.schedule!r}")
    children = np.random.SeedSequence(config.seed).spawn(config.trials)
    jobs = [
        (space.dist, space.diameter, space.d_min, config.D, mode, beta_val,
         custom_values, t, children[t], config.checks)
        for t in range(config.trials)
    ]
    threads = int(os.environ.get("METRIC_FRAG_THREADS", "1"))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run_trial, jobs))
    else:
        outcomes = [_run_trial(job) for job in jobs]
    trial_rows = tuple((t, u, size) for t, u, size, _ in outcomes)
    sizes = tuple(sorted(size for _, _, size, _ in outcomes))
    failed = tuple(t for t, _, _, bad in outcomes if bad)
    count = len(sizes)
    mean = sum(sizes) / count
    variance = sum((s - mean) ** 2 for s in sizes) / (count - 1) if count > 1 else 0.0
    se = math.sqrt(variance / count)
    bound = space.n ** (1.0 - beta_val)
    jensen = jensen_lower_bound(space, config.D)
    return ExperimentReport(
        config=config,
        n=space.n,
        sizes=sizes,
        trial_rows=trial_rows,
        mean=mean,
        se=se,
        max_size=max(sizes),
        bound=bound,
        jensen=jensen,
        violations=sum(len(bad) for _, _, _, bad in outcomes),
        failed_trials=failed,
        wall_clock_s=time.perf_counter() - start,
    )


def parse_matrix_file(path) -> FiniteMetricSpace:
    """Validated space from a distance-matrix text file (errors carry line/column)."""
    return read_matrix_file(path)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_input_args(parser, required=True):
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--input", help="distance-matrix text file")
    group.add_argument("--generator", help="generator spec, e.g. euclidean:dim=3,n=128,seed=7")


def _cmd_frag(args) -> int:
    config = ExperimentConfig(
        input=args.input, generator=args.generator, D=args.distortion,
        trials=args.trials, seed=args.seed, schedule=args.schedule,
        output=args.output, out=args.out, checks=args.checks,
    )
    report = run(config)
    _emit(report.to_json() if config.output == "json" else report.to_csv(), config.out)
    if config.checks and report.violations:
        for t in report.failed_trials:
            print(f"invariant violation in trial {t} (master seed {config.seed})", file=sys.stderr)
        return 4
    return 0


def _cmd_exponent(args) -> int:
    if args.theta is not None:
        sol = solve_theta(args.theta)
        print(f"theta({args.theta}) = {sol.value!r}  residual={sol.residual:.3e}  "
              f"bracket=[{sol.bracket[0]!r}, {sol.bracket[1]!r}]")
    if args.beta is not None:
        sol = solve_beta(args.beta)
        print(f"beta({args.beta}) = {sol.value!r}  residual={sol.residual:.3e}  "
              f"bracket=[{sol.bracket[0]!r}, {sol.bracket[1]!r}]")
    if args.beta_p is not None:
        alpha, p = args.beta_p
        print(f"beta_p(alpha={alpha}, p={p}) = {beta_p(alpha, p)!r}")
    if args.sup is not None:
        D = args.sup
        bv = solve_beta(2.0 / D).value
        sup = sup_interval_sum(bv, D, args.grid)
        print(f"sup interval_sum over r (D={D}, grid={args.grid}) = {sup!r}  beta = {bv!r}")
    if args.interval is not None:
        D, r = args.interval
        bv = solve_beta(2.0 / D).value
        s = interval_sum(bv, D, r)
        print(f"interval_sum(D={D}, r={r}) total = {s.total!r}  terms = {s.terms}")
    return 0


def _cmd_oracle(args) -> int:
    config_like = argparse.Namespace(input=args.input, generator=args.generator)
    space = _load_space(config_like)
    if args.max_subset:
        size, witness = max_subset(space, args.distortion, args.size_cap)
        print(f"max_subset size={size} witness={','.join(map(str, witness))}")
    if args.subset:
        points = [int(tok) for tok in args.subset.split(",")]
        verdict = embeddable(space, points, args.distortion)
        print(f"embeddable={'true' if verdict else 'false'}")
    return 0


def _cmd_gen(args) -> int:
    space = generate(parse_generator_spec(args.generator))
    _emit(format_matrix_text(space), args.out)
    return 0


def _cmd_check(args) -> int:
    from . import acceptance

    numbers = None
    if args.criteria:
        numbers = [int(tok) for tok in args.criteria.split(",")]
    results = acceptance.run_all(numbers)
    ok = True
    for res in results:
        print(res.line())
        ok = ok and res.passed
    return 0 if ok else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metricfrag",
                                     description="Randomized metric fragmentation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    frag = sub.add_parser("frag", help="run fragmentation experiments")
    _add_input_args(frag)
    frag.add_argument("--distortion", type=float, required=True)
    frag.add_argument("--trials", type=int, default=100)
    frag.add_argument("--seed", type=int, default=0)
    frag.add_argument("--schedule", default="optimal",
                      help="optimal | mn07 | file:PATH (default: optimal)")
    frag.add_argument("--output", choices=("json", "csv"), default="json")
    frag.add_argument("--out", help="write the report here instead of stdout")
    frag.add_argument("--checks", action="store_true",
                      help="assert all structural invariants per trial")
    frag.set_defaults(func=_cmd_frag)

    exponent = sub.add_parser("exponent", help="solve the exponent equations")
    exponent.add_argument("--theta", type=float, help="distortion D for theta(D)")
    exponent.add_argument("--beta", type=float, help="alpha for beta(alpha)")
    exponent.add_argument("--beta-p", nargs=2, type=float, metavar=("ALPHA", "P"))
    exponent.add_argument("--sup", type=float, metavar="D",
                          help="supremum of the interval sum for beta(2/D)")
    exponent.add_argument("--interval", nargs=2, type=float, metavar=("D", "R"))
    exponent.add_argument("--grid", type=int, default=10_000)
    exponent.set_defaults(func=_cmd_exponent)

    oracle = sub.add_parser("oracle", help="exact embeddability checks")
    _add_input_args(oracle)
    oracle.add_argument("--distortion", type=float, required=True)
    oracle.add_argument("--max-subset", action="store_true")
    oracle.add_argument("--subset", help="comma-separated point indices")
    oracle.add_argument("--size-cap", type=int, default=None)
    oracle.set_defaults(func=_cmd_oracle)

    gen = sub.add_parser("gen", help="emit a generated distance matrix")
    gen.add_argument("--generator", required=True)
    gen.add_argument("--out")
    gen.set_defaults(func=_cmd_gen)

    check = sub.add_parser("check", help="run the acceptance suite")
    check.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, NotSymmetric, NonzeroDiagonal, ZeroOffDiagonal,
            TriangleViolation, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MetricFragError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
