"""Command line entry point: ``kwprobe experiment|adversary|bounds|verify``."""

from __future__ import annotations

import argparse
import csv
import sys

from . import adversary, harness, verify
from .bounds import BoundDomainError, full_independence_unsuccessful_bound, t_alpha_eps, theorem4_bounds


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def cmd_experiment(args) -> int:
    try:
        spec = harness.ExperimentSpec.from_json(args.config)
    except (harness.SpecError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    results = harness.run_experiment(spec, workers=args.workers)
    harness.emit_csv(results, args.out if args.out != "-" else sys.stdout)
    return 0


def cmd_adversary(args) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["r", "trial", "a", "m", "total_steps"])
    for log_r in args.log_r:
        p = adversary.modulus_for_table(log_r)
        inst = adversary.build_instance(p, (1, 2))
        stats = adversary.measure_cost(inst, args.family, args.trials, args.seed, args.pair_mode)
        for t in stats.trials:
            writer.writerow([stats.r, t.trial, t.a, t.m, t.total_steps])
        print(
            f"# r={stats.r} p={p} mean={stats.mean_total_steps:.6f} stderr={stats.stderr:.6f}",
            file=sys.stderr,
        )
    return 0


def cmd_bounds(args) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["alpha", "eps", "T", "U", "I", "D", "S", "eq1"])
    status = 0
    for alpha in args.alpha_grid:
        try:
            b = theorem4_bounds(alpha, args.eps)
            t = t_alpha_eps(alpha, args.eps)
            eq1 = full_independence_unsuccessful_bound(alpha)
        except BoundDomainError as exc:
            print(f"alpha={alpha}: {exc}", file=sys.stderr)
            status = 2
            continue
        writer.writerow([f"{x:.6f}" for x in (alpha, args.eps, t, b.U, b.I, b.D, b.S, eq1)])
    return status


def cmd_verify(args) -> int:
    failed = False
    for name in args.suite:
        ok, lines = verify.run_suite(name)
        for line in lines:
            print(f"  {line}")
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
        failed |= not ok
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kwprobe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiment", help="run a configured experiment")
    exp_sub = exp.add_subparsers(dest="action", required=True)
    run = exp_sub.add_parser("run")
    run.add_argument("--config", required=True, help="flat JSON file with ExperimentSpec fields")
    run.add_argument("--out", required=True, help="CSV destination, '-' for stdout")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_experiment)

    adv = sub.add_parser("adversary", help="cost of the adversarial set under pairwise hashing")
    adv.add_argument("--log-r", type=_ints, required=True, help="comma-separated log2 table sizes")
    adv.add_argument("--trials", type=int, default=200)
    adv.add_argument("--family", choices=("cw", "star"), default="cw")
    adv.add_argument("--seed", type=int, default=0)
    adv.add_argument("--pair-mode", choices=("random", "fixed", "worst"), default="random")
    adv.set_defaults(func=cmd_adversary)

    bnd = sub.add_parser("bounds", help="tabulate analytic bounds")
    bnd.add_argument("--alpha-grid", type=_floats, required=True)
    bnd.add_argument("--eps", type=float, default=0.0)
    bnd.set_defaults(func=cmd_bounds)

    ver = sub.add_parser("verify", help="run brute-force verification suites")
    ver.add_argument("--suite", action="append", choices=sorted(verify.SUITES), required=True)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
