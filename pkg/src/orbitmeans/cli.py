"""Command line entry point: ``orbitmeans <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import simlab
from .consensus import FrechetSpec, mean_partition_l2, mean_partition_search
from .criteria import Criterion, all_criteria, criterion
from .errors import PartitionError
from .io import dump_bundle, load_partition, load_partitions
from .metrics import delta_p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def cmd_dist(args) -> int:
    X, Y = load_partition(args.x), load_partition(args.y)
    print(f"{delta_p(X, Y, args.p):#.12g}")
    return 0


def cmd_compare(args) -> int:
    X, Y = load_partition(args.x), load_partition(args.y)
    if args.all:
        _emit(_json(all_criteria(X, Y, args.paper_normalizer)), None)
    elif args.criterion:
        print(f"{criterion(X, Y, args.criterion, args.paper_normalizer):#.12g}")
    else:
        raise SystemExit("compare: give --criterion KIND or --all")
    return 0


def cmd_consensus(args) -> int:
    members = [X for f in args.files for X in load_partitions(f)]
    spec = FrechetSpec.parse(args.rho, args.paper_normalizer)
    if spec.is_l2sq:
        res = mean_partition_l2(members, restarts=args.restarts, seed=args.seed,
                                max_iter=args.max_iter, harden=args.harden)
    else:
        res = mean_partition_search(members, spec, restarts=args.restarts, seed=args.seed)
    _emit(_json(res.to_dict()), args.out)
    return 0


def _dist_from_args(args) -> simlab.DistributionSpec:
    if args.base:
        base = load_partition(args.base)
    else:
        base = simlab.balanced_base(args.m, args.l)
    return simlab.DistributionSpec(
        model=args.model, base=base, epsilon=args.eps,
        concentration=tuple(args.concentration), seed=args.seed,
    )


def cmd_sample(args) -> int:
    parts = simlab.sample(_dist_from_args(args), args.n)
    _emit(dump_bundle(parts), args.out)
    return 0


def cmd_exp(args) -> int:
    dist = _dist_from_args(args)
    rho = FrechetSpec.parse(args.rho, args.paper_normalizer)
    if args.kind == "consistency":
        grid = [int(v) for v in args.n.split(",")]
        report = simlab.run_consistency_experiment(
            dist, rho, grid, R=args.reps, N_ref=args.nref,
            restarts=args.restarts, workers=args.workers)
    else:
        report = simlab.run_clt_experiment(
            dist, rho, int(args.n), R=args.reps, N_ref=args.nref,
            restarts=args.restarts, workers=args.workers)
    _emit(report.to_json(), args.out)
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    elif args.out:
        Path(args.out).with_suffix(".csv").write_text(report.to_csv())
    return 0


def _add_dist_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=simlab.MODELS, default="label_noise")
    p.add_argument("--eps", type=float, default=0.2, help="label flip probability")
    p.add_argument("--concentration", type=float, nargs=2, default=(10.0, 0.5),
                   metavar=("KAPPA", "ALPHA0"))
    p.add_argument("--base", help="partition file for the base partition")
    p.add_argument("--m", type=int, default=20, help="points in the default base")
    p.add_argument("--l", type=int, default=3, help="clusters in the default base")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbitmeans", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="l_p distance between two partitions")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("compare", help="cluster-comparison criteria")
    p.add_argument("--criterion", choices=[c.value for c in Criterion])
    p.add_argument("--all", action="store_true")
    p.add_argument("--paper-normalizer", action="store_true",
                   help="divide masses by m(m-1)/2 in the information measures")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("consensus", help="mean partition of a sample")
    p.add_argument("--rho", default="l2sq", help="l2sq, l2, l1 or a criterion name")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--harden", action="store_true")
    p.add_argument("--paper-normalizer", action="store_true")
    p.add_argument("--out")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("sample", help="draw a bundle of partitions")
    _add_dist_args(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("exp", help="Monte-Carlo experiments")
    p.add_argument("kind", choices=["consistency", "clt"])
    _add_dist_args(p)
    p.add_argument("--rho", default="l2sq")
    p.add_argument("--paper-normalizer", action="store_true")
    p.add_argument("--n", default=None, help="comma-separated grid (consistency) or one size")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--nref", type=int, default=10000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="raw per-replication values (default: next to --out)")
    p.set_defaults(func=cmd_exp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "exp":
        if args.n is None:
            args.n = "10,100,1000" if args.kind == "consistency" else "200"
        if args.reps is None:
            args.reps = 50 if args.kind == "consistency" else 500
    try:
        return args.func(args)
    except (PartitionError, OSError) as exc:
        print(f"orbitmeans: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
