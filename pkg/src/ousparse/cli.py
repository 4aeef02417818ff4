"""Command-line entry point: ``ousparse run`` and ``ousparse replay``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, OusparseError, ReplayError
from .experiment import replay, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ousparse", description="Sparse drift estimation experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config")
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--seed-offset", type=int, default=0)
    run.add_argument("--no-plots", action="store_true")

    rep = sub.add_parser("replay", help="re-execute one recorded cell")
    rep.add_argument("run_dir")
    rep.add_argument("--seed", type=int, required=True)
    rep.add_argument("--estimator", required=True)
    rep.add_argument("--sweep-value", type=json.loads, default=None, help="JSON literal, e.g. 20 or 0.5")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            result = run_scenario(args.config, args.out, workers=args.workers,
                                  seed_offset=args.seed_offset, plots=not args.no_plots)
            failed = sum(r["status"] != "ok" for r in result.records)
            print(f"wrote {len(result.records)} records ({failed} failed) to {result.out_dir}")
        else:
            est, row = replay(args.run_dir, args.seed, args.estimator, args.sweep_value)
            print(f"replayed seed={row['seed']} estimator={row['estimator']} "
                  f"sweep_value={row['sweep_value'] or '-'}: l1={row['l1']} l2={row['l2']} match")
    except ReplayError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OusparseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
