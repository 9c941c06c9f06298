"""Command-line entry point: ``simboot {band,coverage,correction,bias}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import dump_config, parse_config
from .csvio import write_csv
from .errors import ConfigError, NumericalFailure, SimbootError
from .experiments import COMMANDS

log = logging.getLogger("simboot")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simboot",
        description="Simultaneous multiplier-bootstrap confidence sets for many local models.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", metavar="PATH", help="key = value configuration file")
    parser.add_argument("--preset", choices=["paper", "desk"])
    parser.add_argument("--family", choices=["lc", "lq", "qt"])
    parser.add_argument("--h", type=float, help="kernel bandwidth")
    parser.add_argument("--n", type=int, help="sample size")
    parser.add_argument("--k", type=int, help="number of local models")
    parser.add_argument("--b", type=int, help="bootstrap replicates")
    parser.add_argument("--m", type=int, help="Monte-Carlo datasets")
    parser.add_argument("--reps", type=int, help="repetitions for the correction experiment")
    parser.add_argument("--alpha", type=float, action="append", dest="alphas",
                        help="significance level; repeat for several")
    parser.add_argument("--band-alpha", type=float, dest="band_alpha")
    parser.add_argument("--scheme", choices=["gauss", "exp", "bern"])
    parser.add_argument("--dgp", choices=["bump", "flat", "table"])
    parser.add_argument("--noise-sd", type=float, dest="noise_sd")
    parser.add_argument("--data", metavar="PATH", help="two-column x,y file (band only)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--out", metavar="DIR")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    cfg = parse_config(args.config, overrides)
    log.info("running %s with family=%s n=%d K=%d B=%d M=%d", args.command, cfg.family, cfg.n, cfg.k, cfg.b, cfg.m)
    header, rows = COMMANDS[args.command](cfg)
    out = Path(cfg.out)
    path = write_csv(out / f"{args.command}.csv", header, rows)
    (out / f"{args.command}.config").write_text(dump_config(cfg))
    log.info("wrote %s", path)
    return path


def main(argv=None):
    try:
        run(argv)
    except ConfigError as exc:
        print(f"simboot: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"simboot: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SimbootError as exc:
        print(f"simboot: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
