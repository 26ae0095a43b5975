"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 a tolerance violated under --check.
"""

from __future__ import annotations

import argparse
import sys
import time

from .. import __version__
from .config import EXPERIMENTS, ConfigError, load_config
from .experiments import RUNNERS, run_commutant_dump
from .io import write_table

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anticoncentration", description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON config; flags override its values")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nt", type=int, help="number of doped sites (default floor(log2(N)/2))")
    p.add_argument("--tstate", help="qutrit-t or a JSON file of amplitudes")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--workers", type=int)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--bond-cap", dest="bond_cap", type=int)
    p.add_argument("--check", action="store_true", help="exit 3 if a reference tolerance is violated")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "check")}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if cfg.experiment == "commutant-dump":
        text = run_commutant_dump(cfg)
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    started = time.time()
    try:
        result = RUNNERS[cfg.experiment](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sidecar = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "started": started,
        "wall_clock_s": result.elapsed,
    }
    text = write_table(cfg.out, result.header, result.rows, cfg.format, sidecar, {"comparisons": result.records})
    if cfg.out is None:
        sys.stdout.write(text)
    for rec in result.records:
        status = "" if "passed" not in rec else (" ok" if rec["passed"] else " FAIL")
        tol = f" (tol {rec['tolerance']})" if "tolerance" in rec else ""
        print(f"# {rec['name']}: {rec['reference']} {rec['params']} -> {rec['value']}{tol}{status}", file=sys.stderr)
    if args.check and not result.passed:
        return EXIT_CHECK
    return EXIT_OK
