"""Command-line front end: run a mesh sweep, write CSV, optionally verify.

Exit codes: 0 success, 1 verification failure, 2 bad arguments or config,
3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .coarse import SCHEMES
from .sweep import (
    SADDLE_METHODS,
    SweepConfig,
    core_range,
    emit_csv,
    load_config_file,
    run_sweep,
    write_rows,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_IO = 3

logger = logging.getLogger("cgtst")


def build_parser():
    p = argparse.ArgumentParser(
        prog="cgtst",
        description="Coarse-grained harmonic TST error sweep for a strained 1-D chain.",
    )
    p.add_argument("--atoms", type=int, help="total atoms including fixed ends (default 202)")
    p.add_argument("--strain", type=float, action="append", help="strain s, repeatable (default 1.02 and 1.035)")
    p.add_argument("--scheme", action="append", choices=sorted(SCHEMES), help="repatom scheme, repeatable")
    p.add_argument("--core-min", type=int, help="smallest core size (default 2)")
    p.add_argument("--core-max", type=int, help="largest core size (default: all free atoms)")
    p.add_argument("--core-step", type=int, help="core size increment (default 2)")
    p.add_argument("--beta", type=float, help="inverse temperature (default 1.0)")
    p.add_argument("--saddle", choices=SADDLE_METHODS, help="saddle search method (default both)")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--verify", action="store_true", default=None, help="run the invariant suite")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _settings(args):
    """Merge the config file with flags (flags win)."""
    kw = load_config_file(args.config) if args.config else {}
    flags = {
        "n_atoms": args.atoms,
        "strains": args.strain,
        "schemes": args.scheme,
        "core_min": args.core_min,
        "core_max": args.core_max,
        "core_step": args.core_step,
        "beta": args.beta,
        "saddle_method": args.saddle,
        "output_path": args.out,
        "verify": args.verify,
    }
    kw.update({k: v for k, v in flags.items() if v is not None})
    n_atoms = kw.pop("n_atoms", 202)
    cores = core_range(
        n_atoms, kw.pop("core_min", 2), kw.pop("core_max", None), kw.pop("core_step", 2)
    )
    if not cores:
        raise ValueError("core size range is empty")
    return SweepConfig(n_atoms=n_atoms, core_sizes=cores, **kw)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = _settings(args)
    except OSError as exc:
        print(f"cgtst: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TypeError, ValueError) as exc:
        print(f"cgtst: {exc}", file=sys.stderr)
        return EXIT_USAGE

    rows = run_sweep(config)
    n_ok = sum(r.ok for r in rows)
    for r in rows:
        if not r.ok:
            logger.warning("%s s=%g N=%d: %s", r.scheme, r.strain, r.core_size, r.error)
    print(f"cgtst: {n_ok} of {len(rows)} rows succeeded", file=sys.stderr)

    try:
        if config.output_path:
            emit_csv(rows, config.output_path)
        else:
            write_rows(rows, sys.stdout)
    except OSError as exc:
        print(f"cgtst: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    if config.verify:
        from .verify import verify_suite

        report = verify_suite(config)
        print(report.format(), file=sys.stderr)
        return EXIT_OK if report.passed else EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
