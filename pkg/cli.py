import argparse
import logging
import sys

from backend.errors import CatSimError
from cli_components import check, simulate, sweep, wigner_tool

logger = logging.getLogger("catsim")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catsim",
        description="Cat-state generation in driven qubit/qutrit-resonator systems.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="errors only")
    verbs = parser.add_subparsers(dest="verb", required=True)

    p = verbs.add_parser("simulate", help="run one scenario and export its artifacts")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true", help="run despite fail-level validity verdicts")

    p = verbs.add_parser("sweep", help="fidelity over a two-rate decoherence grid")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p.add_argument("--force", action="store_true")

    p = verbs.add_parser("wigner", help="Wigner grid of a saved state dump")
    p.add_argument("--state", required=True, help=".npy state dump")
    p.add_argument("--grid", type=int, default=161, help="points per axis")
    p.add_argument("--out", required=True, help="output file (.txt or .pgm)")
    p.add_argument("--atom-levels", type=int, default=1, choices=(1, 2, 3))
    p.add_argument("--extent", type=float, default=None, help="grid half-width in |alpha|")

    p = verbs.add_parser("check", help="print the validity report of a scenario")
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    """Parses the command line and dispatches to the matching component."""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    # --- Router to run the requested verb ---
    try:
        if args.verb == "simulate":
            artifacts = simulate.run_scenario(args.config, force=args.force)
            simulate.export(artifacts, args.out)
            print(artifacts.log['narrative'])
        elif args.verb == "sweep":
            config = sweep.load_scenario(args.config)
            matrix, _ = sweep.run_sweep(config, jobs=args.jobs, force=args.force)
            sweep.export_sweep(matrix, config, args.out)
            print(matrix.to_string())
        elif args.verb == "wigner":
            grid, path = wigner_tool.render(args.state, points=args.grid, out_path=args.out,
                                            atom_levels=args.atom_levels, extent=args.extent)
            print(f"W(0) = {grid.value_at_origin():.6f} -> {path}")
        elif args.verb == "check":
            config = check.load_scenario(args.config)
            report, lines = check.render(config)
            for line in lines:
                print(line)
            if report.failures() and config.variant not in simulate.EXACT_VARIANTS:
                return 3
        else:
            logger.error("Unknown verb '%s'", args.verb)
            return 2
    except CatSimError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
