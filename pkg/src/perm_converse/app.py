"""Command-line front end: grids, beta values, bound sweeps, simulations and self-checks."""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from perm_converse import __version__
from perm_converse.config import ConfigError, SweepConfig, load_config
from perm_converse.services import (
    BoundKind,
    Decoder,
    bound_curves,
    bsc_log_beta,
    covering_tau,
    lambda_k,
    np_threshold,
    run_oracles,
    simulate,
    trimmed_mixture,
    two_message_codebook,
    write_curves_csv,
    write_grid_csv,
    write_sim_json,
)
from perm_converse.services.oracles import ORACLES
from perm_converse.utils import DomainError, NumericDomainError, PermConverseError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

SWEEP_KINDS = {
    "converse": (BoundKind.EXACT, BoundKind.THIRD_ORDER),
    "approx": (BoundKind.NORMAL_APPROX, BoundKind.THIRD_ORDER),
    "compare": (BoundKind.EXACT, BoundKind.THIRD_ORDER, BoundKind.MAKUR_PRIOR),
}


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _err(message: str) -> None:
    print(f"perm-converse: error: {message}", file=sys.stderr)


# ── Parser ───────────────────────────────────────────────────────────────────


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=0.11, help="BSC crossover probability (default: 0.11)")
    p.add_argument("--eps", type=float, default=1e-3, help="Target error probability (default: 1e-3)")
    p.add_argument("--n-min", type=int, default=1000, help="Smallest blocklength (default: 1000)")
    p.add_argument("--n-max", type=int, default=10_000_000, help="Largest blocklength (default: 10000000)")
    p.add_argument("--points", type=int, default=40, help="Number of log-spaced blocklengths (default: 40)")
    p.add_argument("--tau", type=float, default=None, help="Grid constant tau (default: 2/delta)")
    p.add_argument("--g1", type=float, default=1.0 / 16.0, help="Third-order coefficient (default: 1/16)")
    p.add_argument("--workers", type=int, default=None, help="Threads for the sweep (default: executor default)")
    p.add_argument("--out", default=None, help="Output CSV path (required)")


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    """The top-level parser and its subcommand parsers by name."""
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, metavar="PATH",
                        help="JSON file of flag defaults; explicit flags win")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="More log output on stderr (-v info, -vv debug)")

    parser = _Parser(
        prog="perm-converse",
        description="Finite-blocklength converse bounds for the BSC permutation channel",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        epilog="""
Examples:
  perm-converse grid --k 3 --r0 0.01 --out grid.csv
  perm-converse beta --n 1000 --delta 0.11 --alpha 0.999
  perm-converse converse --delta 0.11 --eps 1e-3 --n-min 1000 --n-max 1000000 --points 40 --out c.csv
  perm-converse compare --delta 0.11 --eps 1e-3 --out cmp.csv
  perm-converse simulate --n 1000 --delta 0.11 --trials 100000 --seed 1 --out sim.json
  perm-converse verify --oracle np --n-max 12
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    commands = {}

    p = commands["grid"] = sub.add_parser("grid", parents=[common], help="Write divergence-covering centers as CSV")
    p.add_argument("--k", type=int, default=2, help="Alphabet size (default: 2)")
    p.add_argument("--r0", type=float, default=None, help="Ladder step r0")
    p.add_argument("--n", type=int, default=None, help="Blocklength; r0 = 1/(tau n) when --r0 is absent")
    p.add_argument("--delta", type=float, default=None, help="Crossover probability used for tau = 2/delta")
    p.add_argument("--tau", type=float, default=None, help="Grid constant (default: 2/delta)")
    p.add_argument("--out", default=None, help="Output CSV path (required)")

    p = commands["beta"] = sub.add_parser("beta", parents=[common],
                                          help="Print the exact beta for one (n, delta, alpha)")
    p.add_argument("--n", type=int, default=None, help="Blocklength (required)")
    p.add_argument("--delta", type=float, default=None, help="Crossover probability (required)")
    p.add_argument("--alpha", type=float, default=None, help="Level 1 - eps of the test (required)")
    p.add_argument("--tau", type=float, default=None, help="Grid constant (default: 2/delta)")

    for name, kinds in SWEEP_KINDS.items():
        p = commands[name] = sub.add_parser(name, parents=[common],
                                            help=f"Sweep n and write CSV ({', '.join(k.value for k in kinds)})")
        _add_sweep_flags(p)

    p = commands["simulate"] = sub.add_parser("simulate", parents=[common],
                                              help="Monte-Carlo error rate of the two-message code")
    p.add_argument("--n", type=int, default=1000, help="Blocklength (default: 1000)")
    p.add_argument("--delta", type=float, default=0.11, help="Crossover probability (default: 0.11)")
    p.add_argument("--trials", type=int, default=100_000, help="Number of trials (default: 100000)")
    p.add_argument("--seed", type=int, default=0, help="Run seed (default: 0)")
    p.add_argument("--decoder", choices=[d.value for d in Decoder], default=Decoder.WEIGHT_THRESHOLD.value,
                   help="Decoder (default: weight_threshold)")
    p.add_argument("--workers", type=int, default=1, help="Worker threads (default: 1)")
    p.add_argument("--out", default=None, help="Output JSON path (required)")

    p = commands["verify"] = sub.add_parser("verify", parents=[common], help="Run the built-in oracle checks")
    p.add_argument("--oracle", choices=list(ORACLES) + ["all"], default="all", help="Which suite (default: all)")
    p.add_argument("--n-max", type=int, default=12, help="Largest n for the np oracle (default: 12)")

    return parser, commands


def _apply_config(commands: Dict[str, argparse.ArgumentParser], config: dict) -> None:
    """Config values become defaults on every subcommand that has the flag."""
    known = set()
    for sp in commands.values():
        dests = set(vars(sp.parse_args([])))
        matched = {k: v for k, v in config.items() if k in dests}
        sp.set_defaults(**matched)
        known.update(matched)
    for key in sorted(set(config) - known):
        logger.warning("ignoring unknown config key %r", key)


def _setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="perm-converse: %(levelname)s %(name)s: %(message)s")
    logging.getLogger("perm_converse").setLevel(level)


def _require(args, *dests: str) -> None:
    missing = ["--" + d.replace("_", "-") for d in dests if getattr(args, d) is None]
    if missing:
        raise DomainError(f"missing required option(s): {', '.join(missing)}")


def _require_out(args) -> str:
    if not args.out:
        raise DomainError("--out is required")
    return args.out


# ── Commands ─────────────────────────────────────────────────────────────────


def cmd_grid(args) -> int:
    out = _require_out(args)
    r0 = args.r0
    if r0 is None:
        if args.n is None or args.delta is None:
            raise DomainError("give --r0, or --n and --delta")
        tau = args.tau if args.tau is not None else covering_tau(args.delta)
        r0 = 1.0 / (tau * args.n)
    grid = lambda_k(args.k, r0)
    write_grid_csv(grid, out)
    logger.info("wrote %d centers to %s", len(grid), out)
    return EXIT_OK


def cmd_beta(args) -> int:
    _require(args, "n", "delta", "alpha")
    mix = trimmed_mixture(args.n, args.delta, args.tau)
    thr = np_threshold(args.n, args.delta, args.alpha)
    log_beta = bsc_log_beta(args.n, args.delta, args.alpha, mix)
    print(json.dumps({
        "n": args.n,
        "delta": thr.delta,
        "alpha": args.alpha,
        "T": thr.T,
        "lambda": thr.lam,
        "mixture_size": len(mix),
        "log2_beta": log_beta,
    }))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = SweepConfig.from_args(args)
    out = _require_out(args)
    curves = bound_curves(SWEEP_KINDS[args.command], cfg.n_values(), cfg.eps, cfg.delta,
                          tau=cfg.tau_override, g1=cfg.g1, workers=cfg.workers)
    write_curves_csv(curves, out)
    logger.info("wrote %d curves to %s", len(curves), out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = _require_out(args)
    codebook = two_message_codebook(args.n, args.decoder)
    result = simulate(codebook, args.delta, args.n, args.trials, args.seed, workers=args.workers)
    write_sim_json(result, out)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = ORACLES if args.oracle == "all" else (args.oracle,)
    checks = run_oracles(names, n_max=args.n_max)
    failed = [c for c in checks if not c.passed]
    for check in failed:
        print(f"FAIL {check.name}: {check.detail}")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERIC


COMMANDS = {
    "grid": cmd_grid,
    "beta": cmd_beta,
    "converse": cmd_sweep,
    "approx": cmd_sweep,
    "compare": cmd_sweep,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv: List[str] = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        pre, _ = build_parser()[0].parse_known_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _setup_logging(getattr(pre, "verbose", 0))

    if getattr(pre, "config", None):
        try:
            _apply_config(commands, load_config(pre.config))
        except ConfigError as e:
            _err(str(e))
            return EXIT_USAGE

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return COMMANDS[args.command](args)
    except NumericDomainError as e:
        _err(str(e))
        return EXIT_NUMERIC
    except (PermConverseError, OSError) as e:
        _err(str(e))
        return EXIT_USAGE


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
