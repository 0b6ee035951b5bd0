"""Command line driver: ``parex --problem builtin --L 2 --M 32,64,128``."""
import argparse
import configparser
import logging
import sys

from . import harness
from .errors import ParexError
from .problems import builtin_test_problem, load_problem_file, manufactured_problem


def _problem(value):
    if value == "builtin":
        return builtin_test_problem()
    if value == "manufactured":
        return manufactured_problem()
    if value.startswith("file="):
        return load_problem_file(value[len("file="):])
    raise ValueError(f"unknown problem {value!r}")


def _m_list(text):
    try:
        ms = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad M list {text!r}")
    if not ms or min(ms) < 1:
        raise argparse.ArgumentTypeError("M values must be positive integers")
    return ms


def _n_value(text):
    if text == "auto":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"N must be an integer or 'auto', got {text!r}")
    if n < 2:
        raise argparse.ArgumentTypeError("N must be >= 2")
    return n


def build_parser():
    p = argparse.ArgumentParser(
        prog="parex",
        description="Convergence and efficiency tables for extrapolated backward Euler + P1 FEM.",
    )
    p.add_argument("--config", help="key=value file with defaults for any flag")
    p.add_argument("--problem", default="builtin", help="builtin | manufactured | file=<path>")
    p.add_argument("--L", type=int, default=2, help="number of extrapolation steps (>= 2)")
    p.add_argument("--M", type=_m_list, default=[32, 64, 128], help="comma separated doubling list")
    p.add_argument("--N", type=_n_value, default=None, help="space elements, or 'auto'")
    p.add_argument("--couple", choices=["h=tau", "fixed"], default="h=tau")
    p.add_argument("--estimator", choices=["default", "zero"], default="default")
    p.add_argument("--nodes", choices=["equispaced", "chebyshev"], default="equispaced",
                   help="interior interpolation nodes of the source in time")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "md"], default="csv")
    p.add_argument("--oracle-factor", type=int, default=16)
    p.add_argument("--seed", type=int, default=None, help="reserved, unused")
    p.add_argument("--verbose", action="store_true")
    return p


def _config_defaults(path):
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_string("[run]\n" + fh.read())
    return {k.replace("-", "_"): v for k, v in parser["run"].items()}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # Re-parse with file values as defaults so explicit flags still win.
        try:
            defaults = _config_defaults(args.config)
        except (OSError, configparser.Error) as exc:
            parser.error(f"cannot read config: {exc}")
        converters = {"L": int, "M": _m_list, "N": _n_value, "oracle_factor": int,
                      "seed": int, "verbose": lambda v: v.lower() in ("1", "true", "yes")}
        # Config keys are case-insensitive; flags such as --L keep their case.
        known = {a.dest.lower(): a.dest for a in parser._actions
                 if a.dest not in ("help", "config")}
        converted = {}
        for key, value in defaults.items():
            if key.lower() not in known:
                parser.error(f"unknown config key {key!r}")
            key = known[key.lower()]
            try:
                converted[key] = converters.get(key, str)(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                parser.error(f"bad config value for {key}: {exc}")
        parser.set_defaults(**converted)
        args = parser.parse_args(argv)
    if args.L < 2:
        parser.error("L must be >= 2")
    if args.oracle_factor < 2:
        parser.error("--oracle-factor must be >= 2")
    if args.couple == "fixed" and args.N is None:
        parser.error("--couple fixed requires --N")
    ms = args.M
    if any(b != 2 * a for a, b in zip(ms, ms[1:])):
        parser.error("--M must be a doubling sequence")
    return parser, args


def main(argv=None):
    parser, args = parse_args(sys.argv[1:] if argv is None else argv)
    # Flagged rows are reported below, so library warnings only show with --verbose.
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        problem = _problem(args.problem)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    try:
        rows = harness.run_table(
            problem, args.L, args.M, couple=args.couple, n_space=args.N,
            estimator=args.estimator, oracle_factor=args.oracle_factor, nodes=args.nodes,
        )
    except (ParexError, ArithmeticError, ValueError) as exc:
        print(f"parex: error: {exc}", file=sys.stderr)
        return 1
    text = harness.format_csv(rows) if args.format == "csv" else harness.format_markdown(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    flagged = [r for r in rows if r.flagged]
    for r in flagged:
        print(f"parex: M={r.M}: {r.message}", file=sys.stderr)
    return 1 if flagged else 0


if __name__ == "__main__":
    sys.exit(main())
