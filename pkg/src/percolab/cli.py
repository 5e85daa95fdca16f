"""The `percolab` experiment runner.

Two entry styles share one code path: `percolab run <config-file>` parses a
`key = value` config, while every experiment is also a subcommand taking the
same keys as flags (`percolab tail --model tree:k=3 --p 0.5 --seed 7 ...`).
A seed is always required.  Exit codes: 0 ok, 2 config error, 3 estimator
budget/window error, 4 oracle-comparison failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, config_from_pairs, load_config
from .runner import run

_FLAG_KEYS = (
    "model", "seed", "out", "workers", "replicates", "p", "epsilon", "side",
    "p_c", "statistic", "thresholds", "budget_edges", "budget_radius",
    "k_max", "oracle", "r", "r_grid", "alpha", "s_grid", "t_grid", "n_trunc",
    "genfn_k", "tuples_per_sample", "edges", "trials", "radii", "p_grid",
    "max_threshold_volume", "max_threshold_radius",
)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="percolab",
        description="Percolation Monte Carlo laboratory with exact oracles")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run an experiment from a config file")
    runp.add_argument("config", help="path to key = value config file")
    for name in EXPERIMENTS:
        ep = sub.add_parser(name, help=f"run the {name} experiment from flags")
        for key in _FLAG_KEYS:
            ep.add_argument(f"--{key.replace('_', '-')}", dest=key,
                            default=None, metavar="V")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
        else:
            pairs = [("experiment", args.command, 0)]
            for key in _FLAG_KEYS:
                value = getattr(args, key)
                if value is not None:
                    pairs.append((key, value, 0))
            cfg = config_from_pairs(pairs, origin="<flags>")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        code, manifest_path = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(manifest_path)
    return code


if __name__ == "__main__":
    sys.exit(main())
