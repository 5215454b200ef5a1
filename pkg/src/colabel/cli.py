"""Command-line interface: `colabel run` and `colabel sweep`.

Exit codes: 0 success, 2 malformed config, 3 dataset load failure,
4 unwritable output, 1 anything else.
"""

import argparse
import sys

from . import __version__, kernels
from .config import ConfigError
from .harness import DatasetError, OutputError, run_experiment, sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DATASET = 3
EXIT_OUTPUT = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="colabel",
        description="Noisy-label training experiments: dual-network entropy-threshold "
        "label correction and seven baselines.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"colabel {__version__} ({kernels.BACKEND} kernels)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment config")
    run_p.add_argument("--config", required=True, help="path to the YAML config")
    run_p.add_argument("--out", default=None, help="override the output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")

    sweep_p = sub.add_parser("sweep", help="run every config in a directory")
    sweep_p.add_argument("--dir", required=True, help="directory of YAML configs")
    sweep_p.add_argument("--out", required=True, help="directory for all run outputs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            out = run_experiment(args.config, out_dir=args.out, seed=args.seed)
            print(f"results written to {out}")
        else:
            table = sweep(args.dir, args.out)
            print(f"comparison written to {table}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
