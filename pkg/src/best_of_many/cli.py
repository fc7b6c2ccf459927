"""Command-line entry point: ``best-of-many <command> [options]``."""

import argparse
import json
import logging
import sys
from typing import Any, Dict, Optional, Sequence

from . import __version__
from .commands import (
    cmd_compare,
    cmd_eval,
    cmd_gen_data,
    cmd_gradcheck,
    cmd_sample,
    cmd_train,
)
from .constants import Profile
from .error_handling import handle_error
from .validation import load_run_config

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument(
        "--seed", type=int, help="Master seed (overrides BMS_SEED and the config)"
    )
    parser.add_argument("--out", default="out", help="Output directory (default: out)")
    parser.add_argument(
        "--profile", choices=[p.value for p in Profile], help="Layer size profile"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="best-of-many",
        description="Train and evaluate multi-sample conditional generative models.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity (default: INFO)",
    )
    parser.add_argument("--quiet", action="store_true", help="Disable progress bars")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="Generate a synthetic dataset")
    _add_common(gen)

    train = commands.add_parser("train", help="Train one configuration")
    _add_common(train)

    evaluate = commands.add_parser("eval", help="Evaluate a checkpoint")
    _add_common(evaluate)
    evaluate.add_argument("--checkpoint", required=True, help="BMS1 checkpoint file")
    evaluate.add_argument(
        "--data", help="Dataset file (default: the run's held-out split)"
    )

    sample = commands.add_parser("sample", help="Plot and dump samples for one example")
    _add_common(sample)
    sample.add_argument("--checkpoint", required=True, help="BMS1 checkpoint file")
    sample.add_argument(
        "--data", help="Dataset file (default: the run's held-out split)"
    )
    sample.add_argument("--index", type=int, default=0, help="Example index")
    sample.add_argument(
        "--samples", type=int, help="Samples T (default 100; 50 for images)"
    )
    sample.add_argument("--clusters", type=int, default=4, help="k-means clusters")

    compare = commands.add_parser(
        "compare", help="Train and compare several objectives"
    )
    compare.add_argument(
        "--config", action="append", required=True, help="Run configuration (repeat)"
    )
    compare.add_argument("--seed", type=int)
    compare.add_argument("--out", default="out")
    compare.add_argument("--profile", choices=[p.value for p in Profile])

    gradcheck = commands.add_parser(
        "gradcheck", help="Finite-difference gradient checks"
    )
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.add_argument("--out", help="Write the report table here")
    gradcheck.add_argument(
        "--profile", default=Profile.DESK.value, choices=[p.value for p in Profile]
    )
    gradcheck.add_argument(
        "--instances", type=int, default=100, help="Random instances per op"
    )
    return parser


def _run(args: argparse.Namespace) -> Dict[str, Any]:
    progress = not args.quiet
    if args.command == "gen-data":
        config = load_run_config(args.config, args.seed, args.profile)
        return cmd_gen_data(config, args.out)
    if args.command == "train":
        config = load_run_config(args.config, args.seed, args.profile)
        return cmd_train(config, args.out, progress=progress)
    if args.command == "eval":
        eval_cfg = load_run_config(args.config).eval if args.config else None
        return cmd_eval(args.checkpoint, args.out, args.data, eval_cfg, args.seed)
    if args.command == "sample":
        return cmd_sample(
            args.checkpoint,
            args.out,
            index=args.index,
            t=args.samples,
            k=args.clusters,
            data_path=args.data,
            seed=args.seed,
        )
    if args.command == "compare":
        configs = [
            load_run_config(path, args.seed, args.profile) for path in args.config
        ]
        return cmd_compare(configs, args.out, progress=progress)
    return cmd_gradcheck(
        args.out, args.profile, seed=args.seed, instances=args.instances
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command and return its exit code.

    The command summary is printed to stdout as JSON; failures are printed to
    stderr and mapped to the error's exit code.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        summary = _run(args)
    except Exception as e:
        response = handle_error(e, args.command)
        print(json.dumps(response, sort_keys=True, default=str), file=sys.stderr)
        return int(response["exit_code"])
    print(json.dumps(summary, sort_keys=True, default=str))
    if args.command == "gradcheck" and not summary["passed"]:
        return 1
    return 0
