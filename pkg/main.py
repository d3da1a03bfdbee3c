import argparse
import logging
import sys
from typing import List, Optional

from cli import (
    cmd_evaluate,
    cmd_generate,
    cmd_gradcheck,
    cmd_sanitize,
    cmd_sweep,
    cmd_synthesize,
    cmd_train,
    parse_sizes,
    parse_thresholds,
)
from errors import Csi2VideoError
from metrics import DEFAULT_THRESHOLDS
from network import HIDDEN_SIZES
from synthetic import KINDS

logger = logging.getLogger("MainPipeline")

HANDLER_NAME = "csi2video"
USAGE_EXIT = 1
IO_EXIT = 3


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def configure_logging(verbose: bool = False) -> None:
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    if any(h.get_name() == HANDLER_NAME for h in root.handlers):
        return
    handler = logging.StreamHandler()
    handler.set_name(HANDLER_NAME)
    handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    root.addHandler(handler)


def build_parser() -> CliParser:
    parser = CliParser(prog="csi2video", description="Synthesise video from Wi-Fi CSI amplitudes.")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("generate", help="write a synthetic paired dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--kind", choices=sorted(KINDS), default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_generate)

    p = commands.add_parser("sanitize", help="CSIB file to sanitised amplitude CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=51)
    p.add_argument("--nsigma", type=float, default=3.0)
    p.set_defaults(handler=cmd_sanitize)

    p = commands.add_parser("train", help="train teacher and student, resuming when possible")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(handler=cmd_train)

    p = commands.add_parser("synthesize", help="frames from CSI alone")
    p.add_argument("--model", required=True)
    p.add_argument("--csi", required=True, help="a .csib file or a dataset directory")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_synthesize)

    p = commands.add_parser("evaluate", help="score predicted frames against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--thresholds", type=parse_thresholds, default=list(DEFAULT_THRESHOLDS))
    p.add_argument("--report", default=None, help="also write the report as JSON")
    p.set_defaults(handler=cmd_evaluate)

    p = commands.add_parser("gradcheck", help="finite-difference check of every primitive and loss")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(handler=cmd_gradcheck)

    p = commands.add_parser("sweep", help="train and evaluate one model per hidden size")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--sizes", type=parse_sizes, default=list(HIDDEN_SIZES))
    p.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except Csi2VideoError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} failed on I/O: {e}")
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())
