import argparse
import logging

LOG_FORMAT = "[%(levelname)s] %(message)s"


def argparse_add_logging_args(parser: argparse.ArgumentParser):
    parser.set_defaults(loglevel=logging.INFO)
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--debug",
        action="store_const",
        const=logging.DEBUG,
        dest="loglevel",
        help="Log interventions, collisions and file I/O",
    )
    group.add_argument(
        "--quiet",
        action="store_const",
        const=logging.WARNING,
        dest="loglevel",
        help="Only log warnings and errors",
    )


def argparse_parse_logging(args: argparse.Namespace):
    # main() may run several times in one process.
    logging.basicConfig(level=args.loglevel, format=LOG_FORMAT, force=True)
