"""
SCM inference engine
Association, intervention and individual causal queries from the command line
"""
import logging
import sys
from typing import List, Optional

import structlog
from dotenv import load_dotenv

# Load environment variables FIRST
load_dotenv()

import config
from cli.arguments import build_parser
from cli.commands import USAGE_ERROR, UsageError, run_command

logger = structlog.get_logger(__name__)

_LEVELS = {0: None, 1: logging.INFO}


def configure_logging(verbosity: int = 0):
    """Structured logs to stderr; stdout carries only results"""
    level = _LEVELS.get(verbosity, logging.DEBUG) or getattr(logging, config.LOG_LEVEL)
    logging.basicConfig(
        level=level,
        format="%(asctime)s.%(msecs)03d %(levelname)s:%(name)s:%(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
        force=True,
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.KeyValueRenderer(key_order=["event"], sort_keys=True),
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


def run(argv: Optional[List[str]] = None, stdout=None) -> int:
    """
    Parse ``argv`` and run one subcommand.

    Returns:
        0 on success, 1 on a validation or query error, 2 on a usage error
    """
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse already printed usage to stderr
        return e.code if isinstance(e.code, int) else USAGE_ERROR

    try:
        config.check()
    except ValueError as e:
        return _usage_error(parser, e)

    configure_logging(args.verbose)
    try:
        return run_command(args, stdout)
    except UsageError as e:
        return _usage_error(parser, e)


def _usage_error(parser, error: Exception) -> int:
    parser.print_usage(sys.stderr)
    sys.stderr.write(f"{parser.prog}: error: {error}\n")
    return USAGE_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
