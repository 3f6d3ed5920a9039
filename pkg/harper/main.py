import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from harper.commands import (
    absorb_commands,
    bound_commands,
    bulk_commands,
    oscillator_commands,
    selftest_commands,
    spectrum_commands,
    walk_commands,
)
from harper.config import settings
from harper.exceptions import EXIT_OK, EXIT_VALIDATION, HarperError
from harper.models import RunConfig

logger = logging.getLogger(__name__)

COMMANDS = {
    "spectrum": spectrum_commands,
    "bound": bound_commands,
    "oscillator": oscillator_commands,
    "absorb": absorb_commands,
    "walk": walk_commands,
    "bulk": bulk_commands,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harper",
        description="Spectra, eigenvalue bounds and random walks for circulant-plus-diagonal matrices",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for module in COMMANDS.values():
        module.register(subparsers)
    selftest_commands.register(subparsers)
    return parser


def run(config: RunConfig) -> int:
    """Execute one validated command; returns the process exit status"""
    try:
        summary = COMMANDS[config.command].handle(config)
    except HarperError as e:
        logger.error(f"{config.command} failed: {e.detail}")
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{config.command} produced an invalid report: {e.error_count()} problem(s)")
        for problem in e.errors():
            location = ".".join(str(part) for part in problem["loc"]) or config.command
            print(f"error: {location}: {problem['msg']}", file=sys.stderr)
        return EXIT_VALIDATION
    print(summary)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=settings.log_level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # usage errors exit 2, --help exits 0
        return int(e.code or 0)

    if args.command == "self-test":
        return selftest_commands.handle(args)

    fields = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields and v is not None}
    try:
        config = RunConfig(**fields)
    except ValidationError as e:
        parser.print_usage(sys.stderr)
        for problem in e.errors():
            location = ".".join(str(part) for part in problem["loc"]) or args.command
            print(f"error: {location}: {problem['msg']}", file=sys.stderr)
        return EXIT_VALIDATION
    except HarperError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code

    logger.info(f"running {config.command} with seed {config.seed}")
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
