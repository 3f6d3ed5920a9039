import argparse

from harper.exceptions import EXIT_NUMERICAL, EXIT_OK
from harper.selftest import CHECKS, COVERAGE, self_test


def register(subparsers):
    parser = subparsers.add_parser("self-test", help="run the reduced end-to-end checks")
    parser.add_argument("--coverage", action="store_true", help="print the command -> operation map and exit")
    parser.add_argument("--only", nargs="+", choices=sorted(CHECKS), help="run a subset of the checks")
    parser.set_defaults(command="self-test")


def handle(args: argparse.Namespace) -> int:
    if args.coverage:
        for command, operations in COVERAGE.items():
            print(f"{command}: {', '.join(operations)}")
        return EXIT_OK

    results = self_test(args.only)
    for result in results:
        status = "pass" if result.passed else "FAIL"
        print(f"[{status}] {result.name} ({result.seconds:.1f}s): {result.detail}")
    failed = [r.name for r in results if not r.passed]
    print(f"self-test: {len(results) - len(failed)}/{len(results)} passed")
    return EXIT_NUMERICAL if failed else EXIT_OK
