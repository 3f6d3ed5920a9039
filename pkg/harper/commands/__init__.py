import argparse
from pathlib import Path
from typing import Any, Optional

from harper.models import RunConfig
from harper.utils.reporting import emit_report, resolve_output


def add_output_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--out", dest="out_path", help="output file (default: <command>.<format> in HARPER_OUTPUT_DIR)")
    parser.add_argument("--format", choices=["csv", "json"], help="output format")


def write_results(config: RunConfig, results: Any, stem: Optional[str] = None) -> Path:
    fmt = config.output_format
    target = resolve_output(config.out_path, f"{stem or config.command}.{fmt}")
    return emit_report(results, fmt, target)
