"""Artifact writers.

Output is bit-stable for fixed inputs: CSV floats use 17 significant digits,
JSON floats use Python's shortest round-trip repr and sorted keys. Files are
written to a temporary sibling and renamed into place.
"""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from harper.config import settings
from harper.exceptions import DomainError

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def resolve_output(path: Optional[Union[str, Path]], default_name: str) -> Path:
    target = Path(path) if path else Path(default_name)
    if not target.is_absolute() and target.parent == Path("."):
        target = Path(settings.output_dir) / target
    return target


def _plain(value: Any) -> Any:
    """numpy / pydantic / pandas values -> JSON-ready Python values"""
    if isinstance(value, BaseModel):
        if hasattr(value, "to_record"):
            return _plain(value.to_record())
        return _plain(value.model_dump())
    if isinstance(value, pd.DataFrame):
        return [_plain(row) for row in value.to_dict(orient="records")]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _as_frame(results: Any) -> pd.DataFrame:
    if isinstance(results, pd.DataFrame):
        return results
    plain = _plain(results)
    if isinstance(plain, dict):
        return pd.DataFrame([plain])
    return pd.DataFrame(plain)


def render(results: Any, format: Literal["csv", "json"]) -> str:
    if format == "csv":
        return _as_frame(results).to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    if format == "json":
        return json.dumps(_plain(results), sort_keys=True, indent=2) + "\n"
    raise DomainError(f"unknown format '{format}'")


def emit_report(results: Any, format: Literal["csv", "json"], path: Union[str, Path]) -> Path:
    """Write results atomically; returns the final path"""
    target = Path(path)
    text = render(results, format)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except OSError as e:
        raise DomainError(f"cannot write {target}: {e}")
    logger.info(f"wrote {format} report to {target}")
    return target
