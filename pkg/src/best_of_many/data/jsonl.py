"""
JSONL trajectory format: one UTF-8 JSON object per line,
``{"obs": [[dx, dy], ...], "fut": [[dx, dy], ...], "meta": {...}}``.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
from pydantic import ValidationError

from ..exceptions import IoError, ParseError, SchemaError
from ..validation import TrajectoryRecord
from .dataset import TrajectoryDataset

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("obs", "fut")


def _parse_line(text: str, line: int) -> TrajectoryRecord:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Line {line}: invalid JSON ({e.msg})", line)
    if not isinstance(raw, dict):
        raise ParseError(f"Line {line}: expected a JSON object", line)
    missing = [name for name in REQUIRED_FIELDS if name not in raw]
    if missing:
        raise SchemaError(f"Line {line}: missing fields {missing}", missing, line)
    try:
        record = TrajectoryRecord.model_validate(raw)
    except ValidationError as e:
        raise SchemaError(f"Line {line}: {e.errors()[0]['msg']}", line=line)
    for name in REQUIRED_FIELDS:
        points = getattr(record, name)
        if not points or any(len(point) != 2 for point in points):
            raise SchemaError(
                f"Line {line}: '{name}' must be a non-empty list of [dx, dy]", line=line
            )
        if not np.all(np.isfinite(points)):
            raise SchemaError(
                f"Line {line}: '{name}' contains non-finite values", line=line
            )
    return record


def load_jsonl(path: str | Path) -> TrajectoryDataset:
    """
    Load a trajectory dataset; blank lines are skipped.

    Raises:
        IoError: If the file cannot be read
        ParseError: If a line is not a JSON object (carries the 1-based line)
        SchemaError: If a record misses fields or has bad or inconsistent lengths
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"Cannot read {path}: {e}", {"path": str(path)})

    obs: List[List[List[float]]] = []
    fut: List[List[List[float]]] = []
    meta: List[Dict[str, Any]] = []
    for number, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        record = _parse_line(text, number)
        if obs and (len(record.obs) != len(obs[0]) or len(record.fut) != len(fut[0])):
            raise SchemaError(
                f"Line {number}: sequence lengths {len(record.obs)}/{len(record.fut)} "
                f"differ from {len(obs[0])}/{len(fut[0])}",
                line=number,
            )
        obs.append(record.obs)
        fut.append(record.fut)
        meta.append(record.meta)

    logger.info(f"Loaded {len(obs)} trajectories from {path}")
    if not obs:
        return TrajectoryDataset(obs=np.zeros((0, 0, 2)), fut=np.zeros((0, 0, 2)))
    return TrajectoryDataset(
        obs=np.asarray(obs, dtype=np.float64),
        fut=np.asarray(fut, dtype=np.float64),
        meta=meta,
    )


def write_jsonl(dataset: TrajectoryDataset, path: str | Path) -> None:
    """
    Write ``dataset`` as JSONL; floats are written with full round-trip precision.

    Raises:
        IoError: If the file cannot be written
    """
    rows = []
    for i in range(len(dataset)):
        record = {
            "obs": dataset.obs[i].tolist(),
            "fut": dataset.fut[i].tolist(),
            "meta": dataset.meta[i] if dataset.meta else {},
        }
        rows.append(json.dumps(record, allow_nan=False))
    try:
        Path(path).write_text("".join(row + "\n" for row in rows), encoding="utf-8")
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}", {"path": str(path)})
