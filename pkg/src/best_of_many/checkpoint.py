"""
BMS1 binary container shared by model checkpoints and image datasets.

Layout: magic ``b"BMS1"``, little-endian u32 format version, little-endian
u64 header length, UTF-8 JSON header (sorted keys), then the payload of
little-endian IEEE-754 values at the byte offsets listed in the header.
"""

import json
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Tuple

import numpy as np
from pydantic import ValidationError

from .constants import CHECKPOINT_MAGIC, FORMAT_VERSION, DType
from .data.dataset import ImageSequenceDataset
from .exceptions import CorruptPayload, IoError, NumericalError, VersionMismatch
from .models.base import ConditionalModel
from .models.factory import build_model_for_run
from .validation import ArrayEntry, ContainerHeader, RunConfig

logger = logging.getLogger(__name__)

_PREAMBLE = struct.Struct("<4sIQ")
_PAYLOAD_DTYPES = {DType.FLOAT64.value: "<f8", DType.FLOAT32.value: "<f4"}

CHECKPOINT_KIND = "checkpoint"
IMAGE_DATASET_KIND = "image_dataset"


def encode_container(
    header: ContainerHeader, arrays: Mapping[str, np.ndarray]
) -> bytes:
    """Serialize ``arrays`` (in name order) under ``header``, filling in the entries."""
    dtype = np.dtype(_PAYLOAD_DTYPES[header.dtype])
    entries = []
    chunks = []
    offset = 0
    for name in sorted(arrays):
        data = np.ascontiguousarray(arrays[name], dtype=dtype)
        chunks.append(data.tobytes())
        entries.append(
            ArrayEntry(
                name=name, shape=list(data.shape), offset=offset, nbytes=data.nbytes
            )
        )
        offset += data.nbytes
    header = header.model_copy(update={"arrays": entries})
    header_bytes = json.dumps(
        header.model_dump(mode="json"), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    preamble = _PREAMBLE.pack(
        CHECKPOINT_MAGIC, header.format_version, len(header_bytes)
    )
    return preamble + header_bytes + b"".join(chunks)


def decode_container(blob: bytes) -> Tuple[ContainerHeader, Dict[str, np.ndarray]]:
    """
    Parse a container.

    Raises:
        VersionMismatch: If the magic or the format version is wrong
        CorruptPayload: If the header or payload disagree with each other
    """
    if len(blob) < _PREAMBLE.size:
        raise VersionMismatch("File is too short to be a BMS1 container")
    magic, version, header_length = _PREAMBLE.unpack_from(blob)
    if magic != CHECKPOINT_MAGIC:
        raise VersionMismatch(f"Bad magic {magic!r}, expected {CHECKPOINT_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"Unsupported format version {version}, expected {FORMAT_VERSION}",
            {"version": version},
        )
    start = _PREAMBLE.size + header_length
    if start > len(blob):
        raise CorruptPayload("Header extends beyond the end of the file")
    try:
        header = ContainerHeader.model_validate_json(blob[_PREAMBLE.size : start])
    except ValidationError as e:
        raise CorruptPayload(f"Invalid container header: {e.error_count()} error(s)")
    if header.dtype not in _PAYLOAD_DTYPES:
        raise CorruptPayload(f"Unknown payload dtype '{header.dtype}'")

    dtype = np.dtype(_PAYLOAD_DTYPES[header.dtype])
    payload = memoryview(blob)[start:]
    arrays: Dict[str, np.ndarray] = {}
    expected = 0
    for entry in header.arrays:
        nbytes = math.prod(entry.shape) * dtype.itemsize
        if entry.nbytes != nbytes or entry.offset != expected:
            raise CorruptPayload(
                f"Array {entry.name}: shape {entry.shape} disagrees with "
                f"{entry.nbytes} bytes at offset {entry.offset}",
                {"array": entry.name},
            )
        if entry.offset + nbytes > len(payload):
            raise CorruptPayload(
                f"Array {entry.name} is truncated", {"array": entry.name}
            )
        arrays[entry.name] = np.frombuffer(
            payload[entry.offset : entry.offset + nbytes], dtype=dtype
        ).reshape(entry.shape).copy()
        expected += nbytes
    if expected != len(payload):
        raise CorruptPayload(
            f"Payload has {len(payload)} bytes, header describes {expected}"
        )
    return header, arrays


def write_container(
    path: str | Path, header: ContainerHeader, arrays: Mapping[str, np.ndarray]
) -> None:
    try:
        Path(path).write_bytes(encode_container(header, arrays))
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}", {"path": str(path)})


def read_container(path: str | Path) -> Tuple[ContainerHeader, Dict[str, np.ndarray]]:
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"Cannot read {path}: {e}", {"path": str(path)})
    return decode_container(blob)


@dataclass
class ModelCheckpoint:
    """A loaded checkpoint: header, run configuration and parameter values."""

    header: ContainerHeader
    config: RunConfig
    state: Dict[str, np.ndarray]

    @property
    def step(self) -> int:
        return self.header.step

    def build_model(self) -> ConditionalModel:
        """Rebuild the model from the stored configuration and load the parameters."""
        model = build_model_for_run(self.config)
        model.load_state(self.state)
        return model


def checkpoint_save(
    path: str | Path, model: ConditionalModel, config: RunConfig, step: int
) -> None:
    """
    Write ``model``'s parameters with the run configuration snapshot.

    Raises:
        NumericalError: If any parameter is non-finite
        IoError: If the file cannot be written
    """
    state = model.state_dict()
    bad = [name for name, value in state.items() if not np.all(np.isfinite(value))]
    if bad:
        raise NumericalError(
            f"Refusing to checkpoint non-finite parameters: {', '.join(bad)}",
            {"parameters": bad},
        )
    header = ContainerHeader(
        kind=CHECKPOINT_KIND,
        dtype=config.dtype.value,
        model_kind=model.kind.value,
        profile=config.profile.value,
        step=step,
        config=config.model_dump(mode="json"),
    )
    write_container(path, header, state)
    logger.debug(f"Saved checkpoint at step {step} to {path}")


def checkpoint_load(path: str | Path) -> ModelCheckpoint:
    """
    Read a checkpoint written by :func:`checkpoint_save`.

    Raises:
        VersionMismatch: If the container magic or version is wrong
        CorruptPayload: If the payload disagrees with the header
    """
    header, arrays = read_container(path)
    if header.kind != CHECKPOINT_KIND or header.config is None:
        raise CorruptPayload(f"{path} is a '{header.kind}' container, not a checkpoint")
    # The dataset may have moved since training.
    config = RunConfig.model_validate(header.config, context={"check_paths": False})
    state = {name: value.astype(np.float64) for name, value in arrays.items()}
    return ModelCheckpoint(header=header, config=config, state=state)


def save_image_dataset(path: str | Path, dataset: ImageSequenceDataset) -> None:
    header = ContainerHeader(
        kind=IMAGE_DATASET_KIND,
        meta={"t_obs": dataset.t_obs, "examples": dataset.meta},
    )
    write_container(path, header, {"frames": dataset.frames})


def load_image_dataset(path: str | Path) -> ImageSequenceDataset:
    header, arrays = read_container(path)
    if header.kind != IMAGE_DATASET_KIND or "frames" not in arrays:
        raise CorruptPayload(
            f"{path} is a '{header.kind}' container, not an image dataset"
        )
    return ImageSequenceDataset(
        frames=arrays["frames"],
        t_obs=int(header.meta["t_obs"]),
        meta=list(header.meta.get("examples", [])),
    )
