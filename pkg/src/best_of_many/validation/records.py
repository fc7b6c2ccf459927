from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..constants import FORMAT_VERSION


class TrajectoryRecord(BaseModel):
    """One line of the JSONL trajectory format."""

    obs: List[List[float]] = Field(..., description="Observed [dx, dy] displacements")
    fut: List[List[float]] = Field(..., description="Future [dx, dy] displacements")
    meta: Dict[str, Any] = Field(default_factory=dict, description="Free-form metadata")

    model_config = {"extra": "forbid"}


class ArrayEntry(BaseModel):
    """Location of one named array inside a container payload."""

    name: str
    shape: List[int]
    offset: int = Field(..., description="Byte offset into the payload")
    nbytes: int


class ContainerHeader(BaseModel):
    """JSON header of a BMS1 container (checkpoints and image datasets)."""

    format_version: int = Field(default=FORMAT_VERSION)
    kind: str = Field(..., description="'checkpoint' or 'image_dataset'")
    dtype: str = Field(default="float64", description="Payload element type")
    arrays: List[ArrayEntry] = Field(default_factory=list)
    model_kind: Optional[str] = Field(default=None)
    profile: Optional[str] = Field(default=None)
    step: int = Field(default=0, description="Optimizer steps taken")
    config: Optional[Dict[str, Any]] = Field(
        default=None, description="RunConfig snapshot"
    )
    meta: Dict[str, Any] = Field(default_factory=dict)

    model_config = {"extra": "forbid"}


class DatasetManifest(BaseModel):
    """Manifest written next to generated datasets."""

    task: str
    seed: int
    counts: Dict[str, int] = Field(..., description="Examples per split")
    files: Dict[str, str] = Field(..., description="File name per split")
    spec: Dict[str, Any] = Field(default_factory=dict, description="Generator settings")

    model_config = {"extra": "forbid"}
