from .config import (
    AdamConfig,
    EvalConfig,
    LikelihoodConfig,
    ModelProfileConfig,
    RunConfig,
    load_run_config,
    parse_model,
)
from .records import ArrayEntry, ContainerHeader, DatasetManifest, TrajectoryRecord
from .specs import BlobSpec, ForkSpec

__all__ = [
    "AdamConfig",
    "ArrayEntry",
    "BlobSpec",
    "ContainerHeader",
    "DatasetManifest",
    "EvalConfig",
    "ForkSpec",
    "LikelihoodConfig",
    "ModelProfileConfig",
    "RunConfig",
    "TrajectoryRecord",
    "load_run_config",
    "parse_model",
]
