from enum import Enum

from . import __version__

SDK_VERSION = __version__

CHECKPOINT_MAGIC = b"BMS1"

# Bump when the container header layout changes.
FORMAT_VERSION = 1

SEED_ENV_VAR = "BMS_SEED"


class TaskKind(str, Enum):
    """Enumeration of supported datasets."""

    FORK = "fork"
    STAR = "star"
    FORK_MAP = "fork_map"
    BLOBS = "blobs"
    JSONL = "jsonl"


class ObjectiveKind(str, Enum):
    """Enumeration of supported training objectives."""

    MC = "mc"
    CVAE = "cvae"
    MS = "ms"
    BMS = "bms"
    HYBRID = "hybrid"
    PRIOR_BMS = "prior_bms"
    REGRESSION = "regression"


class ModelKind(str, Enum):
    """Enumeration of assembled model families."""

    TRAJECTORY = "trajectory"
    VISUAL_TRAJECTORY = "visual_trajectory"
    IMAGE_SEQUENCE = "image_sequence"


class Profile(str, Enum):
    """Layer size profile: desk-scale defaults or the published layer tables."""

    DESK = "desk"
    PAPER = "paper"


class DType(str, Enum):
    """Numeric profile of tensor storage."""

    FLOAT64 = "float64"
    FLOAT32 = "float32"


class Padding(str, Enum):
    """Convolution padding modes."""

    SAME = "same"
    VALID = "valid"


class Activation(str, Enum):
    """Activations available to dense and convolutional layers."""

    NONE = "none"
    RELU = "relu"
    TANH = "tanh"


class LatentSource(str, Enum):
    """Where latent samples come from when rolling out futures."""

    PRIOR = "prior"
    RECOGNITION = "recognition"


# Objectives that train a recognition network q(z|x,y).
RECOGNITION_OBJECTIVES = frozenset(
    {
        ObjectiveKind.CVAE,
        ObjectiveKind.MS,
        ObjectiveKind.BMS,
        ObjectiveKind.HYBRID,
    }
)

TRAJECTORY_TASKS = frozenset(
    {TaskKind.FORK, TaskKind.STAR, TaskKind.FORK_MAP, TaskKind.JSONL}
)

# Decoder noise scale for [0, 1] image frames.
IMAGE_SIGMA_DEC = 0.1
