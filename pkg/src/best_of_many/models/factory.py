import logging
from typing import Callable, Dict

from ..constants import RECOGNITION_OBJECTIVES, ModelKind, ObjectiveKind
from ..tensor import RngStream
from ..validation import ModelProfileConfig, RunConfig
from .base import ConditionalModel
from .image_seq import ImageSeqModel
from .trajectory import TrajectoryModel
from .visual import VisualTrajectoryModel

logger = logging.getLogger(__name__)

Builder = Callable[[ModelProfileConfig, RngStream, int, bool, int], ConditionalModel]


def _trajectory(
    sizes: ModelProfileConfig, rng: RngStream, latent: int, recog: bool, extent: int
) -> ConditionalModel:
    return TrajectoryModel(sizes, rng, latent=latent, with_recognition=recog)


def _visual(
    sizes: ModelProfileConfig, rng: RngStream, latent: int, recog: bool, extent: int
) -> ConditionalModel:
    return VisualTrajectoryModel(
        sizes, rng, map_size=extent, latent=latent, with_recognition=recog
    )


def _image(
    sizes: ModelProfileConfig, rng: RngStream, latent: int, recog: bool, extent: int
) -> ConditionalModel:
    return ImageSeqModel(
        sizes, rng, grid=extent, latent_channels=latent, with_recognition=recog
    )


_BUILDERS: Dict[ModelKind, Builder] = {
    ModelKind.TRAJECTORY: _trajectory,
    ModelKind.VISUAL_TRAJECTORY: _visual,
    ModelKind.IMAGE_SEQUENCE: _image,
}


def build_model(
    kind: ModelKind | str,
    sizes: ModelProfileConfig,
    rng: RngStream,
    latent: int,
    with_recognition: bool = True,
    extent: int = 16,
) -> ConditionalModel:
    """
    Build a model family with Glorot-initialized parameters.

    ``latent`` is the latent size (channels for image models; 0 builds a
    plain encoder-decoder). ``extent`` is the scene size for visual models
    and the frame size for image models.
    """
    return _BUILDERS[ModelKind(kind)](sizes, rng, latent, with_recognition, extent)


def build_model_for_run(config: RunConfig) -> ConditionalModel:
    """Build the model a run configuration trains, seeded from ``config.seed``."""
    config = config.with_task_defaults()
    kind = ModelKind(config.model)
    sizes = config.model_sizes()
    if config.objective is ObjectiveKind.REGRESSION:
        latent = 0
    elif kind is ModelKind.IMAGE_SEQUENCE:
        latent = sizes.latent_channels
    else:
        latent = sizes.latent
    image = kind is ModelKind.IMAGE_SEQUENCE
    extent = config.blobs.grid if image else config.fork.map_size
    model = build_model(
        kind,
        sizes,
        RngStream(config.seed, stream_id=1),
        latent,
        with_recognition=config.objective in RECOGNITION_OBJECTIVES,
        extent=extent,
    )
    logger.info(
        f"Built {kind.value} model ({config.profile.value} profile, "
        f"{model.num_parameters()} parameters)"
    )
    return model
