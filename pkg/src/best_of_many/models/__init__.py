from .base import ConditionalModel, Context, sample_futures, tile
from .batch import SequenceBatch
from .checks import FactorizationReport, log_likelihood_factorization_check
from .factory import build_model, build_model_for_run
from .image_seq import ImageSeqModel, image_seq_forward
from .trajectory import TrajectoryModel, decode_sequence, encode_context
from .visual import VisualTrajectoryModel, visual_forward

__all__ = [
    "ConditionalModel",
    "Context",
    "FactorizationReport",
    "ImageSeqModel",
    "SequenceBatch",
    "TrajectoryModel",
    "VisualTrajectoryModel",
    "build_model",
    "build_model_for_run",
    "decode_sequence",
    "encode_context",
    "image_seq_forward",
    "log_likelihood_factorization_check",
    "sample_futures",
    "tile",
]
