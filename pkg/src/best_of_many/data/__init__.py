from .dataset import (
    Dataset,
    ImageSequenceDataset,
    TrajectoryDataset,
    split,
    to_absolute,
    to_relative,
)
from .jsonl import load_jsonl, write_jsonl
from .synth import (
    blob_centres,
    classify_modes,
    fork_analytic_ncll,
    gen_blobs,
    gen_fork,
    gen_fork_with_map,
    gen_star,
    mode_means,
    render_corridor,
)

__all__ = [
    "Dataset",
    "ImageSequenceDataset",
    "TrajectoryDataset",
    "blob_centres",
    "classify_modes",
    "fork_analytic_ncll",
    "gen_blobs",
    "gen_fork",
    "gen_fork_with_map",
    "gen_star",
    "load_jsonl",
    "mode_means",
    "render_corridor",
    "split",
    "to_absolute",
    "to_relative",
    "write_jsonl",
]
