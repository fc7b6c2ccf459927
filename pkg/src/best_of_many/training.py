import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .checkpoint import checkpoint_save, load_image_dataset
from .constants import TaskKind
from .data import (
    Dataset,
    gen_blobs,
    gen_fork,
    gen_fork_with_map,
    gen_star,
    load_jsonl,
    split,
)
from .exceptions import NumericalError
from .metrics import ncll
from .models.base import ConditionalModel
from .models.factory import build_model_for_run
from .objectives import AdamState, adam_step, evaluate_objective
from .tensor import RngStream, Tape, use_dtype
from .validation import BlobSpec, ForkSpec, RunConfig

logger = logging.getLogger(__name__)

METRICS_COLUMNS = [
    "step",
    "objective",
    "value",
    "loss",
    "kl",
    "loglik_mean",
    "loglik_max",
    "loglik_min",
    "eval_ncll",
]

CHECKPOINT_NAME = "checkpoint.bms"
METRICS_NAME = "metrics.csv"

# Seeds are split into independent streams per concern.
MODEL_STREAM, OBJECTIVE_STREAM, BATCH_STREAM, EVAL_STREAM = 1, 2, 3, 4


def generate(task: TaskKind, spec: ForkSpec | BlobSpec, n: int, seed: int) -> Dataset:
    generators = {
        TaskKind.FORK: gen_fork,
        TaskKind.STAR: gen_star,
        TaskKind.FORK_MAP: gen_fork_with_map,
        TaskKind.BLOBS: gen_blobs,
    }
    return generators[task](spec, n, seed)  # type: ignore[operator, no-any-return]


def prepare_data(config: RunConfig) -> Tuple[Dataset, Dataset]:
    """
    Training and test sets of a run.

    A ``data_path`` is loaded and split by ``split_frac``; otherwise
    ``n_train + n_test`` examples are generated and the last ``n_test`` held out.
    """
    if config.data_path is not None:
        path = Path(config.data_path)
        dataset: Dataset = (
            load_image_dataset(path)
            if config.task is TaskKind.BLOBS
            else load_jsonl(path)
        )
        return split(dataset, config.split_frac, config.seed)
    spec = config.data_spec()
    assert spec is not None
    dataset = generate(config.task, spec, config.n_train + config.n_test, config.seed)
    order = np.arange(len(dataset))
    train_part = dataset.subset(order[: config.n_train])
    return train_part, dataset.subset(order[config.n_train :])


@dataclass
class TrainResult:
    model: ConditionalModel
    metrics: pd.DataFrame
    checkpoint_path: Optional[Path]
    metrics_path: Optional[Path]


def write_metrics(rows: List[Dict[str, Any]], path: Path) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=METRICS_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.10g")
    return frame


def train(
    config: RunConfig,
    train_set: Dataset,
    out_dir: Optional[str | Path] = None,
    test_set: Optional[Dataset] = None,
    progress: bool = True,
) -> TrainResult:
    """
    Train the configured model and objective with Adam.

    Writes ``metrics.csv`` (one row per step) and ``checkpoint.bms`` (every
    ``checkpoint_every`` steps and at the end) into ``out_dir`` when given.
    A non-finite loss or gradient aborts the run; the metrics so far and the
    last good checkpoint stay on disk.

    Raises:
        NumericalError: On a non-finite loss or gradient
    """
    config = config.with_task_defaults()
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out / CHECKPOINT_NAME if out is not None else None
    metrics_path = out / METRICS_NAME if out is not None else None
    assert config.t_train is not None and config.batch is not None

    with use_dtype(config.dtype):
        model = build_model_for_run(config)
        params = model.parameters()
        state = AdamState()
        objective_rng = RngStream(config.seed, stream_id=OBJECTIVE_STREAM)
        batch_rng = RngStream(config.seed, stream_id=BATCH_STREAM)
        monitor = None
        if test_set is not None and config.eval_every:
            monitor = test_set.batch(range(min(len(test_set), 64)))
        rows: List[Dict[str, Any]] = []

        logger.info(
            f"Training {config.objective.value} on {config.task.value}: "
            f"{config.steps} steps, batch {config.batch}, T={config.t_train}"
        )
        steps = range(1, config.steps + 1)
        for step in tqdm(steps, disable=not progress, desc="train"):
            draw = batch_rng.substream(step)
            indices = draw.integers(len(train_set), (config.batch,))
            batch = train_set.batch(indices)
            try:
                with Tape() as tape:
                    loss, report = evaluate_objective(
                        config.objective,
                        model,
                        batch,
                        config.t_train,
                        objective_rng.substream(step),
                        alpha=config.alpha,
                        likelihood=config.likelihood(),
                        teacher_forcing=config.teacher_forcing,
                    )
                    grads = tape.backward(loss)
                grad_map = {name: grads[param] for name, param in params.items()}
                bad = [n for n, g in grad_map.items() if not np.all(np.isfinite(g))]
                if bad:
                    raise NumericalError(
                        f"Non-finite gradient at step {step}", {"parameters": bad}
                    )
            except NumericalError as e:
                logger.error(f"Aborting at step {step}: {e.message}")
                if metrics_path is not None:
                    write_metrics(rows, metrics_path)
                raise

            adam_step(params, grad_map, state, config.adam)

            ll = np.asarray(report.per_sample_loglik)
            row: Dict[str, Any] = {
                "step": step,
                "objective": config.objective.value,
                "value": report.value,
                "loss": loss.item(),
                "kl": report.kl,
                "loglik_mean": float(ll.mean()),
                "loglik_max": float(ll.max()),
                "loglik_min": float(ll.min()),
                "eval_ncll": np.nan,
            }
            if monitor is not None and step % config.eval_every == 0:
                row["eval_ncll"] = ncll(
                    model,
                    monitor,
                    10,
                    RngStream(config.seed, stream_id=EVAL_STREAM),
                    config.likelihood(evaluation=True),
                )
                logger.info(f"step {step}: held-out NCLL {row['eval_ncll']:.4f}")
            rows.append(row)

            if (
                checkpoint_path is not None
                and config.checkpoint_every
                and step % config.checkpoint_every == 0
            ):
                checkpoint_save(checkpoint_path, model, config, step)

    if checkpoint_path is not None:
        checkpoint_save(checkpoint_path, model, config, config.steps)
    if metrics_path is not None:
        frame = write_metrics(rows, metrics_path)
    else:
        frame = pd.DataFrame(rows, columns=METRICS_COLUMNS)
    return TrainResult(model, frame, checkpoint_path, metrics_path)
