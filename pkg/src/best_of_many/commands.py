"""
Command workflows behind the CLI: dataset generation, training, evaluation,
sampling, objective comparison and the gradient check suite.

Every command is a pure function of its configuration and seed and returns a
summary dict; files are written under the given output directory.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .checkpoint import checkpoint_load, load_image_dataset, save_image_dataset
from .constants import (
    RECOGNITION_OBJECTIVES,
    ModelKind,
    ObjectiveKind,
    Profile,
    TaskKind,
)
from .data import (
    Dataset,
    TrajectoryDataset,
    fork_analytic_ncll,
    load_jsonl,
    write_jsonl,
)
from .exceptions import (
    ConfigError,
    EmptyInput,
    IndexOutOfRange,
    InvalidK,
    IoError,
    KindMismatch,
)
from .latent import GaussianLatent, kl_standard_normal, reparameterize
from .metrics import (
    final_window_mean,
    forecast_metrics,
    kl_curve,
    kmeans,
    ncll_per_example,
    oracle_topk_error,
    sample_statistics,
)
from .models import ConditionalModel, SequenceBatch, build_model, sample_futures
from .nn import CnnEncoder, Conv2d, ConvLstmCell, Linear, LstmCell
from .objectives import evaluate_objective, objective_registry
from .plots import (
    plot_frame_statistics,
    plot_kl_overlay,
    plot_oracle_overlay,
    plot_samples,
)
from .tensor import (
    GradCheckReport,
    RngStream,
    Tensor,
    as_tensor,
    check_registered_ops,
    concat,
    grad_check,
    mul,
    sum_,
    use_dtype,
)
from .training import EVAL_STREAM, generate, prepare_data, train
from .validation import (
    DatasetManifest,
    EvalConfig,
    ForkSpec,
    ModelProfileConfig,
    RunConfig,
)

logger = logging.getLogger(__name__)

SAMPLE_STREAM = 5
GRADCHECK_STREAM = 6

# Examples per evaluation chunk; bounds the tiled T x B rollouts.
TRAJECTORY_CHUNK = 64
IMAGE_CHUNK = 8

MANIFEST_NAME = "manifest.json"
GRADCHECK_COLUMNS = ["category", "component", "passed", "max_rel_error", "error"]


def write_table(frame: pd.DataFrame, out_dir: Path, stem: str) -> Dict[str, Path]:
    """Write ``frame`` as ``<stem>.csv`` and an aligned ``<stem>.txt`` table."""
    csv_path, txt_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.txt"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        frame.to_csv(csv_path, index=False, float_format="%.10g")
        txt_path.write_text(
            frame.to_string(index=False, float_format=lambda v: f"{v:.4f}") + "\n",
            encoding="utf-8",
        )
    except OSError as e:
        raise IoError(
            f"Cannot write {stem} table to {out_dir}: {e}", {"path": str(out_dir)}
        )
    return {"csv": csv_path, "txt": txt_path}


def write_json(data: Any, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(data, sort_keys=True, indent=2)
        path.write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}", {"path": str(path)})
    return path


def load_dataset(path: str | Path) -> Dataset:
    """Load a JSONL trajectory file or a ``.bms`` image dataset container."""
    target = Path(path)
    if target.suffix == ".bms":
        return load_image_dataset(target)
    return load_jsonl(target)


def check_kind(model: ConditionalModel, dataset: Dataset) -> None:
    """
    Raises:
        KindMismatch: If the model family cannot consume the dataset
    """
    if model.batch_kind != dataset.kind:
        raise KindMismatch(
            f"{model.kind.value} model cannot evaluate a {dataset.kind} dataset",
            {"model": model.kind.value, "dataset": dataset.kind},
        )
    if model.kind is ModelKind.VISUAL_TRAJECTORY and (
        not isinstance(dataset, TrajectoryDataset) or dataset.scenes is None
    ):
        raise KindMismatch("visual_trajectory model needs a dataset with scene images")


def resolve_dataset(config: RunConfig, data_path: Optional[str | Path]) -> Dataset:
    """The given dataset file, or the held-out split of the run's own data."""
    if data_path is not None:
        return load_dataset(data_path)
    return prepare_data(config)[1]


# Dataset generation


def cmd_gen_data(config: RunConfig, out_dir: str | Path) -> Dict[str, Any]:
    """
    Generate the configured synthetic task into ``out_dir``.

    Trajectory tasks are written as ``train.jsonl``/``test.jsonl``, blobs as
    ``train.bms``/``test.bms``, next to a ``manifest.json``.

    Raises:
        ConfigError: For the ``jsonl`` task, which has nothing to generate
        IoError: If a file cannot be written
    """
    config = config.with_task_defaults()
    spec = config.data_spec()
    if spec is None:
        raise ConfigError("task 'jsonl' loads data and cannot be generated")
    out = Path(out_dir)
    dataset = generate(config.task, spec, config.n_train + config.n_test, config.seed)
    order = np.arange(len(dataset))
    splits = {
        "train": dataset.subset(order[: config.n_train]),
        "test": dataset.subset(order[config.n_train :]),
    }
    suffix = ".bms" if config.task is TaskKind.BLOBS else ".jsonl"
    files = {name: f"{name}{suffix}" for name in splits}

    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"Cannot create {out}: {e}", {"path": str(out)})
    for name, part in splits.items():
        target = out / files[name]
        if isinstance(part, TrajectoryDataset):
            write_jsonl(part, target)
        else:
            save_image_dataset(target, part)

    manifest = DatasetManifest(
        task=config.task.value,
        seed=config.seed,
        counts={name: len(part) for name, part in splits.items()},
        files=files,
        spec=spec.model_dump(mode="json"),
    )
    write_json(manifest.model_dump(mode="json"), out / MANIFEST_NAME)
    logger.info(f"Wrote {len(dataset)} {config.task.value} examples to {out}")
    return {"out": str(out), **manifest.model_dump(mode="json")}


# Training


def cmd_train(
    config: RunConfig, out_dir: str | Path, progress: bool = True
) -> Dict[str, Any]:
    """Train one run; writes ``checkpoint.bms`` and ``metrics.csv`` into ``out_dir``."""
    config = config.with_task_defaults()
    train_set, test_set = prepare_data(config)
    result = train(config, train_set, out_dir, test_set=test_set, progress=progress)
    last = result.metrics.iloc[-1] if len(result.metrics) else None
    return {
        "checkpoint": str(result.checkpoint_path),
        "metrics": str(result.metrics_path),
        "steps": config.steps,
        "final_loss": None if last is None else float(last["loss"]),
    }


# Evaluation


def evaluate_model(
    model: ConditionalModel,
    dataset: Dataset,
    config: RunConfig,
    eval_cfg: Optional[EvalConfig] = None,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    """
    NCLL and, per family, oracle top-k errors at each horizon (trajectories) or
    CSI/FAR/POD/correlation from one prior sample per sequence (images).

    Fork-family tasks also report ``ncll_floor``, the analytic NCLL of the
    generating mixture (single mode for the visual model, which sees the map).

    Raises:
        EmptyInput: If the dataset has no examples
    """
    eval_cfg = eval_cfg or config.eval
    rng = RngStream(config.seed if seed is None else seed, stream_id=EVAL_STREAM)
    n = len(dataset)
    if eval_cfg.n_examples is not None:
        n = min(eval_cfg.n_examples, n)
    if n == 0:
        raise EmptyInput("Cannot evaluate on an empty dataset")
    likelihood = config.likelihood(evaluation=True)
    chunk = IMAGE_CHUNK if dataset.kind == "image" else TRAJECTORY_CHUNK

    nclls: List[np.ndarray] = []
    oracle: List[Dict[int, float]] = []
    predictions: List[np.ndarray] = []
    truths: List[np.ndarray] = []
    t = eval_cfg.t_samples_cll
    for index, start in enumerate(range(0, n, chunk)):
        batch = dataset.batch(range(start, min(start + chunk, n)))
        assert batch.y is not None
        draw = rng.substream(index)
        nclls.append(ncll_per_example(model, batch, t, draw.substream(0), likelihood))
        if dataset.kind == "trajectory":
            drawn = sample_futures(model, batch, t, draw.substream(1))
            futures = np.stack([f.data for f in drawn])
            for b in range(batch.size):
                errors = oracle_topk_error(futures[:, b], batch.y.data[b], eval_cfg)
                oracle.append(errors)
        else:
            single = sample_futures(model, batch, 1, draw.substream(1))[0]
            predictions.append(single.data)
            truths.append(batch.y.data)

    row: Dict[str, Any] = {"examples": n, "ncll": float(np.mean(np.concatenate(nclls)))}
    for horizon in oracle[0] if oracle else []:
        row[f"oracle_h{horizon}"] = float(np.mean([e[horizon] for e in oracle]))
    if predictions:
        scores = forecast_metrics(
            np.concatenate(predictions), np.concatenate(truths), eval_cfg.csi_threshold
        )
        for name in ("csi", "far", "pod", "correlation"):
            value = getattr(scores, name)
            row[name] = math.nan if value is None else value

    floor = analytic_floor(model, dataset, config, n)
    if floor is not None:
        row["ncll_floor"] = floor
    return row


def analytic_floor(
    model: ConditionalModel, dataset: Dataset, config: RunConfig, n: int
) -> Optional[float]:
    spec = config.data_spec()
    if (
        config.task not in (TaskKind.FORK, TaskKind.STAR, TaskKind.FORK_MAP)
        or not isinstance(spec, ForkSpec)
        or not isinstance(dataset, TrajectoryDataset)
        or dataset.t_fut != spec.t_fut
        or not dataset.meta
        or "mode" not in dataset.meta[0]
    ):
        return None
    mode = None
    if model.kind is ModelKind.VISUAL_TRAJECTORY:
        mode = np.array([record["mode"] for record in dataset.meta[:n]])
    return float(np.mean(fork_analytic_ncll(spec, dataset.fut[:n], mode)))


def cmd_eval(
    checkpoint: str | Path,
    out_dir: str | Path,
    data_path: Optional[str | Path] = None,
    eval_cfg: Optional[EvalConfig] = None,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Evaluate a checkpoint; writes ``eval.csv`` and ``eval.txt``.

    Raises:
        KindMismatch: If the checkpoint's model family cannot consume the dataset
        IoError: If a file cannot be read or written
    """
    loaded = checkpoint_load(checkpoint)
    model = loaded.build_model()
    dataset = resolve_dataset(loaded.config, data_path)
    check_kind(model, dataset)
    row = {
        "method": loaded.config.objective.value,
        "step": loaded.step,
        **evaluate_model(model, dataset, loaded.config, eval_cfg, seed),
    }
    paths = write_table(pd.DataFrame([row]), Path(out_dir), "eval")
    logger.info(f"NCLL {row['ncll']:.4f} over {row['examples']} examples")
    return {**row, "table": str(paths["csv"])}


# Sampling


def cmd_sample(
    checkpoint: str | Path,
    out_dir: str | Path,
    index: int = 0,
    t: Optional[int] = None,
    k: int = 4,
    data_path: Optional[str | Path] = None,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Draw ``t`` prior samples for one example and render them as SVG, with the
    raw samples dumped as JSON.

    Trajectory samples are colored by k-means cluster; image samples are
    summarized as ground truth / best / mean / variance rows.

    Raises:
        IndexOutOfRange: If ``index`` is not a dataset row
        InvalidK: If ``k`` is not in [1, t]
    """
    loaded = checkpoint_load(checkpoint)
    model = loaded.build_model()
    config = loaded.config
    dataset = resolve_dataset(config, data_path)
    check_kind(model, dataset)
    if not 0 <= index < len(dataset):
        raise IndexOutOfRange(
            f"Example {index} is outside [0, {len(dataset)})",
            {"index": index, "size": len(dataset)},
        )
    image = dataset.kind == "image"
    t = t or (config.eval.t_samples_stats if image else 100)
    seed = config.seed if seed is None else seed
    out = Path(out_dir)

    batch = dataset.batch([index])
    drawn = sample_futures(model, batch, t, RngStream(seed, stream_id=SAMPLE_STREAM))
    futures = np.stack([f.data[0] for f in drawn])
    truth = dataset.fut[index]
    dump: Dict[str, Any] = {
        "index": index,
        "t": t,
        "objective": config.objective.value,
        "truth": truth.tolist(),
        "samples": futures.tolist(),
    }
    if image:
        stats = sample_statistics(futures, truth)
        figure = plot_frame_statistics(truth, stats, out / f"sample_{index}.svg")
        dump["best_index"] = stats.best_index
    else:
        if not 1 <= k <= t:
            raise InvalidK(f"k must lie in [1, {t}], got {k}", {"k": k, "t": t})
        labels = kmeans(futures.reshape(t, -1), k, seed=seed).labels
        assert isinstance(dataset, TrajectoryDataset)
        figure = plot_samples(
            dataset.obs[index],
            futures,
            truth,
            labels,
            out / f"sample_{index}.svg",
            title=f"{config.objective.value}: {t} samples, {k} clusters",
        )
        dump.update(k=k, obs=dataset.obs[index].tolist(), labels=labels.tolist())
    dump_path = write_json(dump, out / f"sample_{index}.json")
    return {"figure": str(figure), "samples": str(dump_path), "t": t}


# Objective comparison

_VARYING_FIELDS = {"objective", "t_train", "alpha"}


def method_label(config: RunConfig, configs: Sequence[RunConfig]) -> str:
    """Objective name, qualified by T and alpha when several runs share it."""
    label = config.objective.value
    if sum(c.objective is config.objective for c in configs) > 1:
        label += f"_T{config.t_train}"
        if config.objective is ObjectiveKind.HYBRID:
            label += f"_a{config.alpha:g}"
    return label


def check_comparable(configs: Sequence[RunConfig]) -> None:
    """
    Raises:
        ConfigError: If fewer than two runs are given or they differ beyond
            objective, T and alpha
    """
    if len(configs) < 2:
        raise ConfigError(f"compare needs at least 2 configs, got {len(configs)}")
    dumps = [c.model_dump(mode="json", exclude=_VARYING_FIELDS) for c in configs]
    for position, dump in enumerate(dumps[1:], start=1):
        differing = sorted(key for key in dump if dump[key] != dumps[0][key])
        if differing:
            raise ConfigError(
                f"Config {position} differs from config 0 beyond objective/T/alpha: "
                f"{', '.join(differing)}",
                {"fields": differing},
            )


def cmd_compare(
    configs: Sequence[RunConfig], out_dir: str | Path, progress: bool = True
) -> Dict[str, Any]:
    """
    Train every configuration on shared data and seeds and tabulate them.

    Writes ``comparison.csv``/``comparison.txt``, ``kl_overlay.svg`` (runs with
    a recognition network) and, for trajectory tasks, ``oracle_overlay.svg``.
    Each run's checkpoint and metrics land in ``<out>/<method>/``.
    """
    resolved = [c.with_task_defaults() for c in configs]
    check_comparable(resolved)
    out = Path(out_dir)
    train_set, test_set = prepare_data(resolved[0])

    rows: List[Dict[str, Any]] = []
    curves: Dict[str, pd.DataFrame] = {}
    labels = [method_label(c, resolved) for c in resolved]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"compare runs must be distinct, got {labels}")
    for label, config in zip(labels, resolved):
        logger.info(f"Training {label}")
        result = train(config, train_set, out / label, test_set=None, progress=progress)
        row: Dict[str, Any] = {"method": label, "objective": config.objective.value}
        row.update(evaluate_model(result.model, test_set, config))
        if config.objective in RECOGNITION_OBJECTIVES:
            curve = kl_curve(result.metrics)
            curves[label] = curve
            row["final_kl"] = final_window_mean(curve)
        else:
            row["final_kl"] = math.nan
        rows.append(row)

    frame = pd.DataFrame(rows)
    paths = write_table(frame, out, "comparison")
    figures = {"kl_overlay": str(plot_kl_overlay(curves, out / "kl_overlay.svg"))}
    if any(column.startswith("oracle_h") for column in frame.columns):
        oracle_path = plot_oracle_overlay(frame, out / "oracle_overlay.svg")
        figures["oracle_overlay"] = str(oracle_path)
    return {"table": str(paths["csv"]), "methods": labels, **figures}


# Gradient check suite

Program = Callable[[], Tensor]


def _weighted_check(
    component: str,
    program: Program,
    params: Mapping[str, Tensor],
    rng: RngStream,
    max_entries: Optional[int],
    tol: float,
) -> GradCheckReport:
    """Grad-check a fixed random weighting of ``program``'s output."""
    weights = as_tensor(rng.normal(program().shape))
    return grad_check(
        lambda: sum_(mul(program(), weights)),
        params,
        tol=tol,
        max_entries=max_entries,
        rng=rng.substream(1),
        component=component,
    )


def _leaf(rng: RngStream, shape: Sequence[int], name: str) -> Tensor:
    return Tensor(rng.normal(tuple(shape)), requires_grad=True, name=name)


def _cell_checks(rng: RngStream, tol: float) -> List[GradCheckReport]:
    lstm = LstmCell(3, 4, rng.substream(0))
    xs = _leaf(rng.substream(1), (2, 3, 3), "x")
    h0 = _leaf(rng.substream(2), (2, 4), "h0")
    c0 = _leaf(rng.substream(3), (2, 4), "c0")

    def lstm_program() -> Tensor:
        state = (h0, c0)
        for step in range(xs.shape[1]):
            state = lstm(xs[:, step, :], state)
        return concat([state[0], state[1]], axis=-1)

    conv_lstm = ConvLstmCell(2, 3, rng.substream(4))
    frames = _leaf(rng.substream(5), (1, 2, 2, 5, 5), "x")
    ch0 = _leaf(rng.substream(6), (1, 3, 5, 5), "h0")
    cc0 = _leaf(rng.substream(7), (1, 3, 5, 5), "c0")

    def conv_lstm_program() -> Tensor:
        state = (ch0, cc0)
        for step in range(frames.shape[1]):
            state = conv_lstm(frames[:, step], state)
        return concat([state[0], state[1]], axis=1)

    linear = Linear(3, 2, rng.substream(8), "tanh")
    conv = Conv2d(2, 3, rng.substream(9), activation="relu")
    cnn = CnnEncoder(
        1, (16, 16), rng.substream(10), filters=(2, 2, 2, 2), hidden=4, out_features=3
    )
    image = _leaf(rng.substream(11), (1, 1, 16, 16), "image")
    dense_in = _leaf(rng.substream(12), (2, 3), "x")
    conv_in = _leaf(rng.substream(13), (1, 2, 4, 4), "x")

    cases = [
        ("lstm_cell", lstm_program, {**lstm.parameters(), "x": xs, "h0": h0, "c0": c0}),
        (
            "conv_lstm_cell",
            conv_lstm_program,
            {**conv_lstm.parameters(), "x": frames, "h0": ch0, "c0": cc0},
        ),
        ("linear", lambda: linear(dense_in), {**linear.parameters(), "x": dense_in}),
        ("conv2d", lambda: conv(conv_in), {**conv.parameters(), "x": conv_in}),
        ("cnn_encoder", lambda: cnn(image), {**cnn.parameters(), "image": image}),
    ]
    return [
        _weighted_check(name, program, params, rng.substream(100 + i), None, tol)
        for i, (name, program, params) in enumerate(cases)
    ]


def _latent_checks(rng: RngStream, tol: float) -> List[GradCheckReport]:
    mu = _leaf(rng.substream(0), (3, 4), "mu")
    log_var = _leaf(rng.substream(1), (3, 4), "log_var")
    noise = rng.substream(2).normal((3, 4))
    latent = GaussianLatent(mu, log_var)
    params = {"mu": mu, "log_var": log_var}
    cases: List[Tuple[str, Program]] = [
        ("reparameterize", lambda: reparameterize(latent, noise=noise)),
        ("kl_standard_normal", lambda: kl_standard_normal(latent)),
    ]
    return [
        _weighted_check(name, program, params, rng.substream(10 + i), None, tol)
        for i, (name, program) in enumerate(cases)
    ]


def _trajectory_batch(rng: RngStream, with_scene: bool = False) -> SequenceBatch:
    scene = None
    if with_scene:
        scene = (rng.substream(2).uniform((2, 1, 16, 16)) > 0.5).astype(np.float64)
    x = rng.substream(0).normal((2, 3, 2))
    y = rng.substream(1).normal((2, 3, 2))
    return SequenceBatch.from_arrays(x, y, "trajectory", scene)


def _image_batch(rng: RngStream) -> SequenceBatch:
    x = rng.substream(0).uniform((1, 2, 8, 8))
    y = rng.substream(1).uniform((1, 2, 8, 8))
    return SequenceBatch.from_arrays(x, y, "image")


ModelCase = Tuple[ModelKind, SequenceBatch, int]


def _model_cases(rng: RngStream) -> List[ModelCase]:
    scene_batch = _trajectory_batch(rng.substream(1), with_scene=True)
    return [
        (ModelKind.TRAJECTORY, _trajectory_batch(rng.substream(0)), 16),
        (ModelKind.VISUAL_TRAJECTORY, scene_batch, 16),
        (ModelKind.IMAGE_SEQUENCE, _image_batch(rng.substream(2)), 8),
    ]


def _latent_size(sizes: ModelProfileConfig, kind: ModelKind) -> int:
    if kind is ModelKind.IMAGE_SEQUENCE:
        return sizes.latent_channels
    return sizes.latent


def _objective_checks(
    sizes: ModelProfileConfig, rng: RngStream, max_entries: int, tol: float
) -> List[GradCheckReport]:
    """Every registered objective on every model family."""
    reports = []
    for j, (model_kind, batch, extent) in enumerate(_model_cases(rng.substream(0))):
        family = rng.substream(1 + j)
        for i, kind in enumerate(objective_registry.kinds()):
            regression = kind is ObjectiveKind.REGRESSION
            latent = 0 if regression else _latent_size(sizes, model_kind)
            recog = kind in RECOGNITION_OBJECTIVES
            model = build_model(
                model_kind, sizes, family.substream(10 + i), latent, recog, extent
            )
            draw = family.substream(100 + i)

            def program(
                kind: ObjectiveKind = kind,
                model: ConditionalModel = model,
                batch: SequenceBatch = batch,
                draw: RngStream = draw,
            ) -> Tensor:
                # A fresh substream per call keeps the latent draws fixed.
                stream = draw.substream(500)
                return evaluate_objective(kind, model, batch, 3, stream)[0]

            reports.append(
                _weighted_check(
                    f"objective:{kind.value}:{model_kind.value}",
                    program,
                    model.parameters(),
                    draw,
                    max_entries,
                    tol,
                )
            )
    return reports


def _model_checks(
    sizes: ModelProfileConfig, rng: RngStream, max_entries: int, tol: float
) -> List[GradCheckReport]:
    reports = []
    for i, (kind, batch, extent) in enumerate(_model_cases(rng)):
        latent = _latent_size(sizes, kind)
        model = build_model(kind, sizes, rng.substream(10 + i), latent, False, extent)
        z = model.draw_latents(batch.size, 1, rng.substream(20 + i))

        def program(
            model: ConditionalModel = model,
            batch: SequenceBatch = batch,
            z: Tensor = z,
        ) -> Tensor:
            return model.predict(batch, z)

        reports.append(
            _weighted_check(
                f"model:{kind.value}",
                program,
                model.parameters(),
                rng.substream(30 + i),
                max_entries,
                tol,
            )
        )
    return reports


def gradcheck_suite(
    profile: Profile | str = Profile.DESK,
    seed: int = 0,
    instances: int = 100,
    max_entries: int = 4,
    tol: float = 1e-4,
) -> pd.DataFrame:
    """
    Finite-difference check of every registered op, the recurrent and
    convolutional cells, the latent path, every objective on every model
    family and every model forward pass. Model parameters are spot-checked
    at ``max_entries`` entries each.

    Returns one row per component: category, component, passed, max_rel_error
    and error.
    """
    rng = RngStream(seed, stream_id=GRADCHECK_STREAM)
    sizes = ModelProfileConfig.for_profile(profile)
    with use_dtype("float64"):
        groups = {
            "op": check_registered_ops(rng.substream(0), instances=instances, tol=tol),
            "cell": _cell_checks(rng.substream(1), tol),
            "latent": _latent_checks(rng.substream(2), tol),
            "objective": _objective_checks(sizes, rng.substream(3), max_entries, tol),
            "model": _model_checks(sizes, rng.substream(4), max_entries, tol),
        }
    rows = [
        {
            "category": category,
            "component": report.component,
            "passed": report.passed,
            "max_rel_error": report.max_rel_error,
            "error": report.error or "",
        }
        for category, reports in groups.items()
        for report in reports
    ]
    return pd.DataFrame(rows, columns=GRADCHECK_COLUMNS)


def cmd_gradcheck(
    out_dir: Optional[str | Path] = None,
    profile: Profile | str = Profile.DESK,
    seed: int = 0,
    instances: int = 100,
) -> Dict[str, Any]:
    """
    Run :func:`gradcheck_suite`; writes ``gradcheck.csv``/``gradcheck.txt``
    when ``out_dir`` is given. ``passed`` is false if any component failed.
    """
    frame = gradcheck_suite(profile, seed=seed, instances=instances)
    failures = frame.loc[~frame["passed"], "component"].tolist()
    for component in failures:
        logger.error(f"Gradient check failed: {component}")
    summary: Dict[str, Any] = {
        "passed": not failures,
        "failures": failures,
        "components": len(frame),
        "max_rel_error": float(frame["max_rel_error"].max()) if len(frame) else 0.0,
    }
    if out_dir is not None:
        summary["table"] = str(write_table(frame, Path(out_dir), "gradcheck")["csv"])
    return summary
