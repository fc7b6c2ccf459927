import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, TypeVar

from pydantic import (
    BaseModel,
    Field,
    ValidationError,
    ValidationInfo,
    model_validator,
)

from ..constants import (
    IMAGE_SIGMA_DEC,
    SEED_ENV_VAR,
    DType,
    ModelKind,
    ObjectiveKind,
    Profile,
    TaskKind,
)
from ..exceptions import BmsError, ConfigError
from .specs import BlobSpec, ForkSpec

ModelT = TypeVar("ModelT", bound=BaseModel)


def _describe(err: Any) -> str:
    return f"{'.'.join(map(str, err['loc']))}: {err['msg']}"


def parse_model(
    model_cls: Type[ModelT], data: Any, error_cls: Type[BmsError] = ConfigError
) -> ModelT:
    """
    Validate ``data`` (a dict or JSON text) into ``model_cls``.

    Raises:
        error_cls: If pydantic rejects the input
    """
    try:
        if isinstance(data, (str, bytes)):
            return model_cls.model_validate_json(data)
        return model_cls.model_validate(data)
    except ValidationError as e:
        raise error_cls(
            f"Invalid {model_cls.__name__}: {e.error_count()} error(s)",
            {"errors": [_describe(err) for err in e.errors()]},
        )


class LikelihoodConfig(BaseModel):
    """Isotropic Gaussian decoder likelihood."""

    sigma_dec: float = Field(default=1.0, description="Decoder noise scale")
    include_normalizer: bool = Field(
        default=False, description="Add the Gaussian normalizing constant"
    )

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_sigma(self) -> "LikelihoodConfig":
        if not self.sigma_dec > 0:
            raise ConfigError(f"sigma_dec must be > 0, got {self.sigma_dec}")
        return self


class AdamConfig(BaseModel):
    lr: float = Field(default=1e-3, description="Learning rate")
    beta1: float = Field(default=0.9, description="First moment decay")
    beta2: float = Field(default=0.999, description="Second moment decay")
    eps: float = Field(default=1e-8, description="Denominator offset")

    model_config = {"extra": "forbid"}


class EvalConfig(BaseModel):
    """Evaluation protocol settings."""

    t_samples_cll: int = Field(
        default=100, description="Prior samples per NCLL estimate"
    )
    topk_frac: float = Field(
        default=0.10, description="Oracle fraction of samples kept"
    )
    horizons: List[int] = Field(
        default_factory=lambda: [3, 6, 9, 12],
        description="1-based future steps to report",
    )
    csi_threshold: float = Field(default=0.5, description="Binarization threshold")
    t_samples_stats: int = Field(default=50, description="Samples for frame statistics")
    n_examples: Optional[int] = Field(
        default=None, description="Evaluate only the first n test examples"
    )

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_eval(self) -> "EvalConfig":
        if not 0.0 < self.topk_frac <= 1.0:
            raise ConfigError(f"topk_frac must lie in (0, 1], got {self.topk_frac}")
        if not 0.0 < self.csi_threshold < 1.0:
            raise ConfigError(
                f"csi_threshold must lie in (0, 1), got {self.csi_threshold}"
            )
        if self.t_samples_cll < 1 or self.t_samples_stats < 2:
            raise ConfigError("t_samples_cll must be >= 1 and t_samples_stats >= 2")
        if any(h < 1 for h in self.horizons):
            raise ConfigError(f"horizons are 1-based, got {self.horizons}")
        return self

    def horizons_within(self, t_fut: int) -> List[int]:
        """
        Return the horizons, checking they fit a ``t_fut``-step future.

        Raises:
            ConfigError: If a horizon exceeds ``t_fut``
        """
        beyond = [h for h in self.horizons if h > t_fut]
        if beyond:
            raise ConfigError(f"horizons {beyond} exceed the {t_fut}-step future")
        return list(self.horizons)


_PAPER_SIZES: Dict[str, Any] = {
    "embed": 32,
    "hidden": 48,
    "dec_embed": 64,
    "latent": 64,
    "recog_embed": 64,
    "recog_hidden": 128,
    "visual_dec_embed": 64,
    "visual_hidden": 64,
    "cnn_filters": (32, 64, 128, 256),
    "cnn_hidden": 1024,
    "cnn_out": 32,
    "conv_embed": 32,
    "conv_hidden": (32, 64),
    "dec_conv_embed": 32,
    "dec_conv_hidden": (64, 64),
    "out_conv": 32,
    "latent_channels": 64,
}


class ModelProfileConfig(BaseModel):
    """
    Layer sizes of every model family.

    Defaults are the desk-scale sizes; :meth:`for_profile` returns the
    published sizes for ``Profile.PAPER``.
    """

    profile: Profile = Field(default=Profile.DESK)
    embed: int = Field(default=16, description="Trajectory input embedding")
    hidden: int = Field(default=32, description="Encoder and decoder LSTM size")
    dec_embed: int = Field(default=32, description="Decoder step embedding")
    latent: int = Field(default=8, description="Latent size")
    recog_embed: int = Field(default=16, description="Recognition embedding")
    recog_hidden: int = Field(default=32, description="Recognition LSTM size")
    visual_dec_embed: int = Field(default=32, description="Visual decoder embeddings")
    visual_hidden: int = Field(default=32, description="Visual decoder LSTM size")
    cnn_filters: Tuple[int, int, int, int] = Field(default=(4, 8, 8, 8))
    cnn_hidden: int = Field(default=32)
    cnn_out: int = Field(default=16)
    conv_embed: int = Field(default=8, description="Image encoder conv embedding")
    conv_hidden: Tuple[int, int] = Field(
        default=(8, 16), description="Encoder Conv-LSTMs"
    )
    dec_conv_embed: int = Field(default=8)
    dec_conv_hidden: Tuple[int, int] = Field(
        default=(16, 16), description="Decoder Conv-LSTMs"
    )
    out_conv: int = Field(default=8)
    latent_channels: int = Field(default=4, description="Spatial latent channels")

    model_config = {"extra": "forbid"}

    @classmethod
    def for_profile(
        cls, profile: Profile | str, **overrides: Any
    ) -> "ModelProfileConfig":
        profile = Profile(profile)
        sizes = dict(_PAPER_SIZES) if profile is Profile.PAPER else {}
        sizes.update(overrides)
        return cls(profile=profile, **sizes)


_TASK_T_TRAIN = {TaskKind.BLOBS: 5}
_TASK_BATCH = {TaskKind.BLOBS: 4}
_TASK_MODEL = {
    TaskKind.BLOBS: ModelKind.IMAGE_SEQUENCE,
    TaskKind.FORK_MAP: ModelKind.VISUAL_TRAJECTORY,
}


class RunConfig(BaseModel):
    """
    One training/evaluation run.

    ``t_train``, ``batch`` and ``model`` may be left unset and are filled per
    task by :meth:`with_task_defaults`.
    """

    task: TaskKind = Field(default=TaskKind.FORK)
    objective: ObjectiveKind = Field(default=ObjectiveKind.BMS)
    model: Optional[ModelKind] = Field(default=None, description="Model family")
    t_train: Optional[int] = Field(default=None, description="Samples per objective")
    alpha: float = Field(default=0.5, description="Hybrid weight of the CVAE term")
    profile: Profile = Field(default=Profile.DESK)
    sizes: Optional[ModelProfileConfig] = Field(
        default=None, description="Explicit layer sizes (overrides profile)"
    )
    adam: AdamConfig = Field(default_factory=AdamConfig)
    steps: int = Field(default=2000, description="Optimizer steps")
    batch: Optional[int] = Field(default=None, description="Examples per step")
    seed: int = Field(default=0, description="Master seed")
    eval: EvalConfig = Field(default_factory=EvalConfig)
    fork: ForkSpec = Field(default_factory=ForkSpec)
    star: ForkSpec = Field(default_factory=lambda: ForkSpec(n_modes=4))
    blobs: BlobSpec = Field(default_factory=BlobSpec)
    n_train: int = Field(default=2000, description="Generated training examples")
    n_test: int = Field(default=200, description="Generated test examples")
    data_path: Optional[str] = Field(default=None, description="JSONL dataset to load")
    split_frac: float = Field(
        default=0.9, description="Train fraction of a loaded dataset"
    )
    sigma_dec: Optional[float] = Field(
        default=None, description="Decoder noise scale (task noise level when unset)"
    )
    teacher_forcing: bool = Field(
        default=False, description="Feed ground truth to decoders"
    )
    dtype: DType = Field(default=DType.FLOAT64, description="Training numeric profile")
    checkpoint_every: int = Field(
        default=200, description="Checkpoint cadence (0: final only)"
    )
    eval_every: int = Field(default=200, description="Held-out NCLL cadence (0: never)")

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_run(self, info: ValidationInfo) -> "RunConfig":
        if self.t_train is not None and self.t_train < 1:
            raise ConfigError(f"t_train must be >= 1, got {self.t_train}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.steps < 0 or self.n_train < 1 or self.n_test < 1:
            raise ConfigError("steps must be >= 0 and n_train, n_test >= 1")
        if self.batch is not None and self.batch < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")
        if self.task is TaskKind.JSONL and self.data_path is None:
            raise ConfigError("task 'jsonl' needs data_path")
        check_paths = (info.context or {}).get("check_paths", True)
        if (
            check_paths
            and self.data_path is not None
            and not Path(self.data_path).exists()
        ):
            raise ConfigError(
                f"data_path does not exist: {self.data_path}", {"path": self.data_path}
            )
        if self.model is not None:
            image_task = self.task is TaskKind.BLOBS
            if (self.model is ModelKind.IMAGE_SEQUENCE) != image_task:
                raise ConfigError(
                    f"model '{self.model.value}' cannot run task '{self.task.value}'"
                )
            if (
                self.model is ModelKind.VISUAL_TRAJECTORY
                and self.task is not TaskKind.FORK_MAP
            ):
                raise ConfigError("visual_trajectory needs task 'fork_map'")
        return self

    def with_task_defaults(self) -> "RunConfig":
        """Return a copy with task-dependent settings filled in."""
        updates: Dict[str, Any] = {}
        if self.t_train is None:
            updates["t_train"] = _TASK_T_TRAIN.get(self.task, 10)
        if self.batch is None:
            updates["batch"] = _TASK_BATCH.get(self.task, 32)
        if self.model is None:
            updates["model"] = _TASK_MODEL.get(self.task, ModelKind.TRAJECTORY)
        if self.sigma_dec is None and self.task is not TaskKind.JSONL:
            spec = self.data_spec()
            updates["sigma_dec"] = (
                spec.noise_std if isinstance(spec, ForkSpec) else IMAGE_SIGMA_DEC
            )
        return self.model_copy(update=updates)

    def data_spec(self) -> ForkSpec | BlobSpec | None:
        if self.task is TaskKind.BLOBS:
            return self.blobs
        if self.task is TaskKind.STAR:
            return self.star
        if self.task in (TaskKind.FORK, TaskKind.FORK_MAP):
            return self.fork
        return None

    def model_sizes(self) -> ModelProfileConfig:
        return self.sizes or ModelProfileConfig.for_profile(self.profile)

    def likelihood(self, evaluation: bool = False) -> LikelihoodConfig:
        return LikelihoodConfig(
            sigma_dec=self.sigma_dec or 1.0, include_normalizer=evaluation
        )


def load_run_config(
    path: Optional[str | Path] = None,
    seed: Optional[int] = None,
    profile: Optional[Profile | str] = None,
) -> RunConfig:
    """
    Load a JSON run configuration and apply overrides.

    The seed is taken from ``seed`` if given, else from the ``BMS_SEED``
    environment variable, else from the file.

    Raises:
        ConfigError: If the file is invalid or a referenced file is missing
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}", {"path": str(path)})
        data = parse_model(RunConfig, text).model_dump(exclude_unset=True)
    if seed is None and os.environ.get(SEED_ENV_VAR):
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer")
    if seed is not None:
        data["seed"] = seed
    if profile is not None:
        data["profile"] = Profile(profile)
    return parse_model(RunConfig, data).with_task_defaults()
