"""Run configuration: one JSON document aggregating every component's settings."""

import json
import logging
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, Field, ValidationError

from app.agent.views import ActionSpaceConfig, PpoConfig
from app.baselines.views import BaselineConfig, SupervisedConfig
from app.config import BACKEND, DEFAULT_SEED, LOGGER_NAME, WORKERS
from app.embedding.views import EmbeddingConfig
from app.env.views import EnvConfig
from app.errors import ConfigurationError
from app.report.constants import DEFAULT_TRAIN_STEPS
from app.report.views import BenchConfig

logger = logging.getLogger(LOGGER_NAME)


class RunConfig(BaseModel):
    seed: int = DEFAULT_SEED
    train_steps: int = Field(DEFAULT_TRAIN_STEPS, ge=0)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    action_space: ActionSpaceConfig = Field(default_factory=ActionSpaceConfig)
    ppo: PpoConfig = Field(default_factory=PpoConfig)
    env: EnvConfig = Field(default_factory=lambda: EnvConfig(backend=BACKEND, workers=WORKERS))
    supervised: SupervisedConfig = Field(default_factory=SupervisedConfig)
    baselines: BaselineConfig = Field(default_factory=BaselineConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)

    def with_seed(self, seed: int) -> "RunConfig":
        """Copy with seed propagated to every seeded component."""
        return self.model_copy(
            update={
                "seed": seed,
                "embedding": self.embedding.model_copy(update={"seed": seed}),
                "ppo": self.ppo.model_copy(update={"seed": seed}),
                "supervised": self.supervised.model_copy(update={"seed": seed}),
            }
        )


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    backend: Optional[str] = None,
    workers: Optional[int] = None,
) -> RunConfig:
    """
    Read a RunConfig from JSON (defaults when path is None) and apply overrides.

    The top-level seed is copied into the embedding, PPO and supervised configs.

    Raises:
        ConfigurationError: unreadable file or invalid values
    """
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(detail=f"Cannot read config {path}: {e}", context={"path": str(path)})
    try:
        config = RunConfig.model_validate(data)
        config = config.with_seed(seed if seed is not None else config.seed)
        if backend is not None or workers is not None:
            env = config.env.model_dump()
            if backend is not None:
                env["backend"] = backend
            if workers is not None:
                env["workers"] = workers
            config = config.model_copy(update={"env": EnvConfig.model_validate(env)})
    except ValidationError as e:
        raise ConfigurationError(
            detail=f"Invalid run configuration: {e.error_count()} errors",
            context={"errors": e.errors(include_url=False, include_input=False)},
        )
    logger.debug("Run configuration: %s", config.model_dump_json())
    return config
