"""Alternating rollout / PPO update loop over the training programs."""

import csv
import logging
from pathlib import Path
from typing import List, Mapping, Optional, Union

import numpy as np

from app.agent.inference import LoopAgent
from app.agent.ppo import PpoTrainer
from app.agent.views import PpoConfig, Transition
from app.config import LOGGER_NAME
from app.env.environment import Environment
from app.errors import DatasetError
from app.loop_ir.views import LoopNest
from app.report.views import TrainingLogRow
from app.timing import timing_decorator

logger = logging.getLogger(LOGGER_NAME)

# Stream of the program sampler, distinct from the action sampler
_PROGRAM_STREAM = 1
_ACTION_STREAM = 2


class TrainingLog:
    """CSV log with one row per PPO update, flushed as it grows."""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path else None
        self.rows: List[TrainingLogRow] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("w", encoding="utf-8", newline="") as handle:
                csv.writer(handle, lineterminator="\n").writerow(TrainingLogRow.model_fields)

    def append(self, row: TrainingLogRow) -> None:
        self.rows.append(row)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8", newline="") as handle:
                csv.writer(handle, lineterminator="\n").writerow(
                    [repr(value) if isinstance(value, float) else value for value in row.model_dump().values()]
                )


@timing_decorator
def train(
    agent: LoopAgent,
    nests: Mapping[str, LoopNest],
    env: Environment,
    cfg: PpoConfig,
    steps: int,
    log_path: Optional[Union[str, Path]] = None,
) -> List[TrainingLogRow]:
    """
    Train agent for `steps` single-step episodes.

    Each batch samples programs uniformly with replacement from nests, draws
    one action per program from the current policy, measures every pair and
    runs one PPO update. The last batch is shortened so exactly `steps`
    episodes run; steps=0 leaves the agent untouched.

    Raises:
        DatasetError: no training programs
    """
    if not nests:
        raise DatasetError(detail="No training programs")
    program_ids = sorted(nests)
    trainer = PpoTrainer(agent.net, cfg, agent.embedder)
    program_rng = np.random.default_rng([cfg.seed, _PROGRAM_STREAM])
    action_rng = np.random.default_rng([cfg.seed, _ACTION_STREAM])
    log = TrainingLog(log_path)

    done = 0
    batch_number = 0
    while done < steps:
        size = min(cfg.batch_size, steps - done)
        picked = [program_ids[int(i)] for i in program_rng.integers(len(program_ids), size=size)]
        rollouts = []
        for program_id in picked:
            nest = nests[program_id]
            action, logp, value = agent.sample(nest, action_rng)
            rollouts.append((nest, action, logp, value))
        measurements = env.evaluate_many([(nest, action) for nest, action, _, _ in rollouts])

        batch = [
            Transition(
                state=agent.vector(nest),
                action=action,
                reward=measurement.reward,
                logp_old=logp,
                value_old=value,
                bag=agent.bag(nest),
            )
            for (nest, action, logp, value), measurement in zip(rollouts, measurements)
        ]
        stats = trainer.update(batch)
        done += size
        batch_number += 1

        row = TrainingLogRow(
            batch=batch_number,
            steps=done,
            reward_mean=float(np.mean([t.reward for t in batch])),
            **stats.model_dump(include={"policy_loss", "value_loss", "entropy", "clip_frac", "loss", "ratio_mean"}),
        )
        log.append(row)
        logger.info(
            "Batch %d (%d/%d steps): reward_mean=%.4f loss=%.5f clip_frac=%.3f",
            row.batch, row.steps, steps, row.reward_mean, row.loss, row.clip_frac,
        )
    return log.rows
