"""Brute-force oracle and random search over the (VF, IF) grid."""

import json
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from app.agent.actions import ActionSpace
from app.agent.views import Action
from app.baselines.views import OracleLabel, grid_key
from app.config import LOGGER_NAME
from app.env.environment import Environment
from app.env.views import CompileStatus, Measurement
from app.errors import ConfigurationError, DatasetError, MeasurementError
from app.loop_ir.views import LoopNest
from app.timing import timing_decorator

logger = logging.getLogger(LOGGER_NAME)


def measured_time(measurement: Measurement) -> float:
    """Candidate time of a successful measurement, +inf otherwise."""
    if measurement.compile_status != CompileStatus.OK:
        return math.inf
    return measurement.t_candidate


def best_action(actions: Sequence[Action], times: Sequence[float]) -> Action:
    """Fastest action; ties go to the smaller VF, then the smaller IF."""
    ranked = min(zip(actions, times), key=lambda pair: (pair[1], pair[0].vf, pair[0].if_))
    return ranked[0]


def brute_force(
    nest: LoopNest, space: ActionSpace, env: Environment, program_id: Optional[str] = None
) -> OracleLabel:
    """
    Evaluate every grid action once and label nest with the fastest.

    Raises:
        MeasurementError: no grid cell compiled and ran
    """
    actions = space.actions()
    measurements = env.evaluate_many([(nest, action) for action in actions])
    times = [measured_time(m) for m in measurements]
    if all(math.isinf(t) for t in times):
        raise MeasurementError(
            detail=f"No grid cell of {nest.nest_id} compiled and ran",
            context={"nest_id": nest.nest_id},
        )
    best = best_action(actions, times)
    grid = {
        grid_key(action.vf, action.if_): (None if math.isinf(t) else t)
        for action, t in zip(actions, times)
    }
    return OracleLabel(
        program_id=program_id or nest.nest_id,
        nest_id=nest.nest_id,
        vf=best.vf,
        if_=best.if_,
        time=min(times),
        baseline_time=env.baseline_time(nest),
        full_grid=grid,
    )


def random_search(
    nest: LoopNest, space: ActionSpace, env: Environment, trials: int, seed: int = 0
) -> Action:
    """
    Best of `trials` distinct grid cells drawn uniformly without replacement.

    With trials >= len(space) this is the brute-force result, tie-breaks included.
    """
    if trials < 1:
        raise ConfigurationError(detail=f"trials must be at least 1, got {trials}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(space))[: min(trials, len(space))]
    chosen = [space.action(int(index)) for index in order]
    measurements = env.evaluate_many([(nest, action) for action in chosen])
    return best_action(chosen, [measured_time(m) for m in measurements])


@timing_decorator
def label_programs(
    nests: Mapping[str, LoopNest], space: ActionSpace, env: Environment
) -> List[OracleLabel]:
    """Brute-force labels for every program, in program_id order."""
    labels = []
    for program_id in sorted(nests):
        labels.append(brute_force(nests[program_id], space, env, program_id))
        logger.debug("Labeled %s: VF=%d IF=%d", program_id, labels[-1].vf, labels[-1].if_)
    logger.info("Labeled %d programs over %d grid cells", len(labels), len(space))
    return labels


def write_labels(path: Union[str, Path], labels: Iterable[OracleLabel]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for label in labels:
            handle.write(label.model_dump_json(by_alias=True) + "\n")
    return path


def read_labels(path: Union[str, Path]) -> Dict[str, OracleLabel]:
    """
    Raises:
        DatasetError: missing file or a malformed line
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(detail=f"Label file {path} does not exist", context={"path": str(path)})
    labels: Dict[str, OracleLabel] = {}
    with path.open("r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                label = OracleLabel.model_validate(json.loads(line))
            except (json.JSONDecodeError, ValidationError) as e:
                raise DatasetError(
                    detail=f"Malformed label on line {number} of {path}: {e}",
                    context={"path": str(path), "line": number},
                )
            labels[label.program_id] = label
    return labels
