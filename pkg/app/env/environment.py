"""evaluate(): inject, compile, time and score one (nest, action) pair."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

from app.agent.views import Action
from app.config import CC_BASE_TIMEOUT, LOGGER_NAME, MEMO_SIZE
from app.env.backends import Backend, make_backend
from app.env.cache import EvalCache
from app.env.reward import reward
from app.env.views import BackendResult, CompileStatus, EnvConfig, Measurement, TimeoutPolicy
from app.errors import BaselineCompileFailedError
from app.loop_ir.views import LoopNest
from app.memo import BoundedMemo
from app.rewriter.pragma import PragmaDirective, inject

logger = logging.getLogger(LOGGER_NAME)


class BaselineTable:
    """Baseline measurements memoized per (source digest, nest)."""

    def __init__(self, maxsize: int = MEMO_SIZE):
        self._results: BoundedMemo[Tuple[str, str], BackendResult] = BoundedMemo(maxsize)

    def __len__(self) -> int:
        return len(self._results)

    def get(self, nest: LoopNest, backend: Backend) -> BackendResult:
        key = (nest.source_digest, nest.nest_id)
        return self._results.get_or_compute(key, lambda: _measure_baseline(nest, backend))


def _measure_baseline(nest: LoopNest, backend: Backend) -> BackendResult:
    timeout = None if backend.deterministic else CC_BASE_TIMEOUT
    result = backend.measure(nest, nest.source, compile_timeout=timeout)
    if result.status != CompileStatus.OK:
        raise BaselineCompileFailedError(
            detail=f"Baseline of {nest.nest_id} ended with status {result.status.value}",
            context={"nest_id": nest.nest_id, "status": result.status.value},
        )
    return result


def evaluate(
    nest: LoopNest,
    action: Action,
    backend: Backend,
    budget: Optional[TimeoutPolicy] = None,
    cache: Optional[EvalCache] = None,
    baselines: Optional[BaselineTable] = None,
) -> Measurement:
    """
    Measure nest under action and score it against the unmodified program.

    The candidate's compile time is capped at budget.multiplier times the
    baseline compile time, and its run time at the same multiple of the
    baseline run time. Timeouts and errors are charged multiplier x t_baseline.

    Raises:
        BaselineCompileFailedError: the unmodified program fails
        BackendUnavailableError: the backend cannot run
    """
    budget = budget or TimeoutPolicy()
    key = (nest.nest_id, nest.source_digest, action.vf, action.if_)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit

    base = (baselines if baselines is not None else BaselineTable()).get(nest, backend)
    source = inject(nest.source, nest, PragmaDirective(action.vf, action.if_))
    compile_timeout = budget.multiplier * base.compile_time if base.compile_time > 0 else None
    run_timeout = budget.multiplier * base.exec_time if budget.limit_runtime else None
    result = backend.measure(
        nest, source, action.vf, action.if_, compile_timeout=compile_timeout, run_timeout=run_timeout
    )

    t_baseline = base.exec_time
    if result.status == CompileStatus.OK:
        t_candidate = result.exec_time
    else:
        t_candidate = budget.multiplier * t_baseline
    measurement = Measurement(
        t_baseline=t_baseline,
        t_candidate=t_candidate,
        compile_status=result.status,
        reward=reward(t_baseline, t_candidate, result.status),
        compile_time=result.compile_time,
    )
    logger.debug(
        "%s vf=%d if=%d: %s reward=%.4f", nest.nest_id, action.vf, action.if_,
        result.status.value, measurement.reward,
    )
    if cache is not None:
        measurement = cache.put(key, measurement)
    return measurement


class Environment:
    """A backend with its timeout policy, cache and worker pool."""

    def __init__(self, backend: Backend, budget: Optional[TimeoutPolicy] = None,
                 cache: Optional[EvalCache] = None, workers: int = 1):
        self.backend = backend
        self.budget = budget or TimeoutPolicy()
        self.cache = cache if cache is not None else EvalCache()
        self.workers = max(1, workers)
        self.baselines = BaselineTable()

    @classmethod
    def from_config(cls, config: EnvConfig) -> "Environment":
        return cls(
            make_backend(config),
            TimeoutPolicy(multiplier=config.timeout_multiplier),
            EvalCache(config.cache_path),
            config.workers,
        )

    def evaluate(self, nest: LoopNest, action: Action) -> Measurement:
        return evaluate(nest, action, self.backend, self.budget, self.cache, self.baselines)

    def baseline_time(self, nest: LoopNest) -> float:
        return self.baselines.get(nest, self.backend).exec_time

    def evaluate_many(self, items: Sequence[Tuple[LoopNest, Action]]) -> List[Measurement]:
        """Results in input order; at most `workers` measurements in flight."""
        if self.workers == 1 or len(items) < 2:
            return [self.evaluate(nest, action) for nest, action in items]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(lambda item: self.evaluate(*item), items))
