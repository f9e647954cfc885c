"""Normalized-performance benchmarking of the prediction methods."""

import csv
import hashlib
import logging
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from app.agent.actions import ActionSpace
from app.agent.inference import LoopAgent, build_agent
from app.agent.views import Action
from app.baselines.knn import KnnModel, knn_fit, knn_predict
from app.baselines.oracle import best_action, label_programs, measured_time, random_search
from app.baselines.supervised import SupervisedNet, supervised_fit, supervised_predict
from app.baselines.tree import TreeModel, tree_fit, tree_predict
from app.baselines.views import LabeledVector, OracleLabel
from app.config import LOGGER_NAME
from app.env.environment import Environment
from app.errors import MissingModelError, MissingOracleResultError
from app.loop_ir.views import LoopNest
from app.report.constants import (
    BENCH_CSV_FILE,
    BENCH_JSON_FILE,
    CURVE_CSV_FILE,
    METHOD_BASELINE,
    METHOD_BRUTEFORCE,
    METHOD_KNN,
    METHOD_RANDOM,
    METHOD_RL,
    METHOD_SUPERVISED,
    METHOD_TREE,
)
from app.report.training import train
from app.report.views import BenchReport, CurvePoint, ProgramResult
from app.run_config import RunConfig
from app.timing import timing_decorator

logger = logging.getLogger(LOGGER_NAME)

Predictor = Callable[[str, LoopNest], Action]


def geomean(values: Sequence[float]) -> float:
    """Geometric mean of positive values."""
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0 or np.any(array <= 0):
        raise ValueError("geomean needs a non-empty sequence of positive values")
    return float(np.exp(np.mean(np.log(array))))


def program_seed(seed: int, program_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{program_id}".encode("utf-8")).hexdigest()
    return int(digest[:8], 16)


def rl_predictor(agent: LoopAgent, env: Environment, best_of: int = 1, seed: int = 0) -> Predictor:
    """Greedy action, or the fastest of the greedy and best_of - 1 sampled candidates."""

    def predict(program_id: str, nest: LoopNest) -> Action:
        if best_of <= 1:
            return agent.greedy(nest)
        rng = np.random.default_rng(program_seed(seed, program_id))
        candidates = agent.candidates(nest, best_of, rng)
        measurements = env.evaluate_many([(nest, action) for action in candidates])
        return best_action(candidates, [measured_time(m) for m in measurements])

    return predict


def make_predictors(
    methods: Sequence[str],
    env: Environment,
    space: ActionSpace,
    agent: Optional[LoopAgent] = None,
    labels: Optional[Mapping[str, OracleLabel]] = None,
    knn_model: Optional[KnnModel] = None,
    tree_model: Optional[TreeModel] = None,
    supervised_net: Optional[SupervisedNet] = None,
    random_trials: int = 1,
    best_of: int = 1,
    seed: int = 0,
) -> Dict[str, Predictor]:
    """
    Raises:
        MissingModelError: a method lacks its model, agent or labels
    """

    def require(method: str, thing: object, what: str) -> None:
        if thing is None:
            raise MissingModelError(detail=f"Method {method!r} needs {what}", context={"method": method})

    def from_labels(program_id: str, nest: LoopNest) -> Action:
        if program_id not in labels:
            raise MissingModelError(detail=f"No oracle label for {program_id}", context={"method": METHOD_BRUTEFORCE})
        return labels[program_id].action(space)

    predictors: Dict[str, Predictor] = {}
    for method in methods:
        if method == METHOD_BASELINE:
            continue
        if method == METHOD_RL:
            require(method, agent, "a trained checkpoint")
            predictors[method] = rl_predictor(agent, env, best_of, seed)
        elif method == METHOD_BRUTEFORCE:
            require(method, labels, "oracle labels")
            predictors[method] = from_labels
        elif method == METHOD_RANDOM:
            predictors[method] = lambda pid, nest: random_search(
                nest, space, env, random_trials, program_seed(seed, pid)
            )
        elif method == METHOD_KNN:
            require(method, knn_model, "a fitted kNN model")
            require(method, agent, "the checkpoint embedding")
            predictors[method] = lambda pid, nest: knn_predict(knn_model, agent.vector(nest))
        elif method == METHOD_TREE:
            require(method, tree_model, "a fitted tree")
            require(method, agent, "the checkpoint embedding")
            predictors[method] = lambda pid, nest: tree_predict(tree_model, agent.vector(nest))
        elif method == METHOD_SUPERVISED:
            require(method, supervised_net, "a trained supervised network")
            require(method, agent, "the checkpoint embedding")
            predictors[method] = lambda pid, nest: supervised_predict(supervised_net, agent.vector(nest))
        else:
            raise MissingModelError(detail=f"Unknown method {method!r}", context={"method": method})
    return predictors


@timing_decorator
def bench(
    nests: Mapping[str, LoopNest],
    methods: Sequence[str],
    predictors: Mapping[str, Predictor],
    env: Environment,
) -> BenchReport:
    """
    Evaluate each method's chosen action once per program.

    The baseline method is the unmodified compile and is 1.0 by definition;
    every other value is candidate time over baseline time.
    """
    methods = list(methods)
    programs: List[ProgramResult] = []
    for program_id in sorted(nests):
        nest = nests[program_id]
        normalized: Dict[str, float] = {}
        for method in methods:
            if method == METHOD_BASELINE:
                normalized[method] = 1.0
                continue
            measurement = env.evaluate(nest, predictors[method](program_id, nest))
            normalized[method] = measurement.t_candidate / measurement.t_baseline
        programs.append(ProgramResult(program_id=program_id, normalized=normalized))

    means = {
        method: 1.0 if method == METHOD_BASELINE else geomean([p.normalized[method] for p in programs])
        for method in methods
    }
    for method in methods:
        logger.info("%-10s geomean normalized time %.4f", method, means[method])
    return BenchReport(methods=methods, programs=programs, geomean=means)


def _labeled_vectors(agent: LoopAgent, nests: Mapping[str, LoopNest], labels: Sequence[OracleLabel]) -> List[LabeledVector]:
    space = agent.action_space
    return [
        LabeledVector(label.program_id, agent.vector(nests[label.program_id]), label.action(space).index)
        for label in labels
    ]


def fit_baselines(
    methods: Sequence[str],
    agent: LoopAgent,
    train_nests: Mapping[str, LoopNest],
    labels: Mapping[str, OracleLabel],
    config: RunConfig,
) -> Dict[str, object]:
    """
    Fit the requested embedding-based baselines on the labeled training programs.

    Returns a dict from method name to fitted model; only knn, tree and
    supervised are fitted.

    Raises:
        MissingOracleResultError: a training program has no label
    """
    wanted = [m for m in methods if m in (METHOD_KNN, METHOD_TREE, METHOD_SUPERVISED)]
    if not wanted:
        return {}
    missing = [pid for pid in sorted(train_nests) if pid not in labels]
    if missing:
        raise MissingOracleResultError(
            detail=f"{len(missing)} training programs have no oracle label",
            context={"missing": missing[:10]},
        )
    space = agent.action_space
    pairs = _labeled_vectors(agent, train_nests, [labels[pid] for pid in sorted(train_nests)])
    models: Dict[str, object] = {}
    if METHOD_KNN in wanted:
        models[METHOD_KNN] = knn_fit(pairs, space, config.baselines.k)
    if METHOD_TREE in wanted:
        models[METHOD_TREE] = tree_fit(
            pairs, space, config.baselines.tree_max_depth, config.baselines.tree_min_leaf
        )
    if METHOD_SUPERVISED in wanted:
        models[METHOD_SUPERVISED] = supervised_fit(pairs, space, config.supervised)
    logger.info("Fitted %s on %d labeled programs", ", ".join(models), len(pairs))
    return models


@timing_decorator
def efficiency_curve(
    train_nests: Mapping[str, LoopNest],
    test_nests: Mapping[str, LoopNest],
    env: Environment,
    config: RunConfig,
    budgets: Optional[Sequence[int]] = None,
) -> List[CurvePoint]:
    """
    Test-split geomean of RL and the supervised FCNN at matched compilation budgets.

    For budget B, RL trains for B episodes (one compilation each); the FCNN is
    trained on brute-force labels of B // |grid| programs, which cost that many
    times |grid| compilations. Both start from the same freshly initialized
    embedding; the FCNN consumes it frozen.
    """
    budgets = list(budgets if budgets is not None else config.bench.curve_budgets)
    program_ids = sorted(train_nests)
    order = np.random.default_rng(config.seed).permutation(len(program_ids))
    points: List[CurvePoint] = []
    for budget in budgets:
        agent = build_agent(train_nests.values(), config.embedding, config.action_space, config.ppo)
        space = agent.action_space

        labeled = max(1, min(len(program_ids), budget // len(space)))
        subset = {program_ids[int(i)]: train_nests[program_ids[int(i)]] for i in order[:labeled]}
        labels = label_programs(subset, space, env)
        net = supervised_fit(_labeled_vectors(agent, subset, labels), space, config.supervised)
        supervised_means = geomean(
            [_normalized(env, nest, supervised_predict(net, agent.vector(nest))) for nest in _ordered(test_nests)]
        )
        points.append(CurvePoint(
            method=METHOD_SUPERVISED, budget=budget, compilations=labeled * len(space), geomean=supervised_means
        ))

        train(agent, train_nests, env, config.ppo, budget)
        rl_means = geomean([_normalized(env, nest, agent.greedy(nest)) for nest in _ordered(test_nests)])
        points.append(CurvePoint(method=METHOD_RL, budget=budget, compilations=budget, geomean=rl_means))
        logger.info("Budget %d: rl=%.4f supervised=%.4f", budget, rl_means, supervised_means)
    return points


def _ordered(nests: Mapping[str, LoopNest]) -> List[LoopNest]:
    return [nests[program_id] for program_id in sorted(nests)]


def _normalized(env: Environment, nest: LoopNest, action: Action) -> float:
    measurement = env.evaluate(nest, action)
    return measurement.t_candidate / measurement.t_baseline


def _cell(value: object) -> object:
    return repr(value) if isinstance(value, float) else value


def write_bench(report: BenchReport, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """bench.csv (one row per program plus a geomean row) and bench.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / BENCH_CSV_FILE
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["program_id", *report.methods])
        for program in report.programs:
            writer.writerow([program.program_id, *(_cell(program.normalized[m]) for m in report.methods)])
        writer.writerow(["geomean", *(_cell(report.geomean[m]) for m in report.methods)])
    json_path = out_dir / BENCH_JSON_FILE
    json_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    if report.curve:
        write_curve(report.curve, out_dir / CURVE_CSV_FILE)
    return csv_path, json_path


def write_curve(points: Sequence[CurvePoint], path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(CurvePoint.model_fields))
        for point in points:
            writer.writerow([_cell(value) for value in point.model_dump().values()])
    return path
