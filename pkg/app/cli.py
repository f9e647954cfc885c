"""
Command line for the loop vectorization toolkit.

    python -m app [--config FILE] [--seed S] [--backend sim|clang] [--workers N] [--run-dir DIR] <verb> ...

Every verb merges a summary of what it did into <run dir>/run.json. Logs go
to stderr; stdout carries command output only.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

from app.agent.actions import ActionSpace
from app.agent.inference import LoopAgent, build_agent, load_agent
from app.baselines.constants import LABELS_FILE
from app.baselines.oracle import label_programs, read_labels, write_labels
from app.baselines.persistence import save_model
from app.config import CHECKPOINT_PATH, LOG_LEVEL, LOGGER_NAME, RUN_DIR
from app.datasetgen.constants import DEFAULT_REPS, DEFAULT_TRAIN_FRACTION, MANIFEST_FILE, SPLIT_TEST, SPLIT_TRAIN
from app.datasetgen.generator import generate, load_manifest, load_nests
from app.datasetgen.report import report_optimum_distribution
from app.datasetgen.templates import select_templates
from app.env.environment import Environment
from app.errors import BaseError, ConfigurationError, InvalidFactorError, UnknownTemplateError
from app.logging_setup import setup_logging
from app.loop_ir.nests import load_program, select_nests
from app.report.bench import bench, efficiency_curve, fit_baselines, make_predictors, rl_predictor, write_bench
from app.report.constants import (
    ALL_METHODS,
    CHECKPOINT_FILE,
    METHOD_KNN,
    METHOD_RL,
    METHOD_SUPERVISED,
    METHOD_TREE,
    TRAINING_LOG_FILE,
)
from app.report.summary import load_bench, summarize, write_run_summary, write_summary
from app.report.training import train
from app.report.views import RunSummary
from app.rewriter.pragma import PragmaDirective, inject_many, remove
from app.run_config import RunConfig, load_run_config

logger = logging.getLogger(LOGGER_NAME)

SPLIT_ALL = "all"
AGENT_METHODS = (METHOD_RL, METHOD_KNN, METHOD_TREE, METHOD_SUPERVISED)

CommandResult = Tuple[RunSummary, Path]


def _read_source(path: str) -> str:
    """File text with line endings untouched."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            return handle.read()
    except OSError as e:
        raise ConfigurationError(detail=f"Cannot read {path}: {e}", context={"path": path})


def _write_source(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _emit(payload: object, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    print(text)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")


def _summary(command: str, config: RunConfig, **kwargs) -> RunSummary:
    return RunSummary(command=command, config=config.model_dump(mode="json"), **kwargs)


def _checkpoint_path(args: argparse.Namespace) -> Path:
    if args.checkpoint:
        return Path(args.checkpoint)
    if CHECKPOINT_PATH:
        return Path(CHECKPOINT_PATH)
    return Path(args.run_dir) / CHECKPOINT_FILE


def cmd_extract(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    records = []
    for path in args.files:
        _, nests = load_program(_read_source(path), file=path, skip_functions=frozenset(args.skip_function))
        records.extend(nest.summary() for nest in nests)
    _emit(records, args.out)
    outputs = {"nests": args.out} if args.out else {}
    return _summary("extract", config, outputs=outputs, stats={"files": len(args.files), "nests": len(records)}), Path(args.run_dir)


def cmd_dataset_gen(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    try:
        templates = select_templates(args.templates or ())
    except UnknownTemplateError as e:
        raise ConfigurationError(detail=e.detail, context=e.context)
    out = Path(args.out or args.run_dir)
    manifest = generate(
        templates,
        args.count,
        config.seed,
        out,
        train_fraction=args.train_fraction,
        reps=args.reps,
        workers=config.env.workers,
    )
    stats = {
        "programs": manifest.count,
        "train": len(manifest.split_ids(SPLIT_TRAIN)),
        "test": len(manifest.split_ids(SPLIT_TEST)),
        "duplicates": sum(1 for record in manifest.records if record.duplicate_of),
    }
    return _summary("dataset gen", config, outputs={"manifest": str(out / MANIFEST_FILE)}, stats=stats), out


def cmd_inject(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    source = _read_source(args.file)
    _, nests = load_program(source, file=args.file)
    selected = select_nests(nests, args.nest)

    if args.remove:
        # back to front; nest indices survive pragma removal
        for index in sorted(selected, reverse=True):
            _, current = load_program(source, file=args.file)
            source = remove(source, current[index])
    else:
        if args.vf is None or args.if_ is None:
            raise ConfigurationError(detail="inject needs --vf and --if unless --remove is given")
        try:
            directive = PragmaDirective(args.vf, args.if_)
        except InvalidFactorError as e:
            raise ConfigurationError(detail=e.detail, context=e.context)
        source = inject_many(source, [(nests[index], directive) for index in selected])

    if args.out:
        _write_source(args.out, source)
    else:
        sys.stdout.write(source)
    outputs = {"source": args.out} if args.out else {}
    stats = {"nests": [nests[index].nest_id for index in selected], "removed": args.remove}
    return _summary("inject", config, outputs=outputs, stats=stats), Path(args.run_dir)


def cmd_bruteforce(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    manifest = load_manifest(args.dataset)
    nests = load_nests(manifest, args.dataset, None if args.split == SPLIT_ALL else args.split)
    space = ActionSpace.from_config(config.action_space)
    env = Environment.from_config(config.env)
    labels = label_programs(nests, space, env)

    run_dir = Path(args.run_dir)
    path = write_labels(run_dir / LABELS_FILE, labels)
    stats: Dict[str, object] = {"programs": len(labels), "grid": len(space)}
    if args.split == SPLIT_ALL:
        histogram = report_optimum_distribution(manifest, {label.program_id: label for label in labels}, space)
        stats.update(mode_vf=histogram.mode_vf, mode_if=histogram.mode_if)
    return _summary("bruteforce", config, outputs={"labels": str(path)}, stats=stats), run_dir


def cmd_train(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    manifest = load_manifest(args.dataset)
    nests = load_nests(manifest, args.dataset, SPLIT_TRAIN)
    steps = args.steps if args.steps is not None else config.train_steps
    if steps < 0:
        raise ConfigurationError(detail=f"steps must be non-negative, got {steps}")

    agent = build_agent(nests.values(), config.embedding, config.action_space, config.ppo)
    env = Environment.from_config(config.env)
    run_dir = Path(args.run_dir)
    log_path = run_dir / TRAINING_LOG_FILE
    rows = train(agent, nests, env, config.ppo, steps, log_path)
    checkpoint = agent.save(run_dir / CHECKPOINT_FILE, config.model_dump(mode="json"))

    stats = {
        "steps": steps,
        "batches": len(rows),
        "final_reward_mean": rows[-1].reward_mean if rows else None,
    }
    outputs = {"checkpoint": str(checkpoint), "training_log": str(log_path)}
    return _summary("train", config, outputs=outputs, stats=stats), run_dir


def cmd_predict(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    agent = load_agent(_checkpoint_path(args))
    best_of = args.best_of if args.best_of is not None else config.bench.best_of
    # measuring candidates is only needed for best-of inference
    env = Environment.from_config(config.env) if best_of > 1 else None
    predictor = rl_predictor(agent, env, best_of, config.seed)

    predictions = []
    for path in args.files:
        source = _read_source(path)
        _, nests = load_program(source, file=path, skip_functions=frozenset(args.skip_function))
        chosen = [(nest, predictor(nest.nest_id, nest)) for nest in nests]
        predictions.extend(
            {"file": path, "nest_id": nest.nest_id, "line": nest.line, "vf": action.vf, "if": action.if_}
            for nest, action in chosen
        )
        if args.write and chosen:
            _write_source(path, inject_many(source, [(nest, PragmaDirective(a.vf, a.if_)) for nest, a in chosen]))
            logger.info("Rewrote %s with %d pragmas", path, len(chosen))
    _emit(predictions, args.out)
    outputs = {"predictions": args.out} if args.out else {}
    stats = {"files": len(args.files), "nests": len(predictions), "best_of": best_of, "written": args.write}
    return _summary("predict", config, outputs=outputs, stats=stats), Path(args.run_dir)


def _load_bench_agent(args: argparse.Namespace, methods: Sequence[str]) -> Optional[LoopAgent]:
    if not any(method in AGENT_METHODS for method in methods):
        return None
    path = _checkpoint_path(args)
    if not path.exists():
        logger.warning("No checkpoint at %s", path)
        return None
    return load_agent(path)


def cmd_bench(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    manifest = load_manifest(args.dataset)
    test_nests = load_nests(manifest, args.dataset, SPLIT_TEST)
    methods = list(args.methods or config.bench.methods)
    best_of = args.best_of if args.best_of is not None else config.bench.best_of
    run_dir = Path(args.run_dir)

    env = Environment.from_config(config.env)
    agent = _load_bench_agent(args, methods)
    space = agent.action_space if agent is not None else ActionSpace.from_config(config.action_space)
    labels_path = Path(args.labels) if args.labels else run_dir / LABELS_FILE
    labels = read_labels(labels_path) if labels_path.exists() else None

    outputs: Dict[str, str] = {}
    train_nests = None
    models: Dict[str, object] = {}
    if agent is not None and any(method in (METHOD_KNN, METHOD_TREE, METHOD_SUPERVISED) for method in methods):
        train_nests = load_nests(manifest, args.dataset, SPLIT_TRAIN)
        models = fit_baselines(methods, agent, train_nests, labels or {}, config)
        for method, model in models.items():
            outputs[f"{method}_model"] = str(save_model(run_dir / f"{method}.json", model))

    predictors = make_predictors(
        methods,
        env,
        space,
        agent=agent,
        labels=labels,
        knn_model=models.get(METHOD_KNN),
        tree_model=models.get(METHOD_TREE),
        supervised_net=models.get(METHOD_SUPERVISED),
        random_trials=config.baselines.random_trials,
        best_of=best_of,
        seed=config.seed,
    )
    report = bench(test_nests, methods, predictors, env)

    if args.curve:
        if train_nests is None:
            train_nests = load_nests(manifest, args.dataset, SPLIT_TRAIN)
        curve = efficiency_curve(train_nests, test_nests, env, config, args.budgets or None)
        report = report.model_copy(update={"curve": curve})

    csv_path, json_path = write_bench(report, run_dir)
    outputs.update(bench_csv=str(csv_path), bench_json=str(json_path))
    return _summary("bench", config, outputs=outputs, stats={"programs": len(test_nests), "geomean": report.geomean}), run_dir


def cmd_report(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    run_dir = Path(args.run_dir)
    reports = [load_bench(path) for path in (args.bench or [run_dir])]
    summaries = summarize(reports)

    histogram = None
    if args.labels and args.dataset:
        histogram = report_optimum_distribution(
            load_manifest(args.dataset), read_labels(args.labels), ActionSpace.from_config(config.action_space)
        )
    outputs = write_summary(summaries, run_dir, histogram)
    sys.stdout.write(Path(outputs["summary_md"]).read_text(encoding="utf-8"))
    stats = {"reports": len(reports), "methods": [s.method for s in summaries]}
    return _summary("report", config, outputs=outputs, stats=stats), run_dir


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    """Global flags; subcommand copies use SUPPRESS so they only override when given."""

    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--config", default=default(None), help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=default(None), help="Seed for every stochastic component")
    parser.add_argument("--backend", choices=("sim", "clang"), default=default(None), help="Measurement backend")
    parser.add_argument("--workers", type=int, default=default(None), help="Concurrent measurements")
    parser.add_argument("--run-dir", default=default(RUN_DIR), help="Directory for outputs and run.json")
    parser.add_argument("--log-level", default=default(LOG_LEVEL), help="Logging level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopvec", description="Learned loop vectorization factors.")
    _add_global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)
    verbs = parser.add_subparsers(dest="verb", required=True)

    extract = verbs.add_parser("extract", parents=[common], help="List the loop nests of C files")
    extract.add_argument("files", nargs="+")
    extract.add_argument("--skip-function", action="append", default=[], help="Ignore loops in this function")
    extract.add_argument("--out", help="Also write the JSON here")
    extract.set_defaults(func=cmd_extract)

    dataset = verbs.add_parser("dataset", help="Synthetic corpus commands")
    dataset_verbs = dataset.add_subparsers(dest="dataset_verb", required=True)
    gen = dataset_verbs.add_parser("gen", parents=[common], help="Generate a corpus of loop programs")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--out", help="Corpus directory (defaults to the run directory)")
    gen.add_argument("--templates", nargs="*", help="Template ids to cycle through")
    gen.add_argument("--train-fraction", type=float, default=DEFAULT_TRAIN_FRACTION)
    gen.add_argument("--reps", type=int, default=DEFAULT_REPS, help="Timing repetitions in each program's driver")
    gen.set_defaults(func=cmd_dataset_gen)

    inject = verbs.add_parser("inject", parents=[common], help="Insert or remove vectorization pragmas")
    inject.add_argument("file")
    inject.add_argument("--vf", type=int)
    inject.add_argument("--if", dest="if_", type=int)
    inject.add_argument("--nest", help="Nest index or id; every nest when omitted")
    inject.add_argument("--remove", action="store_true", help="Remove previously injected pragmas")
    inject.add_argument("--out", help="Write here instead of stdout")
    inject.set_defaults(func=cmd_inject)

    bruteforce = verbs.add_parser("bruteforce", parents=[common], help="Label programs with their optimal action")
    bruteforce.add_argument("--dataset", required=True)
    bruteforce.add_argument("--split", choices=(SPLIT_ALL, SPLIT_TRAIN, SPLIT_TEST), default=SPLIT_ALL)
    bruteforce.set_defaults(func=cmd_bruteforce)

    train_parser = verbs.add_parser("train", parents=[common], help="Train the PPO agent on the train split")
    train_parser.add_argument("--dataset", required=True)
    train_parser.add_argument("--steps", type=int)
    train_parser.set_defaults(func=cmd_train)

    predict = verbs.add_parser("predict", parents=[common], help="Predict (VF, IF) for every loop nest")
    predict.add_argument("files", nargs="+")
    predict.add_argument("--checkpoint")
    predict.add_argument("--best-of", type=int, help="Measure this many candidates and keep the fastest")
    predict.add_argument("--write", action="store_true", help="Inject the predicted pragmas in place")
    predict.add_argument("--skip-function", action="append", default=[])
    predict.add_argument("--out")
    predict.set_defaults(func=cmd_predict)

    bench_parser = verbs.add_parser("bench", parents=[common], help="Benchmark methods on the test split")
    bench_parser.add_argument("--dataset", required=True)
    bench_parser.add_argument("--methods", nargs="+", choices=ALL_METHODS)
    bench_parser.add_argument("--checkpoint")
    bench_parser.add_argument("--labels", help="Oracle labels (defaults to the run directory's)")
    bench_parser.add_argument("--best-of", type=int)
    bench_parser.add_argument("--curve", action="store_true", help="Also compute the sample-efficiency curve")
    bench_parser.add_argument("--budgets", type=int, nargs="+")
    bench_parser.set_defaults(func=cmd_bench)

    report = verbs.add_parser("report", parents=[common], help="Summarize bench reports")
    report.add_argument("bench", nargs="*", help="bench.json files or run directories")
    report.add_argument("--labels")
    report.add_argument("--dataset")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(level=args.log_level, stream=sys.stderr)
    command = args.verb if args.verb != "dataset" else f"dataset {args.dataset_verb}"
    try:
        config = load_run_config(args.config, args.seed, args.backend, args.workers)
        summary, run_dir = args.func(args, config)
        path = write_run_summary(run_dir, summary)
        logger.info("%s finished; summary in %s", command, path)
    except BaseError as e:
        logger.error("%s failed: %s", command, e.detail)
        print(f"{e.error_code}: {e.detail}", file=sys.stderr)
        return 1
    return 0
