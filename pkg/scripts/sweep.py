#!/usr/bin/env python
"""
Hyperparameter sweep: one `train` run per (learning rate, hidden size, batch size).

Each configuration gets its own run directory holding the config, the
training log and the checkpoint; sweep.csv collects the final reward mean
of every run.
"""
import argparse
import csv
import itertools
import json
import logging
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.cli import main as cli_main  # noqa: E402
from app.report.constants import RUN_SUMMARY_FILE  # noqa: E402
from app.run_config import RunConfig  # noqa: E402

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger("loopvec-sweep")

SWEEP_DIR = os.environ.get("LOOPVEC_SWEEP_DIR", "runs/sweep")
LEARNING_RATES = (5e-5, 1e-4, 5e-4)
HIDDEN_SIZES = ((64,), (64, 64), (128, 128))
BATCH_SIZES = (100, 500)


def run_name(lr, hidden, batch_size):
    return f"lr{lr:g}_h{'x'.join(map(str, hidden))}_b{batch_size}"


def write_config(run_dir, lr, hidden, batch_size, seed, steps):
    config = RunConfig(seed=seed, train_steps=steps)
    config = config.model_copy(
        update={"ppo": config.ppo.model_copy(update={"lr": lr, "hidden": tuple(hidden), "batch_size": batch_size})}
    )
    path = run_dir / "config.json"
    path.write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def final_reward_mean(run_dir):
    ledger = json.loads((run_dir / RUN_SUMMARY_FILE).read_text(encoding="utf-8"))
    return ledger["commands"]["train"]["stats"]["final_reward_mean"]


def main():
    parser = argparse.ArgumentParser(description="Sweep PPO hyperparameters over repeated train runs.")
    parser.add_argument("--dataset", required=True, help="Corpus directory from `dataset gen`")
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--backend", choices=("sim", "clang"), default="sim")
    parser.add_argument("--out", default=SWEEP_DIR)
    args = parser.parse_args()

    out = Path(args.out)
    rows = []
    for lr, hidden, batch_size in itertools.product(LEARNING_RATES, HIDDEN_SIZES, BATCH_SIZES):
        name = run_name(lr, hidden, batch_size)
        run_dir = out / name
        run_dir.mkdir(parents=True, exist_ok=True)
        config_path = write_config(run_dir, lr, hidden, batch_size, args.seed, args.steps)
        logger.info("Starting run %s", name)
        status = cli_main([
            "--config", str(config_path),
            "--backend", args.backend,
            "--run-dir", str(run_dir),
            "train", "--dataset", args.dataset,
        ])
        if status != 0:
            logger.error("Run %s failed with status %d", name, status)
            rows.append([name, lr, "x".join(map(str, hidden)), batch_size, ""])
            continue
        rows.append([name, lr, "x".join(map(str, hidden)), batch_size, repr(final_reward_mean(run_dir))])

    with (out / "sweep.csv").open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["run", "lr", "hidden", "batch_size", "final_reward_mean"])
        writer.writerows(rows)
    logger.info("Sweep of %d runs written to %s", len(rows), out)


if __name__ == "__main__":
    main()
