"""
End-to-end properties of the whole pipeline on the simulated backend.

The near-oracle run trains on 1,000 programs and only runs with LOOPVEC_SLOW_TESTS=1.
"""

import json

import pytest

from app.agent.actions import ActionSpace
from app.cli import main
from app.config import SLOW_TESTS
from app.datasetgen.generator import program_nests
from app.rewriter.pragma import PragmaDirective, inject, remove


@pytest.fixture
def config_file(tmp_path, small_config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(small_config.model_dump(mode="json")))
    return path


def _shape(nests):
    return [(nest.depth, nest.function) for nest in nests]


def test_every_action_round_trips_on_the_corpus(tiny_corpus):
    out, manifest = tiny_corpus
    space = ActionSpace()
    for record in manifest.records:
        source = (out / record.path).read_text()
        nests = program_nests(source, record.path)
        for nest in nests:
            for action in space.actions():
                injected = inject(source, nest, PragmaDirective(action.vf, action.if_))
                assert remove(injected, nest) == source, (record.program_id, action.index)
                assert _shape(program_nests(injected, record.path)) == _shape(nests)


def _pipeline(root, config_file):
    corpus = root / "corpus"
    run_dir = root / "run"
    flags = ["--config", str(config_file), "--backend", "sim", "--run-dir", str(run_dir)]
    gen = ["dataset", "gen", "--count", "12", "--out", str(corpus), "--reps", "1", "--train-fraction", "0.75"]
    assert main(flags + gen) == 0
    assert main(flags + ["bruteforce", "--dataset", str(corpus)]) == 0
    assert main(flags + ["train", "--dataset", str(corpus), "--steps", "48"]) == 0
    methods = ["baseline", "rl", "bruteforce", "random", "knn", "tree", "supervised"]
    assert main(flags + ["bench", "--dataset", str(corpus), "--methods", *methods]) == 0
    return run_dir


def test_pipeline_is_deterministic(tmp_path, config_file):
    first = _pipeline(tmp_path / "a", config_file)
    second = _pipeline(tmp_path / "b", config_file)

    for name in ("labels.jsonl", "checkpoint.json", "bench.json", "bench.csv", "knn.json", "tree.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


@pytest.mark.skipif(not SLOW_TESTS, reason="needs LOOPVEC_SLOW_TESTS")
def test_rl_comes_close_to_the_oracle(tmp_path):
    corpus = tmp_path / "corpus"
    run_dir = tmp_path / "run"
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"seed": 0, "baselines": {"random_trials": 1}}))
    flags = ["--config", str(config), "--backend", "sim", "--run-dir", str(run_dir)]

    assert main(flags + ["dataset", "gen", "--count", "1000", "--out", str(corpus), "--reps", "1"]) == 0
    assert main(flags + ["bruteforce", "--dataset", str(corpus)]) == 0
    assert main(flags + ["train", "--dataset", str(corpus)]) == 0
    methods = ["baseline", "rl", "bruteforce", "random", "knn"]
    assert main(flags + ["bench", "--dataset", str(corpus), "--methods", *methods]) == 0

    bench = json.loads((run_dir / "bench.json").read_text())
    geomean = bench["geomean"]
    assert len(bench["programs"]) == 200
    assert geomean["rl"] <= 1.05 * geomean["bruteforce"]
    assert geomean["rl"] <= geomean["knn"] + 0.05
    assert geomean["random"] >= geomean["rl"]
    assert geomean["random"] > geomean["bruteforce"]
