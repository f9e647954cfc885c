import json

import pytest

from app.cli import main

from app.tests.conftest import DOT_PRODUCT, TWO_LOOPS


@pytest.fixture
def dot_file(tmp_path):
    path = tmp_path / "dot.c"
    path.write_text(DOT_PRODUCT)
    return path


@pytest.fixture
def config_file(tmp_path, small_config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(small_config.model_dump(mode="json")))
    return path


def _ledger(run_dir):
    return json.loads((run_dir / "run.json").read_text())["commands"]


def test_extract(tmp_path, dot_file, capsys):
    run_dir = tmp_path / "run"
    assert main(["--run-dir", str(run_dir), "extract", str(dot_file)]) == 0

    records = json.loads(capsys.readouterr().out)
    assert len(records) == 1
    assert records[0]["nest_id"] == f"{dot_file}:7"
    assert records[0]["depth"] == 1
    assert _ledger(run_dir)["extract"]["stats"] == {"files": 1, "nests": 1}


def test_inject_and_remove_restore_the_file(tmp_path, dot_file):
    injected = tmp_path / "injected.c"
    restored = tmp_path / "restored.c"
    run_dir = str(tmp_path / "run")

    assert main(["--run-dir", run_dir, "inject", str(dot_file), "--vf", "4", "--if", "2", "--out", str(injected)]) == 0
    assert "vectorize_width(4) interleave_count(2)" in injected.read_text()

    assert main(["--run-dir", run_dir, "inject", str(injected), "--remove", "--out", str(restored)]) == 0
    assert restored.read_bytes() == dot_file.read_bytes()


def test_inject_selects_a_nest(tmp_path, capsys):
    source = tmp_path / "two.c"
    source.write_text(TWO_LOOPS)

    assert main(["--run-dir", str(tmp_path), "inject", str(source), "--vf", "8", "--if", "1", "--nest", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count("/*nv*/") == 1
    assert out.index("/*nv*/") > out.index("int j = 0;")


@pytest.mark.parametrize(
    "flags, code",
    [
        ([], "configuration_error"),
        (["--vf", "3", "--if", "1"], "configuration_error"),
        (["--vf", "4", "--if", "1", "--nest", "7"], "nest_not_found"),
        (["--remove"], "no_pragma_found"),
    ],
)
def test_inject_errors(tmp_path, dot_file, capsys, flags, code):
    assert main(["--run-dir", str(tmp_path), "inject", str(dot_file), *flags]) == 1
    assert capsys.readouterr().err.splitlines()[-1].startswith(f"{code}: ")


def test_missing_input_file(tmp_path, capsys):
    assert main(["--run-dir", str(tmp_path), "extract", str(tmp_path / "absent.c")]) == 1
    assert "configuration_error: Cannot read" in capsys.readouterr().err


def test_bad_config_file(tmp_path, dot_file, capsys):
    config = tmp_path / "config.json"
    config.write_text('{"seed": "not a number"}')
    assert main(["--config", str(config), "extract", str(dot_file)]) == 1
    assert "Invalid run configuration" in capsys.readouterr().err


def test_dataset_gen(tmp_path):
    out = tmp_path / "corpus"
    args = ["--seed", "3", "dataset", "gen", "--count", "6", "--out", str(out), "--reps", "1"]
    assert main(args + ["--templates", "reduction", "matmul", "--train-fraction", "0.5"]) == 0

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3
    summary = _ledger(out)["dataset gen"]
    assert summary["stats"]["programs"] == 6
    assert summary["stats"]["train"] + summary["stats"]["test"] == 6
    assert summary["config"]["seed"] == 3


def test_dataset_gen_unknown_template(tmp_path, capsys):
    args = ["dataset", "gen", "--count", "2", "--out", str(tmp_path), "--templates", "fft"]
    assert main(args) == 1
    assert "configuration_error" in capsys.readouterr().err


def test_end_to_end_pipeline(tmp_path, config_file, capsys):
    corpus = tmp_path / "corpus"
    run_dir = tmp_path / "run"
    flags = ["--config", str(config_file), "--backend", "sim", "--run-dir", str(run_dir)]

    gen = ["dataset", "gen", "--count", "12", "--out", str(corpus), "--reps", "1", "--train-fraction", "0.75"]
    assert main(flags + gen) == 0
    assert main(flags + ["bruteforce", "--dataset", str(corpus)]) == 0
    assert main(flags + ["train", "--dataset", str(corpus), "--steps", "32"]) == 0
    assert (run_dir / "checkpoint.json").exists()
    assert (run_dir / "labels.jsonl").exists()

    methods = ["baseline", "rl", "bruteforce", "random", "knn", "tree"]
    assert main(flags + ["bench", "--dataset", str(corpus), "--methods", *methods, "--curve", "--budgets", "20"]) == 0
    bench = json.loads((run_dir / "bench.json").read_text())
    assert bench["methods"] == methods
    assert len(bench["programs"]) == 3
    assert bench["geomean"]["baseline"] == 1.0
    assert bench["geomean"]["bruteforce"] <= 1.0
    assert (run_dir / "efficiency_curve.csv").exists()
    assert (run_dir / "knn.json").exists()

    capsys.readouterr()
    args = ["report", "--labels", str(run_dir / "labels.jsonl"), "--dataset", str(corpus)]
    assert main(flags + args) == 0
    assert "| baseline | 1.0000 | 1.000x |" in capsys.readouterr().out
    assert (run_dir / "optimum_distribution.csv").exists()

    ledger = _ledger(run_dir)
    assert sorted(ledger) == ["bench", "bruteforce", "report", "train"]
    assert ledger["bruteforce"]["stats"]["programs"] == 12
    assert ledger["bruteforce"]["stats"]["grid"] == 20
    assert ledger["train"]["stats"]["batches"] == 2
    assert ledger["train"]["config"]["embedding"]["dim"] == 16


def test_predict_writes_pragmas(tmp_path, config_file, dot_file, capsys):
    corpus = tmp_path / "corpus"
    run_dir = tmp_path / "run"
    flags = ["--config", str(config_file), "--backend", "sim", "--run-dir", str(run_dir)]
    assert main(flags + ["dataset", "gen", "--count", "4", "--out", str(corpus), "--reps", "1"]) == 0
    assert main(flags + ["train", "--dataset", str(corpus), "--steps", "16"]) == 0
    capsys.readouterr()

    checkpoint = str(run_dir / "checkpoint.json")
    assert main(flags + ["predict", str(dot_file), "--checkpoint", checkpoint, "--best-of", "3", "--write"]) == 0

    predictions = json.loads(capsys.readouterr().out)
    assert [(p["nest_id"], p["line"]) for p in predictions] == [(f"{dot_file}:7", 7)]
    prediction = predictions[0]
    pragma = f"vectorize_width({prediction['vf']}) interleave_count({prediction['if']}) /*nv*/"
    assert pragma in dot_file.read_text()
    assert _ledger(run_dir)["predict"]["stats"]["best_of"] == 3


def test_predict_without_checkpoint(tmp_path, dot_file, capsys):
    args = ["--run-dir", str(tmp_path), "predict", str(dot_file), "--checkpoint", str(tmp_path / "none.json")]
    assert main(args) == 1
    assert capsys.readouterr().err.splitlines()[-1].startswith("schema_error: ")


def test_report_without_bench(tmp_path, capsys):
    assert main(["--run-dir", str(tmp_path), "report"]) == 1
    assert "dataset_error" in capsys.readouterr().err
