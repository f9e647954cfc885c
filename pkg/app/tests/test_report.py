import csv
import json

import numpy as np
import pytest

from app.agent.actions import ActionSpace
from app.agent.inference import build_agent
from app.agent.views import ActionSpaceConfig
from app.baselines.oracle import label_programs, measured_time
from app.datasetgen.views import HistogramCell, OptimumHistogram
from app.env.backends import SimBackend
from app.env.environment import Environment
from app.errors import DatasetError, MissingModelError, MissingOracleResultError
from app.report.bench import (
    bench,
    efficiency_curve,
    fit_baselines,
    geomean,
    make_predictors,
    program_seed,
    rl_predictor,
    write_bench,
)
from app.report.summary import load_bench, summarize, write_run_summary, write_summary
from app.report.training import train
from app.report.views import BenchReport, ProgramResult, RunSummary

SPACE = ActionSpace(16, 8)


@pytest.fixture
def nests(dot_nest, matmul_nest):
    return {"p00001": dot_nest, "p00000": matmul_nest}


@pytest.fixture
def agent(nests, small_embedding, small_ppo):
    return build_agent(nests.values(), small_embedding, ActionSpaceConfig(), small_ppo)


def _report(values):
    methods = list(values)
    count = len(next(iter(values.values())))
    programs = [
        ProgramResult(program_id=f"p{i:05d}", normalized={m: values[m][i] for m in methods}) for i in range(count)
    ]
    return BenchReport(methods=methods, programs=programs, geomean={m: geomean(values[m]) for m in methods})


def test_geomean():
    assert geomean([1.0, 4.0]) == pytest.approx(2.0)
    assert geomean([0.5]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        geomean([])
    with pytest.raises(ValueError):
        geomean([1.0, 0.0])


def test_program_seed():
    assert program_seed(0, "p00001") == program_seed(0, "p00001")
    assert program_seed(0, "p00001") != program_seed(0, "p00002")
    assert program_seed(0, "p00001") != program_seed(1, "p00001")


def test_train_runs_exactly_the_requested_steps(tmp_path, agent, nests, sim_env, small_ppo):
    log_path = tmp_path / "training_log.csv"
    rows = train(agent, nests, sim_env, small_ppo, 40, log_path)

    assert [row.steps for row in rows] == [16, 32, 40]
    assert rows[0].ratio_mean == 1.0
    lines = list(csv.reader(log_path.read_text().splitlines()))
    assert lines[0][:3] == ["batch", "steps", "reward_mean"]
    assert len(lines) == 4


def test_train_is_deterministic(nests, small_embedding, small_ppo):
    first = build_agent(nests.values(), small_embedding, ActionSpaceConfig(), small_ppo)
    second = build_agent(nests.values(), small_embedding, ActionSpaceConfig(), small_ppo)
    train(first, nests, Environment(SimBackend()), small_ppo, 24)
    train(second, nests, Environment(SimBackend()), small_ppo, 24)
    for name, value in first.net.params().items():
        np.testing.assert_array_equal(second.net.params()[name], value)
    np.testing.assert_array_equal(first.embedder.attention, second.embedder.attention)


def test_train_with_zero_steps_changes_nothing(agent, nests, sim_env, small_ppo):
    before = {name: value.copy() for name, value in agent.net.params().items()}
    assert train(agent, nests, sim_env, small_ppo, 0) == []
    for name, value in agent.net.params().items():
        np.testing.assert_array_equal(value, before[name])
    with pytest.raises(DatasetError):
        train(agent, {}, sim_env, small_ppo, 10)


def test_bench_normalizes_to_the_baseline(nests, sim_env):
    labels = {label.program_id: label for label in label_programs(nests, SPACE, sim_env)}
    methods = ["baseline", "bruteforce", "random"]
    predictors = make_predictors(methods, sim_env, SPACE, labels=labels, random_trials=20)
    report = bench(nests, methods, predictors, sim_env)

    assert report.geomean["baseline"] == 1.0
    assert [p.program_id for p in report.programs] == ["p00000", "p00001"]
    for program in report.programs:
        assert program.normalized["baseline"] == 1.0
        assert program.normalized["bruteforce"] < 1.0
        assert program.normalized["random"] == program.normalized["bruteforce"]
    dot = report.programs[1].normalized["bruteforce"]
    assert dot == pytest.approx(768 / 883.2)
    assert report.geomean["bruteforce"] <= 1.0


def test_make_predictors_requires_models(sim_env, agent):
    with pytest.raises(MissingModelError):
        make_predictors(["rl"], sim_env, SPACE)
    with pytest.raises(MissingModelError):
        make_predictors(["bruteforce"], sim_env, SPACE)
    with pytest.raises(MissingModelError):
        make_predictors(["knn"], sim_env, SPACE, agent=agent)
    with pytest.raises(MissingModelError) as exc_info:
        make_predictors(["oracle"], sim_env, SPACE)
    assert exc_info.value.status_code == 423
    assert set(make_predictors(["baseline", "rl"], sim_env, SPACE, agent=agent)) == {"rl"}


def test_best_of_never_loses_to_greedy(agent, nests, sim_env):
    predict = rl_predictor(agent, sim_env, best_of=4, seed=1)
    for program_id, nest in nests.items():
        chosen = sim_env.evaluate(nest, predict(program_id, nest))
        greedy = sim_env.evaluate(nest, agent.greedy(nest))
        assert measured_time(chosen) <= measured_time(greedy)
    assert rl_predictor(agent, sim_env)("p00001", nests["p00001"]) == agent.greedy(nests["p00001"])


def test_fit_baselines(agent, nests, sim_env, small_config):
    labels = {label.program_id: label for label in label_programs(nests, agent.action_space, sim_env)}
    models = fit_baselines(["baseline", "knn", "tree", "supervised"], agent, nests, labels, small_config)
    assert set(models) == {"knn", "tree", "supervised"}
    assert len(models["knn"]) == 2

    predictors = make_predictors(
        ["knn", "tree", "supervised"], sim_env, agent.action_space, agent=agent,
        knn_model=models["knn"], tree_model=models["tree"], supervised_net=models["supervised"],
    )
    report = bench(nests, ["baseline", "knn", "tree", "supervised"], predictors, sim_env)
    assert all(value > 0 for value in report.geomean.values())

    assert fit_baselines(["rl"], agent, nests, labels, small_config) == {}
    with pytest.raises(MissingOracleResultError):
        fit_baselines(["knn"], agent, nests, {}, small_config)


def test_efficiency_curve(nests, strided_nest, sim_env, small_config):
    points = efficiency_curve(nests, {"p00002": strided_nest}, sim_env, small_config, budgets=[20])

    assert [(p.method, p.budget, p.compilations) for p in points] == [("supervised", 20, 20), ("rl", 20, 20)]
    assert all(p.geomean > 0 for p in points)


def test_write_bench_and_load(tmp_path):
    report = _report({"baseline": [1.0, 1.0], "rl": [0.5, 0.8]})
    csv_path, json_path = write_bench(report, tmp_path / "bench")

    rows = list(csv.reader(csv_path.read_text().splitlines()))
    assert rows[0] == ["program_id", "baseline", "rl"]
    assert rows[1] == ["p00000", "1.0", "0.5"]
    assert rows[-1][0] == "geomean"
    assert float(rows[-1][2]) == pytest.approx(np.sqrt(0.4))
    assert load_bench(tmp_path / "bench").model_dump() == report.model_dump()
    assert load_bench(json_path).methods == ["baseline", "rl"]
    with pytest.raises(DatasetError):
        load_bench(tmp_path / "nothing.json")


def test_summarize_pools_reports():
    first = _report({"baseline": [1.0], "bruteforce": [0.5], "rl": [0.5]})
    second = _report({"baseline": [1.0], "bruteforce": [0.5], "rl": [1.0]})
    summaries = {s.method: s for s in summarize([first, second])}

    assert list(summaries) == ["baseline", "bruteforce", "rl"]
    assert summaries["baseline"].speedup == pytest.approx(1.0)
    assert summaries["bruteforce"].gap_to_oracle == pytest.approx(0.0)
    assert summaries["rl"].geomean == pytest.approx(np.sqrt(0.5))
    assert summaries["rl"].gap_to_oracle == pytest.approx(np.sqrt(0.5) / 0.5 - 1.0)
    assert summaries["rl"].programs == 2


def test_summarize_without_oracle():
    summaries = summarize([_report({"baseline": [1.0], "rl": [0.8]})])
    assert all(s.gap_to_oracle is None for s in summaries)


def test_write_summary(tmp_path):
    summaries = summarize([_report({"baseline": [1.0], "bruteforce": [0.5]})])
    histogram = OptimumHistogram(
        total=1, cells=[HistogramCell(vf=4, if_=4, count=1, percent=100.0)], mode_vf=4, mode_if=4
    )
    outputs = write_summary(summaries, tmp_path, histogram)

    assert set(outputs) == {"summary_csv", "summary_json", "summary_md", "optimum_distribution_csv"}
    payload = json.loads((tmp_path / "summary.json").read_text())
    assert payload["optimum_distribution"]["cells"][0]["if"] == 4
    markdown = (tmp_path / "summary.md").read_text()
    assert "| bruteforce | 0.5000 | 2.000x | +0.00% | 1 |" in markdown
    assert (tmp_path / "optimum_distribution.csv").read_text().splitlines()[1] == "4,4,1,100.0"


def test_write_run_summary_merges_commands(tmp_path):
    write_run_summary(tmp_path, RunSummary(command="train", stats={"steps": 10}))
    write_run_summary(tmp_path, RunSummary(command="bench", outputs={"bench_csv": "bench.csv"}))
    write_run_summary(tmp_path, RunSummary(command="train", stats={"steps": 20}))

    ledger = json.loads((tmp_path / "run.json").read_text())
    assert sorted(ledger["commands"]) == ["bench", "train"]
    assert ledger["commands"]["train"]["stats"] == {"steps": 20}


def test_write_run_summary_replaces_unreadable_file(tmp_path):
    (tmp_path / "run.json").write_text("[1, 2]")
    write_run_summary(tmp_path, RunSummary(command="report"))
    assert list(json.loads((tmp_path / "run.json").read_text())["commands"]) == ["report"]
