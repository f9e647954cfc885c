import json
import math

import numpy as np
import pytest

from app.agent.actions import ActionSpace
from app.baselines.knn import knn_fit, knn_predict
from app.baselines.oracle import (
    best_action,
    brute_force,
    label_programs,
    measured_time,
    random_search,
    read_labels,
    write_labels,
)
from app.baselines.persistence import ModelFile, from_model_file, load_model, save_model
from app.baselines.supervised import cross_entropy, supervised_fit, supervised_predict
from app.baselines.tree import best_split, gini, tree_fit, tree_predict
from app.baselines.views import LabeledVector, SupervisedConfig, grid_key, parse_grid_key
from app.env.views import Measurement
from app.errors import (
    ConfigurationError,
    DatasetError,
    DimMismatchError,
    EmptyModelError,
    NotABaselineModelError,
    SchemaError,
)

from app.tests.test_nn import numeric_grad

SPACE = ActionSpace(16, 8)
PAIR_SPACE = ActionSpace(2, 2)


@pytest.fixture
def clusters():
    """Two well separated clusters labeled with actions 1 and 3 of PAIR_SPACE"""
    rng = np.random.default_rng(0)
    pairs = []
    for i in range(20):
        label = 1 if i % 2 else 3
        center = np.full(3, -1.0 if label == 1 else 1.0)
        pairs.append(LabeledVector(f"p{i:05d}", center + 0.1 * rng.normal(size=3), label))
    return pairs


def test_grid_key():
    assert grid_key(16, 2) == "16x2"
    assert parse_grid_key("16x2") == (16, 2)


def test_measured_time():
    ok = Measurement(t_baseline=2.0, t_candidate=1.5, compile_status="ok", reward=0.25)
    timeout = Measurement(t_baseline=2.0, t_candidate=20.0, compile_status="timeout", reward=-9.0)
    assert measured_time(ok) == 1.5
    assert measured_time(timeout) == math.inf


def test_best_action_breaks_ties_toward_small_factors():
    actions = [SPACE.action_for(2, 1), SPACE.action_for(1, 2), SPACE.action_for(1, 1)]
    assert best_action(actions, [1.0, 1.0, 1.0]) == SPACE.action_for(1, 1)
    assert best_action(actions, [0.5, 1.0, 1.0]) == SPACE.action_for(2, 1)


def test_brute_force_dot_product(dot_nest, sim_env):
    label = brute_force(dot_nest, SPACE, sim_env, "p00000")

    assert (label.program_id, label.nest_id) == ("p00000", "dot.c:7")
    assert (label.vf, label.if_) == (4, 4)
    assert label.time == pytest.approx(768e-9)
    assert label.time <= label.baseline_time
    assert len(label.full_grid) == 20
    assert label.grid_time(4, 2) == label.baseline_time
    assert label.action(SPACE) == SPACE.action_for(4, 4)


def test_brute_force_marks_timeouts(matmul_nest, sim_env):
    label = brute_force(matmul_nest, SPACE, sim_env)
    assert (label.vf, label.if_) == (1, 4)
    assert label.full_grid["16x8"] is None
    assert label.grid_time(16, 8) == math.inf
    assert label.program_id == "matmul.c:9"


def test_random_search_with_full_budget_matches_brute_force(dot_nest, matmul_nest, sim_env):
    for nest in (dot_nest, matmul_nest):
        label = brute_force(nest, SPACE, sim_env)
        assert random_search(nest, SPACE, sim_env, trials=20, seed=3) == label.action(SPACE)


def test_random_search_is_seeded(dot_nest, sim_env):
    first = random_search(dot_nest, SPACE, sim_env, trials=3, seed=9)
    assert random_search(dot_nest, SPACE, sim_env, trials=3, seed=9) == first
    with pytest.raises(ConfigurationError):
        random_search(dot_nest, SPACE, sim_env, trials=0)


def test_labels_round_trip(tmp_path, dot_nest, matmul_nest, sim_env):
    labels = label_programs({"p00001": dot_nest, "p00000": matmul_nest}, PAIR_SPACE, sim_env)
    assert [label.program_id for label in labels] == ["p00000", "p00001"]

    path = write_labels(tmp_path / "oracle" / "labels.jsonl", labels)
    first_line = json.loads(path.read_text().splitlines()[0])
    assert "if" in first_line and "if_" not in first_line

    loaded = read_labels(path)
    assert sorted(loaded) == ["p00000", "p00001"]
    assert loaded["p00001"].model_dump() == labels[1].model_dump()


def test_read_labels_errors(tmp_path):
    with pytest.raises(DatasetError):
        read_labels(tmp_path / "missing.jsonl")
    path = tmp_path / "labels.jsonl"
    path.write_text('{"program_id": "p0"}\n')
    with pytest.raises(DatasetError) as exc_info:
        read_labels(path)
    assert exc_info.value.context["line"] == 1


def test_knn_distance_ties_go_to_lower_program_id():
    pairs = [LabeledVector("p2", np.zeros(2), 2), LabeledVector("p1", np.zeros(2), 1)]
    model = knn_fit(pairs, PAIR_SPACE, k=1)
    assert model.program_ids == ["p1", "p2"]
    assert knn_predict(model, np.zeros(2)).index == 1


def test_knn_equal_distances_to_distinct_vectors_tie_on_program_id():
    pairs = [
        LabeledVector("p5", np.array([0.7, 0.1, -0.3]), 3),
        LabeledVector("p4", np.array([0.1, 0.7, -0.3]), 1),
        LabeledVector("p6", np.array([0.1, -0.3, 0.7]), 2),
    ]
    model = knn_fit(pairs, PAIR_SPACE, k=1)
    assert knn_predict(model, np.full(3, 0.2)).index == 1


def test_knn_vote_ties_go_to_the_nearest_label():
    pairs = [
        LabeledVector("a", np.array([1.0, 0.0]), 2),
        LabeledVector("b", np.array([2.0, 0.0]), 3),
    ]
    assert knn_predict(knn_fit(pairs, PAIR_SPACE, k=2), np.zeros(2)).index == 2


def test_knn_majority_vote():
    pairs = [
        LabeledVector("a", np.array([1.0]), 0),
        LabeledVector("b", np.array([3.0]), 3),
        LabeledVector("c", np.array([3.5]), 3),
        LabeledVector("d", np.array([9.0]), 0),
    ]
    model = knn_fit(pairs, PAIR_SPACE, k=3)
    assert knn_predict(model, np.array([0.0])).index == 3
    with pytest.raises(DimMismatchError):
        knn_predict(model, np.zeros(2))
    with pytest.raises(EmptyModelError):
        knn_fit([], PAIR_SPACE)


def test_gini():
    assert gini(np.array([2, 2])) == pytest.approx(0.5)
    assert gini(np.array([3, 0])) == 0.0
    assert gini(np.array([0, 0])) == 0.0


def test_best_split_picks_the_informative_feature():
    x = np.array([[5.0, 0.0], [5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])
    y = np.array([0, 0, 1, 1])
    assert best_split(x, y, 2, 1) == (1, 1.5, 0.0)
    assert best_split(x, np.array([1, 1, 1, 1]), 2, 1) is None


def test_tree_fit_and_predict():
    pairs = [LabeledVector(f"p{i}", np.array([float(i), 0.0]), 0 if i < 2 else 3) for i in range(4)]
    model = tree_fit(pairs, PAIR_SPACE)
    assert model.depth() == 1
    assert tree_predict(model, np.array([0.4, 7.0])).index == 0
    assert tree_predict(model, np.array([2.7, -1.0])).index == 3
    assert tree_fit(pairs, PAIR_SPACE, max_depth=0).depth() == 0
    with pytest.raises(DimMismatchError):
        tree_predict(model, np.zeros(3))


def test_cross_entropy_gradient():
    logits = np.random.default_rng(1).normal(size=(3, 4))
    labels = np.array([0, 3, 1])
    loss, grad = cross_entropy(logits, labels)
    assert loss > 0
    np.testing.assert_allclose(grad, numeric_grad(lambda: cross_entropy(logits, labels)[0], logits), atol=1e-8)


def test_supervised_fits_separable_clusters(clusters):
    cfg = SupervisedConfig(hidden=(8,), lr=0.05, epochs=100, batch_size=8, validation_fraction=0.2, seed=0)
    net = supervised_fit(clusters, PAIR_SPACE, cfg)

    assert len(net.history) == 100
    assert net.history[-1].heldout_accuracy is not None
    assert net.history[-1].train_accuracy >= 0.9
    assert net.history[-1].loss < net.history[0].loss
    assert supervised_predict(net, np.full(3, -1.0)).index == 1
    assert supervised_predict(net, np.full(3, 1.0)).index == 3


def test_supervised_is_deterministic(clusters):
    cfg = SupervisedConfig(hidden=(4,), epochs=3, seed=2)
    first = supervised_fit(clusters, PAIR_SPACE, cfg)
    second = supervised_fit(clusters, PAIR_SPACE, cfg)
    for name, value in first.mlp.params().items():
        np.testing.assert_array_equal(second.mlp.params()[name], value)
    with pytest.raises(EmptyModelError):
        supervised_fit([], PAIR_SPACE, cfg)


def test_models_survive_a_save_load_cycle(tmp_path, clusters):
    knn_model = knn_fit(clusters, PAIR_SPACE, k=3)
    tree_model = tree_fit(clusters, PAIR_SPACE)
    net = supervised_fit(clusters, PAIR_SPACE, SupervisedConfig(hidden=(4,), epochs=2))
    queries = [np.full(3, -1.0), np.full(3, 0.2), np.array([1.0, -1.0, 0.5])]

    loaded_knn = load_model(save_model(tmp_path / "knn.json", knn_model))
    loaded_tree = load_model(save_model(tmp_path / "tree.json", tree_model))
    loaded_net = load_model(save_model(tmp_path / "supervised.json", net))

    assert loaded_knn.program_ids == knn_model.program_ids
    assert loaded_tree.depth() == tree_model.depth()
    for query in queries:
        assert knn_predict(loaded_knn, query) == knn_predict(knn_model, query)
        assert tree_predict(loaded_tree, query) == tree_predict(tree_model, query)
        assert supervised_predict(loaded_net, query) == supervised_predict(net, query)


def test_model_file_errors(tmp_path):
    with pytest.raises(SchemaError):
        from_model_file(ModelFile(kind="knn"))
    with pytest.raises(SchemaError):
        from_model_file(ModelFile(kind="forest"))
    with pytest.raises(SchemaError):
        load_model(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    with pytest.raises(SchemaError):
        load_model(bad)
    with pytest.raises(NotABaselineModelError):
        save_model(tmp_path / "x.json", object())
