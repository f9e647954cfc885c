import json

import numpy as np
import pytest

from app.agent import checkpoint
from app.agent.actions import ActionSpace
from app.agent.inference import LoopAgent, build_agent, load_agent
from app.agent.policy import PolicyNet, act
from app.agent.ppo import PpoTrainer, clipped_surrogate, loss_and_grads, normalized_advantages, ppo_update
from app.agent.views import ActionSpaceConfig, PpoConfig, Transition
from app.embedding.contexts import bag_for_snippet
from app.embedding.network import EmbeddingNet
from app.embedding.views import EmbeddingConfig
from app.embedding.vocab import TokenVocab
from app.errors import ActionOutOfRangeError, AgentError, DimMismatchError, EmptyBatchError, SchemaError

from app.tests.test_nn import numeric_grad


def _transitions(net, states, rng, rewards=None, bags=None):
    batch = []
    for i, state in enumerate(states):
        action, logp, value = act(net, state, "sample", rng)
        reward = rewards[i] if rewards is not None else float(rng.normal())
        batch.append(Transition(state, action, reward, logp, value, bags[i] if bags else None))
    return batch


def test_default_action_space():
    space = ActionSpace()
    assert len(space) == 20
    assert space.vfs == [1, 2, 4, 8, 16]
    assert space.ifs == [1, 2, 4, 8]
    assert space.action_for(4, 2).index == 9
    assert space.to_config() == ActionSpaceConfig()


def test_encode_decode_round_trip():
    space = ActionSpace(8, 4)
    for index in range(len(space)):
        assert space.encode(*space.decode(index)) == index
    with pytest.raises(ActionOutOfRangeError):
        space.decode(len(space))
    with pytest.raises(ActionOutOfRangeError):
        space.encode(0, 3)
    with pytest.raises(ActionOutOfRangeError) as excinfo:
        space.action_for(16, 1)
    assert excinfo.value.error_code == "action_out_of_range"
    assert excinfo.value.context == {"vf": 16, "if": 1}


def test_action_space_needs_powers_of_two():
    with pytest.raises(ValueError):
        ActionSpaceConfig(max_vf=12)
    with pytest.raises(ValueError):
        ActionSpaceConfig(max_if=32)


def test_greedy_takes_the_lowest_index_on_ties():
    net = PolicyNet.zeros(3, ActionSpace())
    action, logp, value = act(net, np.ones(3), "greedy")
    assert (action.index, action.vf, action.if_) == (0, 1, 1)
    assert logp == pytest.approx(-np.log(20))
    assert value == 0.0


def test_act_errors():
    net = PolicyNet.zeros(3, ActionSpace())
    with pytest.raises(AgentError):
        act(net, np.ones(3), "sample")
    with pytest.raises(AgentError):
        act(net, np.ones(3), "best", np.random.default_rng(0))
    with pytest.raises(DimMismatchError):
        act(net, np.ones(4), "greedy")


def test_sampling_is_reproducible():
    net = PolicyNet.init(np.random.default_rng(0), 5, ActionSpace(4, 2), (8,))
    state = np.linspace(-1, 1, 5)
    first = [act(net, state, "sample", np.random.default_rng(3))[0] for _ in range(5)]
    assert len(set(first)) == 1


def test_normalized_advantages():
    assert normalized_advantages(np.array([2.0]), np.array([0.5]))[0] == 1.5
    np.testing.assert_array_equal(normalized_advantages(np.ones(4), np.zeros(4)), np.zeros(4))
    advantages = normalized_advantages(np.array([1.0, 2.0, 4.0]), np.zeros(3))
    assert advantages.mean() == pytest.approx(0.0, abs=1e-12)
    assert advantages.std() == pytest.approx(1.0)


def test_clipped_surrogate():
    values = clipped_surrogate(np.array([0.5, 1.5, 1.5]), np.array([1.0, 1.0, -1.0]), 0.2)
    np.testing.assert_allclose(values, [0.5, 1.2, -1.5])


def test_first_update_has_unit_ratio(small_ppo):
    rng = np.random.default_rng(1)
    net = PolicyNet.init(np.random.default_rng(0), 6, ActionSpace(4, 2), small_ppo.hidden)
    batch = _transitions(net, rng.normal(size=(small_ppo.batch_size, 6)), rng)
    stats = PpoTrainer(net, small_ppo).update(batch)
    assert stats.ratio_mean == 1.0
    assert stats.ratio_max_dev == 0.0


def test_first_update_has_unit_ratio_with_joint_embedding(small_ppo, small_embedding, dot_nest, matmul_nest):
    agent = build_agent([dot_nest, matmul_nest], small_embedding, ActionSpaceConfig(max_vf=4, max_if=2), small_ppo)
    rng = np.random.default_rng(2)
    nests = [dot_nest, matmul_nest] * 4
    bags = [agent.bag(nest) for nest in nests]
    batch = _transitions(agent.net, [agent.vector(nest) for nest in nests], rng, bags=bags)

    before = agent.embedder.attention.copy()
    stats = PpoTrainer(agent.net, small_ppo, agent.embedder).update(batch)
    assert stats.ratio_mean == 1.0
    assert stats.ratio_max_dev == 0.0
    assert not np.array_equal(agent.embedder.attention, before)


def test_frozen_embedding_is_not_updated(small_ppo, small_embedding, dot_nest):
    agent = build_agent([dot_nest], small_embedding, ActionSpaceConfig(max_vf=4, max_if=2), small_ppo)
    frozen = small_ppo.model_copy(update={"joint_embedding": False})
    trainer = PpoTrainer(agent.net, frozen, agent.embedder)
    assert trainer.embedder is None
    assert not any(name.startswith("embedding.") for name in trainer.params())


def test_empty_batch(small_ppo):
    net = PolicyNet.zeros(3, ActionSpace(2, 2), (4,))
    with pytest.raises(EmptyBatchError):
        PpoTrainer(net, small_ppo).update([])


@pytest.mark.parametrize("seed", range(100))
def test_loss_gradients_match_finite_differences(seed):
    rng = np.random.default_rng([53, seed])
    config = EmbeddingConfig(d_tok=3, d_path=3, dim=4, path_buckets=11, seed=seed)
    snippets = ["for (i = 0; i < n; i++) s += a[i];", "for (j = 0; j < m; j++) b[j] = c[j] * 2;"]
    bags = [bag_for_snippet(snippet, config) for snippet in snippets]
    embedder = EmbeddingNet(config, TokenVocab.build(bags))
    net = PolicyNet.init(rng, 4, ActionSpace(2, 2), (int(rng.integers(2, 7)),))
    cfg = PpoConfig(entropy_coef=float(rng.uniform(0.0, 0.1)), value_coef=0.5)

    batch = _transitions(net, [embedder.forward(bag)[0] for bag in bags], rng, bags=bags)
    advantages = rng.normal(size=len(batch))

    def loss():
        return loss_and_grads(net, batch, advantages, cfg, embedder)[0]

    _, _, grads = loss_and_grads(net, batch, advantages, cfg, embedder)
    for name, param in net.params().items():
        np.testing.assert_allclose(grads[name], numeric_grad(loss, param), rtol=1e-4, atol=1e-7, err_msg=name)
    for name, param in embedder.params().items():
        np.testing.assert_allclose(
            grads[f"embedding.{name}"], numeric_grad(loss, param), rtol=1e-4, atol=1e-7, err_msg=name
        )


@pytest.mark.parametrize("seed", range(10))
def test_two_armed_bandit_converges(seed):
    space = ActionSpace(1, 2)
    cfg = PpoConfig(lr=0.05, batch_size=32, epochs_per_batch=4, entropy_coef=0.0, hidden=(8,), seed=seed)
    net = PolicyNet.init(np.random.default_rng(seed), 3, space, cfg.hidden)
    trainer = PpoTrainer(net, cfg)
    state = np.random.default_rng(100 + seed).normal(size=3)
    rng = np.random.default_rng(200 + seed)

    for _ in range(200):
        batch = []
        for _ in range(cfg.batch_size):
            action, logp, value = act(net, state, "sample", rng)
            batch.append(Transition(state, action, 1.0 if action.index == 0 else -1.0, logp, value))
        stats = ppo_update(trainer, batch)
        assert stats["ratio_mean"] == 1.0
        assert stats["ratio_max_dev"] == 0.0
        assert stats["first_clip_frac"] == 0.0

    assert set(stats) >= {"policy_loss", "value_loss", "entropy", "clip_frac", "loss"}
    assert net.distribution(state)[0] > 0.99
    assert act(net, state, "greedy")[0].index == 0


def test_checkpoint_round_trip_is_exact(small_ppo, small_embedding, dot_nest):
    agent = build_agent([dot_nest], small_embedding, ActionSpaceConfig(max_vf=4, max_if=2), small_ppo)
    text = checkpoint.dumps(agent.net, agent.embedder, {"seed": 0})
    net, embedder = checkpoint.loads(text)

    assert checkpoint.dumps(net, embedder, {"seed": 0}) == text
    assert net.action_space == agent.action_space
    assert embedder.vocab.tokens == agent.embedder.vocab.tokens
    for name, value in agent.net.params().items():
        assert net.params()[name].tobytes() == value.tobytes()


def test_loads_rejects_bad_documents(small_ppo, dot_nest, small_embedding):
    with pytest.raises(SchemaError):
        checkpoint.loads("{not json")
    with pytest.raises(SchemaError):
        checkpoint.loads(json.dumps({"policy": 1}))

    agent = build_agent([dot_nest], small_embedding, ActionSpaceConfig(max_vf=4, max_if=2), small_ppo)
    document = json.loads(checkpoint.dumps(agent.net, agent.embedder))
    document["format_version"] = 99
    with pytest.raises(SchemaError):
        checkpoint.loads(json.dumps(document))

    document = json.loads(checkpoint.dumps(agent.net, agent.embedder))
    document["action_space"]["max_vf"] = 8
    with pytest.raises(SchemaError):
        checkpoint.loads(json.dumps(document))


def test_load_agent_needs_an_embedding(tmp_path):
    net = PolicyNet.zeros(3, ActionSpace(2, 2), (4,))
    path = checkpoint.save(tmp_path / "policy.json", net)
    with pytest.raises(SchemaError):
        load_agent(path)
    with pytest.raises(SchemaError):
        load_agent(tmp_path / "missing.json")


def test_saved_agent_predicts_the_same(tmp_path, small_ppo, small_embedding, dot_nest, matmul_nest):
    agent = build_agent([dot_nest], small_embedding, ActionSpaceConfig(max_vf=4, max_if=2), small_ppo)
    path = agent.save(tmp_path / "models" / "agent.json", {"seed": 0})
    loaded = load_agent(path)

    assert isinstance(loaded, LoopAgent)
    np.testing.assert_array_equal(loaded.vector(dot_nest), agent.vector(dot_nest))
    assert loaded.greedy(matmul_nest) == agent.greedy(matmul_nest)


def test_candidates_start_with_greedy(small_ppo, small_embedding, dot_nest):
    agent = build_agent([dot_nest], small_embedding, ActionSpaceConfig(max_vf=4, max_if=2), small_ppo)
    candidates = agent.candidates(dot_nest, 4, np.random.default_rng(0))
    assert candidates[0] == agent.greedy(dot_nest)
    assert 1 <= len(candidates) <= 4
    assert len(set(candidates)) == len(candidates)


def test_reloaded_policy_acts_greedily_the_same_on_random_states(tmp_path):
    net = PolicyNet.init(np.random.default_rng(11), 6, ActionSpace(16, 8), (12, 12))
    path = checkpoint.save(tmp_path / "policy.json", net)
    loaded, _ = checkpoint.load(path)

    states = np.random.default_rng(12).normal(scale=3.0, size=(100, 6))
    for state in states:
        assert act(loaded, state, "greedy")[0] == act(net, state, "greedy")[0]
        np.testing.assert_array_equal(loaded.distribution(state), net.distribution(state))
