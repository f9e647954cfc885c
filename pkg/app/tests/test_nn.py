import numpy as np
import pytest

from app.errors import DimMismatchError, NonFiniteError, SchemaError, UnknownActivationError
from app.nn.core import AdamState, Dense, Mlp, adam_step, log_softmax, softmax_logits_to_dist
from app.nn.serialization import EncodedArray, decode_array, decode_params, encode_array, encode_params


def numeric_grad(f, array, eps=1e-6):
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        saved = array[index]
        array[index] = saved + eps
        up = f()
        array[index] = saved - eps
        down = f()
        array[index] = saved
        grad[index] = (up - down) / (2 * eps)
    return grad


@pytest.fixture
def mlp():
    return Mlp.build(np.random.default_rng(0), [5, 4, 3], ["tanh", "identity"])


def test_dense_shapes_and_bias_check():
    layer = Dense.init(np.random.default_rng(1), 3, 2)
    assert layer.weight.shape == (2, 3)
    assert (layer.in_dim, layer.out_dim) == (3, 2)
    with pytest.raises(DimMismatchError):
        Dense(np.zeros((2, 3)), np.zeros(3))
    with pytest.raises(UnknownActivationError):
        Dense(np.zeros((2, 3)), np.zeros(2), "relu")


def test_mlp_rejects_broken_chain():
    with pytest.raises(DimMismatchError):
        Mlp([Dense.zeros(3, 4), Dense.zeros(5, 2)])


def test_mlp_gradients_match_finite_differences(mlp):
    rng = np.random.default_rng(2)
    x = rng.normal(size=5)
    upstream = rng.normal(size=3)

    def loss():
        out, _ = mlp.forward(x)
        return float(out @ upstream)

    out, caches = mlp.forward(x)
    dx, grads = mlp.backward(caches, upstream)

    for name, param in mlp.params().items():
        np.testing.assert_allclose(grads[name], numeric_grad(loss, param), rtol=1e-5, atol=1e-8)
    np.testing.assert_allclose(dx, numeric_grad(loss, x), rtol=1e-5, atol=1e-8)


def test_batched_forward_matches_single(mlp):
    batch = np.random.default_rng(3).normal(size=(4, 5))
    stacked, _ = mlp.forward(batch)
    for row, expected in zip(batch, stacked):
        single, _ = mlp.forward(row)
        np.testing.assert_allclose(single, expected)


def test_gradients_match_torch_autograd(mlp):
    torch = pytest.importorskip("torch")
    rng = np.random.default_rng(4)
    x = rng.normal(size=(6, 5))
    upstream = rng.normal(size=(6, 3))

    out, caches = mlp.forward(x)
    _, grads = mlp.backward(caches, upstream)

    w0 = torch.tensor(mlp.layers[0].weight, requires_grad=True)
    b0 = torch.tensor(mlp.layers[0].bias, requires_grad=True)
    w1 = torch.tensor(mlp.layers[1].weight, requires_grad=True)
    b1 = torch.tensor(mlp.layers[1].bias, requires_grad=True)
    hidden = torch.tanh(torch.tensor(x) @ w0.T + b0)
    result = hidden @ w1.T + b1
    (result * torch.tensor(upstream)).sum().backward()

    np.testing.assert_allclose(out, result.detach().numpy(), rtol=1e-10)
    np.testing.assert_allclose(grads["layers.0.weight"], w0.grad.numpy(), rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(grads["layers.0.bias"], b0.grad.numpy(), rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(grads["layers.1.weight"], w1.grad.numpy(), rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(grads["layers.1.bias"], b1.grad.numpy(), rtol=1e-8, atol=1e-12)


def test_softmax_is_stable_for_large_logits():
    probs = softmax_logits_to_dist(np.array([1000.0, 1000.0, -1000.0]))
    np.testing.assert_allclose(probs, [0.5, 0.5, 0.0], atol=1e-12)
    np.testing.assert_allclose(np.exp(log_softmax(np.array([1.0, 2.0, 3.0]))).sum(), 1.0)


def test_softmax_rejects_non_finite_logits():
    with pytest.raises(NonFiniteError):
        softmax_logits_to_dist(np.array([0.0, np.nan]))


def test_adam_first_step_moves_by_learning_rate():
    params = {"w": np.array([1.0, -2.0, 0.5])}
    state = AdamState.for_params(params, lr=0.1)
    adam_step(params, {"w": np.array([3.0, -0.5, 0.0])}, state)

    assert state.t == 1
    np.testing.assert_allclose(params["w"], [0.9, -1.9, 0.5], atol=1e-6)


def test_adam_leaves_parameters_without_gradients():
    params = {"a": np.ones(2), "b": np.ones(2)}
    state = AdamState.for_params(params, lr=0.1)
    adam_step(params, {"a": np.ones(2)}, state)
    np.testing.assert_array_equal(params["b"], np.ones(2))


def test_adam_rejects_bad_gradients():
    params = {"w": np.zeros(3)}
    state = AdamState.for_params(params)
    with pytest.raises(DimMismatchError):
        adam_step(params, {"w": np.zeros(4)}, state)
    with pytest.raises(NonFiniteError):
        adam_step(params, {"w": np.array([0.0, np.inf, 0.0])}, state)


def test_adam_minimizes_a_quadratic():
    params = {"x": np.array([3.0, -4.0])}
    state = AdamState.for_params(params, lr=0.1)
    for _ in range(500):
        adam_step(params, {"x": 2 * params["x"]}, state)
    assert np.abs(params["x"]).max() < 0.2


def test_encoded_array_is_bit_exact():
    array = np.array([[0.1, -0.0], [np.pi, 1e-300]])
    decoded = decode_array(EncodedArray.model_validate_json(encode_array(array).model_dump_json()))
    assert decoded.tobytes() == array.tobytes()
    assert decoded.shape == (2, 2)


def test_encode_params_keeps_names():
    params = {"layers.0.weight": np.eye(2), "layers.0.bias": np.zeros(2)}
    decoded = decode_params(encode_params(params))
    assert set(decoded) == set(params)
    np.testing.assert_array_equal(decoded["layers.0.weight"], np.eye(2))


def test_decode_rejects_bad_payloads():
    with pytest.raises(SchemaError):
        decode_array(EncodedArray(shape=[2], data="not base64!"))
    with pytest.raises(SchemaError):
        decode_array(EncodedArray(shape=[3], data=encode_array(np.zeros(2)).data))
