import numpy as np
import pytest

from dualdrive.nn import (
    Activation,
    EmptyBatchError,
    LayerKind,
    LayerSpec,
    Padding,
    ShapeMismatchError,
    backward_layer,
    conv2d_forward,
    dense_forward,
    forward_layer,
    mae,
    mse_grad,
    mse_loss,
    normalize,
    relu,
    separable_conv2d_forward,
)
from dualdrive.nn.exceptions import DimensionError, MissingCacheError
from dualdrive.nn.spec import conv_output_size, same_padding
from .oracles import conv2d as conv2d_loops
from .oracles import separable_conv2d as separable_loops


def random_layer(
    rng: np.random.Generator, kind: LayerKind, activation: Activation | None = None
):
    h, w = rng.integers(3, 10, size=2)
    kh, kw = rng.integers(1, 4, size=2)
    stride = tuple(int(s) for s in rng.integers(1, 3, size=2))
    padding = Padding.SAME if rng.random() < 0.5 else Padding.VALID
    if activation is None:
        activation = Activation.RELU if rng.random() < 0.5 else Activation.LINEAR
    layer = LayerSpec(
        kind,
        int(rng.integers(1, 4)),
        int(rng.integers(1, 4)),
        kernel=(int(kh), int(kw)),
        stride=stride,
        padding=padding,
        activation=activation,
    )
    x = rng.normal(size=(int(h), int(w), layer.in_channels))
    params = {
        name: rng.normal(size=shape) for name, shape in layer.weight_shapes().items()
    }
    return layer, x, params


def separable_params(params: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return params["depthwise"], params["pointwise"], params["bias"]


@pytest.mark.parametrize("seed", range(100))
def test_conv2d_matches_loops(seed: int):
    rng = np.random.default_rng(seed)
    layer, x, params = random_layer(rng, LayerKind.CONV2D)
    expected = conv2d_loops(x, layer, params["kernel"], params["bias"])
    actual = conv2d_forward(x, layer, params["kernel"], params["bias"])
    assert actual.shape == expected.shape
    np.testing.assert_allclose(actual, expected, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("seed", range(100))
def test_separable_conv2d_matches_loops(seed: int):
    rng = np.random.default_rng(1000 + seed)
    layer, x, params = random_layer(rng, LayerKind.SEPARABLE_CONV2D)
    expected = separable_loops(x, layer, *separable_params(params))
    actual = separable_conv2d_forward(x, layer, *separable_params(params))
    assert actual.shape == expected.shape
    np.testing.assert_allclose(actual, expected, rtol=1e-9, atol=1e-9)


def test_batched_conv_equals_single():
    rng = np.random.default_rng(5)
    layer, _, params = random_layer(rng, LayerKind.CONV2D)
    xs = rng.normal(size=(3, 8, 9, layer.in_channels))
    batched = conv2d_forward(xs, layer, params["kernel"], params["bias"])
    for x, out in zip(xs, batched):
        single = conv2d_forward(x, layer, params["kernel"], params["bias"])
        np.testing.assert_allclose(single, out, atol=1e-12)


def test_dense_forward():
    layer = LayerSpec(LayerKind.DENSE, 3, 2, activation=Activation.RELU)
    kernel = np.array([[1.0, -1.0], [2.0, 0.0], [0.0, 1.0]])
    bias = np.array([0.5, -10.0])
    out = dense_forward(np.array([1.0, 1.0, 1.0]), layer, kernel, bias)
    np.testing.assert_allclose(out, [3.5, 0.0])


def test_normalize_and_relu():
    np.testing.assert_allclose(normalize(np.array([0, 127.5, 255])), [-1.0, 0.0, 1.0])
    assert normalize(np.array([0, 255], dtype=np.uint8)).dtype == np.float32
    np.testing.assert_array_equal(relu(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])


def test_losses():
    pred = np.array([[0.0], [1.0]])
    target = np.array([1.0, 1.0])
    assert mse_loss(pred, target) == pytest.approx(0.5)
    assert mae(pred, target) == pytest.approx(0.5)
    np.testing.assert_allclose(mse_grad(pred, target), [[-1.0], [0.0]])


def test_loss_errors():
    with pytest.raises(EmptyBatchError):
        mse_loss(np.zeros(0), np.zeros(0))
    with pytest.raises(ShapeMismatchError):
        mae(np.zeros(3), np.zeros(2))


def test_output_size_rules():
    assert conv_output_size(66, 5, 2, Padding.VALID) == 31
    assert conv_output_size(120, 5, 2, Padding.SAME) == 60
    assert conv_output_size(5, 3, 2, Padding.SAME) == 3
    # The odd padding pixel goes to the bottom/right.
    assert same_padding(6, 4, 1) == (1, 2)
    with pytest.raises(DimensionError):
        conv_output_size(2, 3, 1, Padding.VALID)


def test_wrong_weight_shape():
    layer = LayerSpec(LayerKind.CONV2D, 1, 2, kernel=(3, 3))
    with pytest.raises(ShapeMismatchError):
        conv2d_forward(np.zeros((5, 5, 1)), layer, np.zeros((3, 3, 2, 2)), np.zeros(2))
    with pytest.raises(ShapeMismatchError):
        conv2d_forward(np.zeros((5, 5, 3)), layer, np.zeros((3, 3, 1, 2)), np.zeros(2))


def test_backward_without_cache():
    with pytest.raises(MissingCacheError):
        backward_layer(LayerSpec(LayerKind.DENSE, 2, 1), np.zeros(1), None)


def _objective(
    layer: LayerSpec, x: np.ndarray, params: dict, weights: np.ndarray
) -> float:
    out, _ = forward_layer(layer, x, params)
    return float(np.sum(out * weights))


def _check_gradient(
    analytic: np.ndarray,
    evaluate,
    tensor: np.ndarray,
    rng: np.random.Generator,
    samples: int = 6,
):
    step = 1e-5
    for _ in range(samples):
        index = tuple(int(rng.integers(0, n)) for n in tensor.shape)
        saved = tensor[index]
        tensor[index] = saved + step
        up = evaluate()
        tensor[index] = saved - step
        down = evaluate()
        tensor[index] = saved
        numeric = (up - down) / (2 * step)
        a = analytic[index]
        error = abs(a - numeric) / max(abs(a) + abs(numeric), 1e-8)
        assert error <= 1e-4 or abs(a - numeric) < 1e-9, (index, a, numeric)


@pytest.mark.parametrize("activation", [Activation.LINEAR, Activation.RELU])
@pytest.mark.parametrize("kind", [LayerKind.CONV2D, LayerKind.SEPARABLE_CONV2D])
@pytest.mark.parametrize("seed", range(8))
def test_conv_gradients(kind: LayerKind, activation: Activation, seed: int):
    rng = np.random.default_rng(2000 + seed)
    layer, x, params = random_layer(rng, kind, activation)
    x = x[np.newaxis].copy()
    out, cache = forward_layer(layer, x, params)
    weights = rng.normal(size=out.shape)
    dx, grads = backward_layer(layer, weights, cache)

    def evaluate():
        return _objective(layer, x, params, weights)

    _check_gradient(dx, evaluate, x, rng)
    for name, tensor in params.items():
        _check_gradient(grads[name], evaluate, tensor, rng)


def test_dense_and_flatten_gradients():
    rng = np.random.default_rng(3)
    flatten = LayerSpec(LayerKind.FLATTEN, 2, 2)
    dense = LayerSpec(LayerKind.DENSE, 18, 4)
    x = rng.normal(size=(2, 3, 3, 2))
    params = {
        name: rng.normal(size=shape) for name, shape in dense.weight_shapes().items()
    }
    weights = rng.normal(size=(2, 4))

    def evaluate():
        flat, _ = forward_layer(flatten, x, {})
        return _objective(dense, flat, params, weights)

    flat, flatten_cache = forward_layer(flatten, x, {})
    _, dense_cache = forward_layer(dense, flat, params)
    dflat, grads = backward_layer(dense, weights, dense_cache)
    dx, _ = backward_layer(flatten, dflat, flatten_cache)

    _check_gradient(dx, evaluate, x, rng)
    _check_gradient(grads["kernel"], evaluate, params["kernel"], rng)
    _check_gradient(grads["bias"], evaluate, params["bias"], rng)


def test_normalization_gradient():
    rng = np.random.default_rng(4)
    layer = LayerSpec(LayerKind.NORMALIZATION, 1, 1)
    x = rng.uniform(0.0, 255.0, size=(2, 5, 6, 1))
    weights = rng.normal(size=x.shape)
    _, cache = forward_layer(layer, x, {})
    dx, grads = backward_layer(layer, weights, cache)
    assert not grads

    def evaluate():
        return _objective(layer, x, {}, weights)

    _check_gradient(dx, evaluate, x, rng, samples=12)


def test_relu_backward_masks_inactive_units():
    layer = LayerSpec(LayerKind.DENSE, 2, 2, activation=Activation.RELU)
    params = {"kernel": np.eye(2), "bias": np.zeros(2)}
    _, cache = forward_layer(layer, np.array([[1.0, -1.0]]), params)
    dx, grads = backward_layer(layer, np.ones((1, 2)), cache)
    np.testing.assert_array_equal(dx, [[1.0, 0.0]])
    np.testing.assert_array_equal(grads["bias"], [1.0, 0.0])


def test_float_dtype_is_kept():
    layer = LayerSpec(LayerKind.CONV2D, 1, 1, kernel=(2, 2))
    x32 = np.ones((3, 3, 1), dtype=np.float32)
    kernel = np.ones((2, 2, 1, 1), dtype=np.float32)
    out = conv2d_forward(x32, layer, kernel, np.zeros(1, dtype=np.float32))
    assert out.dtype == np.float32


@pytest.mark.parametrize("seed", range(10))
def test_separable_equals_composed_conv(seed: int):
    rng = np.random.default_rng(3000 + seed)
    layer, x, params = random_layer(rng, LayerKind.SEPARABLE_CONV2D)
    # Each output channel is a sum of rank-1 (spatial x channel) kernels.
    depthwise, pointwise, _ = separable_params(params)
    composed = depthwise[:, :, :, np.newaxis] * pointwise[0, 0][np.newaxis, np.newaxis]
    conv_layer = LayerSpec(
        LayerKind.CONV2D,
        layer.in_channels,
        layer.out_channels,
        kernel=layer.kernel,
        stride=layer.stride,
        padding=layer.padding,
        activation=layer.activation,
    )
    expected = conv2d_forward(x, conv_layer, composed, params["bias"])
    actual = separable_conv2d_forward(x, layer, *separable_params(params))
    np.testing.assert_allclose(actual, expected, atol=1e-9)
