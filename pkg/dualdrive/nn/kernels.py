"""Forward and backward kernels for the five layer kinds.

Convolutions are computed as a sum of one matrix product per kernel offset:
the input window at offset (i, j) is a strided view of the padded input, so
the patch matrix is never materialized. Every `*_forward_cached` function
returns the output together with the activations its backward pass needs."""

from typing import Iterator, NamedTuple

import numpy as np

from .exceptions import EmptyBatchError, ShapeMismatchError
from .spec import (
    Activation,
    LayerKind,
    LayerSpec,
    Padding,
    output_shape,
    same_padding,
)
from .tensor import FLOAT_DTYPE, Tensor, as_batch, check_same_length, check_shape

NORMALIZATION_SCALE = 127.5

# (top, bottom, left, right)
Pads = tuple[int, int, int, int]

Grads = dict[str, Tensor]


#### Elementwise ####


def normalize(x: Tensor) -> Tensor:
    """Map pixel values in [0, 255] to [-1, 1]."""
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(FLOAT_DTYPE)
    return x / NORMALIZATION_SCALE - 1.0


def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0)


def _activate(z: Tensor, activation: Activation) -> Tensor:
    if activation == Activation.RELU:
        return relu(z)
    return z


def _activation_backward(dout: Tensor, out: Tensor, activation: Activation) -> Tensor:
    if activation == Activation.RELU:
        return dout * (out > 0)
    return dout


#### Losses and metrics ####


def mse_loss(pred: Tensor, target: Tensor) -> float:
    pred, target = check_same_length(pred, target)
    if pred.size == 0:
        raise EmptyBatchError("MSE of an empty batch")
    diff = pred - target
    return float(np.mean(diff * diff))


def mse_grad(pred: Tensor, target: Tensor) -> Tensor:
    """Gradient of `mse_loss` w.r.t. `pred`, shaped like `pred`."""
    flat_pred, flat_target = check_same_length(pred, target)
    if flat_pred.size == 0:
        raise EmptyBatchError("MSE of an empty batch")
    grad = 2.0 * (flat_pred - flat_target.astype(flat_pred.dtype)) / flat_pred.size
    return grad.reshape(np.shape(pred))


def mae(pred: Tensor, target: Tensor) -> float:
    pred, target = check_same_length(pred, target)
    if pred.size == 0:
        raise EmptyBatchError("MAE of an empty batch")
    return float(np.mean(np.abs(pred - target)))


#### Convolution helpers ####


def _pad_input(x: Tensor, layer: LayerSpec) -> tuple[Tensor, Pads]:
    """Zero-pad a batched NHWC input for the layer."""
    if layer.padding == Padding.VALID:
        return x, (0, 0, 0, 0)

    (kh, kw), (sh, sw) = layer.kernel, layer.stride
    top, bottom = same_padding(x.shape[1], kh, sh)
    left, right = same_padding(x.shape[2], kw, sw)
    if top == bottom == left == right == 0:
        return x, (0, 0, 0, 0)

    padded = np.pad(x, ((0, 0), (top, bottom), (left, right), (0, 0)))
    return padded, (top, bottom, left, right)


def _unpad(dxp: Tensor, pads: Pads) -> Tensor:
    top, bottom, left, right = pads
    return dxp[:, top : dxp.shape[1] - bottom, left : dxp.shape[2] - right, :]


def _windows(
    layer: LayerSpec, oh: int, ow: int
) -> Iterator[tuple[int, int, tuple[slice, ...]]]:
    """Kernel offsets (i, j) and the strided view of the padded input they read."""
    (kh, kw), (sh, sw) = layer.kernel, layer.stride
    for i in range(kh):
        for j in range(kw):
            yield i, j, (
                slice(None),
                slice(i, i + sh * (oh - 1) + 1, sh),
                slice(j, j + sw * (ow - 1) + 1, sw),
                slice(None),
            )


def _check_image_input(
    x: Tensor, layer: LayerSpec
) -> tuple[Tensor, bool, tuple[int, ...]]:
    batch, squeezed = as_batch(np.asarray(x), 3)
    out_shape = output_shape(layer, batch.shape[1:])
    return batch, squeezed, out_shape


def _squeeze(out: Tensor, squeezed: bool) -> Tensor:
    return out[0] if squeezed else out


#### Conv2D ####


class ConvCache(NamedTuple):
    layer: LayerSpec
    padded: Tensor
    pads: Pads
    kernel: Tensor
    out: Tensor
    squeezed: bool


def conv2d_forward_cached(
    x: Tensor, layer: LayerSpec, kernel: Tensor, bias: Tensor
) -> tuple[Tensor, ConvCache]:
    if layer.kind != LayerKind.CONV2D:
        raise ShapeMismatchError(
            f"conv2d_forward called with a {layer.kind.value} layer"
        )
    shapes = layer.weight_shapes()
    check_shape(kernel, shapes["kernel"], "Conv2D kernel")
    check_shape(bias, shapes["bias"], "Conv2D bias")

    batch, squeezed, (oh, ow, cout) = _check_image_input(x, layer)
    padded, pads = _pad_input(batch, layer)

    z = np.zeros((batch.shape[0], oh, ow, cout), dtype=np.result_type(batch, kernel))
    for i, j, window in _windows(layer, oh, ow):
        z += padded[window] @ kernel[i, j]
    z += bias

    out = _activate(z, layer.activation)
    cache = ConvCache(layer, padded, pads, kernel, out, squeezed)
    return _squeeze(out, squeezed), cache


def conv2d_forward(x: Tensor, layer: LayerSpec, kernel: Tensor, bias: Tensor) -> Tensor:
    """Cross-correlation with stride and padding, then the layer's activation."""
    return conv2d_forward_cached(x, layer, kernel, bias)[0]


def conv2d_backward(dout: Tensor, cache: ConvCache) -> tuple[Tensor, Grads]:
    dout, _ = as_batch(np.asarray(dout), 3)
    dz = _activation_backward(dout, cache.out, cache.layer.activation)
    oh, ow, cout = dz.shape[1:]

    dkernel = np.zeros_like(cache.kernel)
    dpadded = np.zeros_like(cache.padded, dtype=dz.dtype)
    dz_flat = dz.reshape(-1, cout)

    for i, j, window in _windows(cache.layer, oh, ow):
        view = cache.padded[window]
        dkernel[i, j] = view.reshape(-1, view.shape[-1]).T @ dz_flat
        dpadded[window] += dz @ cache.kernel[i, j].T

    grads = {"kernel": dkernel, "bias": dz_flat.sum(axis=0)}
    return _squeeze(_unpad(dpadded, cache.pads), cache.squeezed), grads


#### SeparableConv2D ####


class SeparableCache(NamedTuple):
    layer: LayerSpec
    padded: Tensor
    pads: Pads
    depthwise: Tensor
    pointwise: Tensor
    spatial: Tensor
    out: Tensor
    squeezed: bool


def separable_conv2d_forward_cached(
    x: Tensor, layer: LayerSpec, depthwise: Tensor, pointwise: Tensor, bias: Tensor
) -> tuple[Tensor, SeparableCache]:
    if layer.kind != LayerKind.SEPARABLE_CONV2D:
        raise ShapeMismatchError(
            f"separable_conv2d_forward called with a {layer.kind.value} layer"
        )
    shapes = layer.weight_shapes()
    check_shape(depthwise, shapes["depthwise"], "SeparableConv2D depthwise")
    check_shape(pointwise, shapes["pointwise"], "SeparableConv2D pointwise")
    check_shape(bias, shapes["bias"], "SeparableConv2D bias")

    batch, squeezed, (oh, ow, _) = _check_image_input(x, layer)
    padded, pads = _pad_input(batch, layer)

    # Per-channel spatial filtering, no bias.
    spatial = np.zeros(
        (batch.shape[0], oh, ow, layer.in_channels),
        dtype=np.result_type(batch, depthwise),
    )
    for i, j, window in _windows(layer, oh, ow):
        spatial += padded[window] * depthwise[i, j]

    z = spatial @ pointwise[0, 0] + bias
    out = _activate(z, layer.activation)
    cache = SeparableCache(
        layer, padded, pads, depthwise, pointwise, spatial, out, squeezed
    )
    return _squeeze(out, squeezed), cache


def separable_conv2d_forward(
    x: Tensor, layer: LayerSpec, depthwise: Tensor, pointwise: Tensor, bias: Tensor
) -> Tensor:
    """Depthwise spatial convolution (stride and padding apply here) followed by a
    1x1 cross-channel mix with bias, then the layer's activation."""
    return separable_conv2d_forward_cached(x, layer, depthwise, pointwise, bias)[0]


def separable_conv2d_backward(
    dout: Tensor, cache: SeparableCache
) -> tuple[Tensor, Grads]:
    dout, _ = as_batch(np.asarray(dout), 3)
    dz = _activation_backward(dout, cache.out, cache.layer.activation)
    oh, ow, cout = dz.shape[1:]
    cin = cache.layer.in_channels

    dz_flat = dz.reshape(-1, cout)
    dpointwise = (cache.spatial.reshape(-1, cin).T @ dz_flat).reshape(1, 1, cin, cout)
    dspatial = dz @ cache.pointwise[0, 0].T

    ddepthwise = np.zeros_like(cache.depthwise)
    dpadded = np.zeros_like(cache.padded, dtype=dz.dtype)
    for i, j, window in _windows(cache.layer, oh, ow):
        ddepthwise[i, j] = (cache.padded[window] * dspatial).sum(axis=(0, 1, 2))
        dpadded[window] += dspatial * cache.depthwise[i, j]

    grads = {
        "depthwise": ddepthwise,
        "pointwise": dpointwise,
        "bias": dz_flat.sum(axis=0),
    }
    return _squeeze(_unpad(dpadded, cache.pads), cache.squeezed), grads


#### Dense ####


class DenseCache(NamedTuple):
    layer: LayerSpec
    x: Tensor
    kernel: Tensor
    out: Tensor
    squeezed: bool


def dense_forward_cached(
    x: Tensor, layer: LayerSpec, kernel: Tensor, bias: Tensor
) -> tuple[Tensor, DenseCache]:
    shapes = layer.weight_shapes()
    check_shape(kernel, shapes["kernel"], "Dense kernel")
    check_shape(bias, shapes["bias"], "Dense bias")

    batch, squeezed = as_batch(np.asarray(x), 1)
    if batch.shape[1] != layer.in_channels:
        raise ShapeMismatchError(
            f"Dense expects {layer.in_channels} inputs, got {batch.shape[1]}"
        )

    out = _activate(batch @ kernel + bias, layer.activation)
    return _squeeze(out, squeezed), DenseCache(layer, batch, kernel, out, squeezed)


def dense_forward(x: Tensor, layer: LayerSpec, kernel: Tensor, bias: Tensor) -> Tensor:
    """y = W^T x + b, then the layer's activation. `kernel` is (inputs, outputs)."""
    return dense_forward_cached(x, layer, kernel, bias)[0]


def dense_backward(dout: Tensor, cache: DenseCache) -> tuple[Tensor, Grads]:
    dout, _ = as_batch(np.asarray(dout), 1)
    dz = _activation_backward(dout, cache.out, cache.layer.activation)
    grads = {"kernel": cache.x.T @ dz, "bias": dz.sum(axis=0)}
    return _squeeze(dz @ cache.kernel.T, cache.squeezed), grads


#### Flatten and Normalization ####


class ReshapeCache(NamedTuple):
    layer: LayerSpec
    in_shape: tuple[int, ...]


def flatten_forward_cached(x: Tensor, layer: LayerSpec) -> tuple[Tensor, ReshapeCache]:
    batch, squeezed = as_batch(np.asarray(x), 3)
    output_shape(layer, batch.shape[1:])
    out = batch.reshape(batch.shape[0], -1)
    return _squeeze(out, squeezed), ReshapeCache(layer, np.shape(x))


def flatten_backward(dout: Tensor, cache: ReshapeCache) -> tuple[Tensor, Grads]:
    return np.reshape(dout, cache.in_shape), {}


def normalization_forward_cached(
    x: Tensor, layer: LayerSpec
) -> tuple[Tensor, ReshapeCache]:
    return normalize(x), ReshapeCache(layer, np.shape(x))


def normalization_backward(dout: Tensor, cache: ReshapeCache) -> tuple[Tensor, Grads]:
    return dout / NORMALIZATION_SCALE, {}
