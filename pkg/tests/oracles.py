"""Direct loop implementations used as references for the vectorized kernels."""

import numpy as np

from dualdrive.nn.spec import LayerSpec, Padding, same_padding


def _padded(x: np.ndarray, layer: LayerSpec) -> np.ndarray:
    if layer.padding == Padding.VALID:
        return x
    top, bottom = same_padding(x.shape[0], layer.kernel[0], layer.stride[0])
    left, right = same_padding(x.shape[1], layer.kernel[1], layer.stride[1])
    return np.pad(x, ((top, bottom), (left, right), (0, 0)))


def _out_size(size: int, kernel: int, stride: int, padding: Padding) -> int:
    if padding == Padding.SAME:
        return -(-size // stride)
    return (size - kernel) // stride + 1


def conv2d(
    x: np.ndarray, layer: LayerSpec, kernel: np.ndarray, bias: np.ndarray
) -> np.ndarray:
    (kh, kw), (sh, sw) = layer.kernel, layer.stride
    oh = _out_size(x.shape[0], kh, sh, layer.padding)
    ow = _out_size(x.shape[1], kw, sw, layer.padding)
    xp = _padded(x, layer)
    out = np.zeros((oh, ow, layer.out_channels))
    for r in range(oh):
        for c in range(ow):
            for o in range(layer.out_channels):
                total = bias[o]
                for i in range(kh):
                    for j in range(kw):
                        for k in range(layer.in_channels):
                            total += xp[r * sh + i, c * sw + j, k] * kernel[i, j, k, o]
                out[r, c, o] = total
    return np.maximum(out, 0) if layer.activation.value == "relu" else out


def separable_conv2d(
    x: np.ndarray,
    layer: LayerSpec,
    depthwise: np.ndarray,
    pointwise: np.ndarray,
    bias: np.ndarray,
) -> np.ndarray:
    (kh, kw), (sh, sw) = layer.kernel, layer.stride
    oh = _out_size(x.shape[0], kh, sh, layer.padding)
    ow = _out_size(x.shape[1], kw, sw, layer.padding)
    xp = _padded(x, layer)
    spatial = np.zeros((oh, ow, layer.in_channels))
    for r in range(oh):
        for c in range(ow):
            for k in range(layer.in_channels):
                total = 0.0
                for i in range(kh):
                    for j in range(kw):
                        total += xp[r * sh + i, c * sw + j, k] * depthwise[i, j, k]
                spatial[r, c, k] = total
    out = np.zeros((oh, ow, layer.out_channels))
    for o in range(layer.out_channels):
        mixed = sum(
            spatial[:, :, k] * pointwise[0, 0, k, o] for k in range(layer.in_channels)
        )
        out[:, :, o] = bias[o] + mixed
    return np.maximum(out, 0) if layer.activation.value == "relu" else out
