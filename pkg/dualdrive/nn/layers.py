"""Dispatch between a layer descriptor and its kernels.

Layers hold no state: `forward_layer` returns the cache that `backward_layer`
consumes, so a network can be evaluated from several threads at once."""

from typing import Any, Callable

from .exceptions import MissingCacheError
from .kernels import (
    conv2d_backward,
    conv2d_forward_cached,
    dense_backward,
    dense_forward_cached,
    flatten_backward,
    flatten_forward_cached,
    normalization_backward,
    normalization_forward_cached,
    separable_conv2d_backward,
    separable_conv2d_forward_cached,
)
from .spec import LayerKind, LayerSpec
from .tensor import Tensor

LayerParams = dict[str, Tensor]


def forward_layer(
    layer: LayerSpec, x: Tensor, params: LayerParams
) -> tuple[Tensor, Any]:
    if layer.kind == LayerKind.CONV2D:
        return conv2d_forward_cached(x, layer, params["kernel"], params["bias"])
    if layer.kind == LayerKind.SEPARABLE_CONV2D:
        return separable_conv2d_forward_cached(
            x, layer, params["depthwise"], params["pointwise"], params["bias"]
        )
    if layer.kind == LayerKind.DENSE:
        return dense_forward_cached(x, layer, params["kernel"], params["bias"])
    if layer.kind == LayerKind.FLATTEN:
        return flatten_forward_cached(x, layer)
    return normalization_forward_cached(x, layer)


_BACKWARD: dict[LayerKind, Callable[[Tensor, Any], tuple[Tensor, LayerParams]]] = {
    LayerKind.CONV2D: conv2d_backward,
    LayerKind.SEPARABLE_CONV2D: separable_conv2d_backward,
    LayerKind.DENSE: dense_backward,
    LayerKind.FLATTEN: flatten_backward,
    LayerKind.NORMALIZATION: normalization_backward,
}


def backward_layer(
    layer: LayerSpec, dout: Tensor, cache: Any
) -> tuple[Tensor, LayerParams]:
    """Gradients w.r.t. the layer input and its parameters."""
    if cache is None:
        raise MissingCacheError(f"{layer.kind.value}: no cached forward pass")
    return _BACKWARD[layer.kind](dout, cache)
