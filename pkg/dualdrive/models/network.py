import logging
import math
from typing import Any, Sequence

import numpy as np

from dualdrive.nn.exceptions import MissingCacheError, ShapeMismatchError
from dualdrive.nn.kernels import normalize
from dualdrive.nn.layers import backward_layer, forward_layer
from dualdrive.nn.spec import LayerKind
from dualdrive.nn.tensor import FLOAT_DTYPE, Tensor, check_shape
from .builders import ModelSpec

logger = logging.getLogger(__name__)

ModelParams = list[dict[str, Tensor]]


class FeatureMapIndexError(IndexError):
    """The requested layer index is out of range or not a convolutional layer."""


def _fans(kind: LayerKind, name: str, shape: tuple[int, ...]) -> tuple[int, int]:
    if kind == LayerKind.DENSE:
        return shape[0], shape[1]
    if name == "depthwise":
        kh, kw, _ = shape
        return kh * kw, kh * kw
    kh, kw, cin, cout = shape
    return kh * kw * cin, kh * kw * cout


class Network:
    """A model descriptor bound to its weights. Weights are never mutated in
    place, so a network can be shared between the steering and benchmarking
    paths."""

    def __init__(self, spec: ModelSpec, params: ModelParams) -> None:
        if len(params) != len(spec.layers):
            raise ShapeMismatchError(
                f"{spec.name}: {len(params)} parameter groups"
                f" for {len(spec.layers)} layers"
            )
        for layer, layer_params in zip(spec.layers, params):
            expected = layer.weight_shapes()
            if set(expected) != set(layer_params):
                raise ShapeMismatchError(
                    f"{spec.name}: {layer.kind.value}"
                    f" expects tensors {sorted(expected)}"
                )
            for name, shape in expected.items():
                where = f"{spec.name} {layer.kind.value} {name}"
                check_shape(layer_params[name], shape, where)

        self.spec = spec
        self.params = params

    @classmethod
    def initialize(cls, spec: ModelSpec, seed: int = 0, dtype=FLOAT_DTYPE) -> "Network":
        """Glorot-uniform kernels, zero biases."""
        rng = np.random.default_rng(seed)
        params: ModelParams = []
        for layer in spec.layers:
            layer_params = {}
            for name, shape in layer.weight_shapes().items():
                if name == "bias":
                    layer_params[name] = np.zeros(shape, dtype=dtype)
                    continue
                fan_in, fan_out = _fans(layer.kind, name, shape)
                limit = math.sqrt(6.0 / (fan_in + fan_out))
                weights = rng.uniform(-limit, limit, size=shape)
                layer_params[name] = weights.astype(dtype)
            params.append(layer_params)
        return cls(spec, params)

    @classmethod
    def zeros(cls, spec: ModelSpec, dtype=FLOAT_DTYPE) -> "Network":
        params = [
            {
                name: np.zeros(shape, dtype=dtype)
                for name, shape in layer.weight_shapes().items()
            }
            for layer in spec.layers
        ]
        return cls(spec, params)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def dtype(self):
        for layer_params in self.params:
            for w in layer_params.values():
                return w.dtype
        return np.dtype(FLOAT_DTYPE)

    def with_params(self, params: ModelParams) -> "Network":
        return Network(self.spec, params)

    def astype(self, dtype) -> "Network":
        return self.with_params(
            [{k: w.astype(dtype) for k, w in layer.items()} for layer in self.params]
        )

    def _prepare(self, frames: Tensor) -> Tensor:
        frames = np.asarray(frames)
        if tuple(frames.shape[1:]) != self.spec.input_shape:
            raise ShapeMismatchError(
                f"{self.name}: expected frames of shape {self.spec.input_shape},"
                f" got {frames.shape[1:]}"
            )
        x = frames.astype(self.dtype)
        if not self.spec.has_normalization_layer:
            x = normalize(x)
        return x

    def forward(
        self, frames: Tensor, keep_cache: bool = False, stop_at: int | None = None
    ) -> tuple[Tensor, list[Any]]:
        """Evaluate a batch of raw frames (N, H, W, 1) with pixel values in
        [0, 255]. Returns the output and, if requested, the per-layer caches
        for `backward`."""
        x = self._prepare(frames)
        caches: list[Any] = []
        last = len(self.spec.layers) - 1 if stop_at is None else stop_at
        layers = zip(self.spec.layers, self.params)
        for index, (layer, layer_params) in enumerate(layers):
            x, cache = forward_layer(layer, x, layer_params)
            if keep_cache:
                caches.append(cache)
            if index == last:
                break
        return x, caches

    def backward(self, dout: Tensor, caches: Sequence[Any] | None) -> ModelParams:
        """Parameter gradients from d(loss)/d(output) and the `forward` caches."""
        if not caches or len(caches) != len(self.spec.layers):
            raise MissingCacheError(
                f"{self.name}: backward called without a complete forward cache"
            )

        grads: ModelParams = [{} for _ in self.spec.layers]
        for index in reversed(range(len(self.spec.layers))):
            layer = self.spec.layers[index]
            dout, grads[index] = backward_layer(layer, dout, caches[index])
        return grads

    def predict_batch(self, frames: Tensor) -> np.ndarray:
        out, _ = self.forward(frames)
        return out[:, 0]

    def predict(self, frame: Tensor) -> float:
        """Steering angle for one (120, 160, 1) frame. Not clamped."""
        frame = np.asarray(frame)
        if tuple(frame.shape) != self.spec.input_shape:
            raise ShapeMismatchError(
                f"{self.name}: expected a frame of shape {self.spec.input_shape},"
                f" got {frame.shape}"
            )
        return float(self.predict_batch(frame[np.newaxis])[0])

    def feature_maps(self, frame: Tensor, layer_index: int) -> np.ndarray:
        """Activation maps of one convolutional layer as a (channels, h, w) uint8
        stack, each map min-max scaled to [0, 255]. Constant maps come out all
        zero."""
        if not 0 <= layer_index < len(self.spec.layers):
            raise FeatureMapIndexError(
                f"{self.name}: layer index {layer_index} out of range"
            )
        if not self.spec.layers[layer_index].is_conv:
            kind = self.spec.layers[layer_index].kind.value
            raise FeatureMapIndexError(
                f"{self.name}: layer {layer_index} is {kind}, not a convolution"
            )

        frame = np.asarray(frame)
        check_shape(frame, self.spec.input_shape, f"{self.name} frame")
        out, _ = self.forward(frame[np.newaxis], stop_at=layer_index)
        maps = np.moveaxis(out[0], -1, 0).astype(np.float64)

        lo = maps.min(axis=(1, 2), keepdims=True)
        span = maps.max(axis=(1, 2), keepdims=True) - lo
        # Float32 round-off on a constant map is not structure.
        peak = np.abs(maps).max(axis=(1, 2), keepdims=True)
        flat = span <= 1e-6 * np.maximum(peak, 1.0)
        scaled = np.divide(maps - lo, span, out=np.zeros_like(maps), where=~flat)
        return np.rint(scaled * 255.0).astype(np.uint8)
