"""Layer descriptors and the shape/parameter algebra of the five layer kinds."""

import enum
import math
from dataclasses import dataclass

from .exceptions import DimensionError, ShapeMismatchError


class LayerKind(enum.Enum):
    CONV2D = "Conv2D"
    SEPARABLE_CONV2D = "SeparableConv2D"
    DENSE = "Dense"
    FLATTEN = "Flatten"
    NORMALIZATION = "Normalization"


class Padding(enum.Enum):
    VALID = "valid"
    SAME = "same"


class Activation(enum.Enum):
    RELU = "relu"
    LINEAR = "linear"


CONV_KINDS = frozenset([LayerKind.CONV2D, LayerKind.SEPARABLE_CONV2D])


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    in_channels: int
    out_channels: int
    kernel: tuple[int, int] = (1, 1)
    stride: tuple[int, int] = (1, 1)
    padding: Padding = Padding.VALID
    activation: Activation = Activation.LINEAR

    def __post_init__(self):
        if self.in_channels <= 0 or self.out_channels <= 0:
            raise ValueError(f"{self.kind.value}: channel counts must be positive")
        if min(self.kernel) <= 0 or min(self.stride) <= 0:
            raise ValueError(f"{self.kind.value}: kernel and stride must be positive")

    @property
    def is_conv(self) -> bool:
        return self.kind in CONV_KINDS

    def weight_shapes(self) -> dict[str, tuple[int, ...]]:
        """Names and shapes of the learnable tensors, in storage order.
        The separable layer has no depthwise bias: its only bias follows the
        pointwise stage."""
        kh, kw = self.kernel
        cin, cout = self.in_channels, self.out_channels
        if self.kind == LayerKind.CONV2D:
            return {"kernel": (kh, kw, cin, cout), "bias": (cout,)}
        if self.kind == LayerKind.SEPARABLE_CONV2D:
            return {
                "depthwise": (kh, kw, cin),
                "pointwise": (1, 1, cin, cout),
                "bias": (cout,),
            }
        if self.kind == LayerKind.DENSE:
            return {"kernel": (cin, cout), "bias": (cout,)}
        return {}


def conv_output_size(size: int, kernel: int, stride: int, padding: Padding) -> int:
    if padding == Padding.SAME:
        return math.ceil(size / stride)
    if kernel > size:
        raise DimensionError(
            f"Kernel {kernel} larger than input {size} with valid padding"
        )
    return (size - kernel) // stride + 1


def same_padding(size: int, kernel: int, stride: int) -> tuple[int, int]:
    """Zero padding (before, after) for one axis. The odd pixel goes after, at
    the bottom or right."""
    out = math.ceil(size / stride)
    total = max((out - 1) * stride + kernel - size, 0)
    return total // 2, total - total // 2


def output_shape(layer: LayerSpec, in_shape: tuple[int, ...]) -> tuple[int, ...]:
    in_shape = tuple(in_shape)

    if layer.kind == LayerKind.DENSE:
        if in_shape != (layer.in_channels,):
            raise ShapeMismatchError(
                f"Dense expects ({layer.in_channels},), got {in_shape}"
            )
        return (layer.out_channels,)

    if len(in_shape) != 3:
        raise ShapeMismatchError(
            f"{layer.kind.value} expects (h, w, c), got {in_shape}"
        )

    h, w, c = in_shape
    if c != layer.in_channels:
        raise ShapeMismatchError(
            f"{layer.kind.value} expects {layer.in_channels} input channels, got {c}"
        )

    if layer.kind == LayerKind.FLATTEN:
        return (h * w * c,)

    if layer.kind == LayerKind.NORMALIZATION:
        return in_shape

    (kh, kw), (sh, sw) = layer.kernel, layer.stride
    return (
        conv_output_size(h, kh, sh, layer.padding),
        conv_output_size(w, kw, sw, layer.padding),
        layer.out_channels,
    )


def param_count(layer: LayerSpec) -> int:
    return sum(math.prod(shape) for shape in layer.weight_shapes().values())


def mac_count(layer: LayerSpec, in_shape: tuple[int, ...]) -> int:
    """Multiply-accumulate operations for one example."""
    out = output_shape(layer, in_shape)
    kh, kw = layer.kernel
    cin, cout = layer.in_channels, layer.out_channels

    if layer.kind == LayerKind.CONV2D:
        return out[0] * out[1] * kh * kw * cin * cout
    if layer.kind == LayerKind.SEPARABLE_CONV2D:
        return out[0] * out[1] * (kh * kw * cin + cin * cout)
    if layer.kind == LayerKind.DENSE:
        return cin * cout
    return 0
