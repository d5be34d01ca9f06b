"""The original PilotNet and its depthwise-separable reduction.

The original stack uses valid padding and the modified stack uses same padding.
This is the only assignment under which both published flatten/dense sizes hold
for a 120x160 input: the original flattens to 8*13*64 = 6656 (its 100-unit dense
layer has 665,700 weights) and the modified to 8*10*36 = 2880."""

from dataclasses import dataclass
from typing import Callable

from dualdrive.nn.spec import Activation, LayerKind, LayerSpec, Padding, output_shape

INPUT_SHAPE = (120, 160, 1)

HIDDEN_UNITS = (100, 50, 10)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    input_shape: tuple[int, int, int]
    layers: tuple[LayerSpec, ...]
    padding_note: str = ""

    def __post_init__(self):
        shapes = self.layer_shapes()
        if shapes[-1] != (1,):
            raise ValueError(
                f"{self.name}: expected a single output neuron, got {shapes[-1]}"
            )

    def layer_shapes(self) -> list[tuple[int, ...]]:
        """Output shape of every layer. Raises if the channel chain is broken."""
        shapes = []
        shape: tuple[int, ...] = self.input_shape
        for layer in self.layers:
            shape = output_shape(layer, shape)
            shapes.append(shape)
        return shapes

    @property
    def has_normalization_layer(self) -> bool:
        return any(layer.kind == LayerKind.NORMALIZATION for layer in self.layers)


def _conv(cin: int, cout: int, kernel: int, stride: int, padding: Padding) -> LayerSpec:
    return LayerSpec(
        LayerKind.CONV2D,
        cin,
        cout,
        kernel=(kernel, kernel),
        stride=(stride, stride),
        padding=padding,
        activation=Activation.RELU,
    )


def _separable(cin: int, cout: int, kernel: int, stride: int) -> LayerSpec:
    return LayerSpec(
        LayerKind.SEPARABLE_CONV2D,
        cin,
        cout,
        kernel=(kernel, kernel),
        stride=(stride, stride),
        padding=Padding.SAME,
        activation=Activation.RELU,
    )


def _with_head(name: str, features: list[LayerSpec], note: str) -> ModelSpec:
    """Append Flatten and the 100-50-10-1 dense head to a convolutional trunk."""
    shape: tuple[int, ...] = INPUT_SHAPE
    for layer in features:
        shape = output_shape(layer, shape)
    flat = shape[0] * shape[1] * shape[2]

    layers = [*features, LayerSpec(LayerKind.FLATTEN, shape[2], shape[2])]
    width = flat
    for units in HIDDEN_UNITS:
        layers.append(
            LayerSpec(LayerKind.DENSE, width, units, activation=Activation.RELU)
        )
        width = units
    # Steering regression: linear output.
    layers.append(LayerSpec(LayerKind.DENSE, width, 1, activation=Activation.LINEAR))

    return ModelSpec(
        name=name, input_shape=INPUT_SHAPE, layers=tuple(layers), padding_note=note
    )


def build_pilotnet_original() -> ModelSpec:
    features = [
        LayerSpec(LayerKind.NORMALIZATION, 1, 1),
        _conv(1, 24, 5, 2, Padding.VALID),
        _conv(24, 36, 5, 2, Padding.VALID),
        _conv(36, 48, 5, 2, Padding.VALID),
        _conv(48, 64, 3, 1, Padding.VALID),
        _conv(64, 64, 3, 1, Padding.VALID),
    ]
    return _with_head("original", features, "valid padding")


def build_pilotnet_modified() -> ModelSpec:
    # No Normalization row: the network normalizes its input as preprocessing.
    features = [
        _separable(1, 24, 5, 2),
        _conv(24, 12, 1, 1, Padding.SAME),
        _separable(12, 48, 5, 2),
        _separable(48, 36, 5, 2),
        _conv(36, 18, 1, 1, Padding.SAME),
        _separable(18, 64, 5, 2),
        _separable(64, 36, 3, 1),
    ]
    note = "same padding, input normalized as preprocessing"
    return _with_head("modified", features, note)


MODEL_BUILDERS: dict[str, Callable[[], ModelSpec]] = {
    "original": build_pilotnet_original,
    "modified": build_pilotnet_modified,
}


def build_model(name: str) -> ModelSpec:
    try:
        return MODEL_BUILDERS[name]()
    except KeyError as ex:
        raise ValueError(
            f"Unknown model '{name}', expected one of {sorted(MODEL_BUILDERS)}"
        ) from ex
