class TensorError(ValueError):
    """Base class for errors raised by the layer kernels."""


class ShapeMismatchError(TensorError):
    """An input or weight tensor does not have the shape the layer expects."""


class DimensionError(TensorError):
    """The layer cannot produce an output for the given input dimensions,
    e.g. a valid-padding kernel that is larger than the input."""


class EmptyBatchError(TensorError):
    """A loss or metric was requested over zero elements."""


class NonFiniteGradientError(TensorError):
    """A gradient passed to the optimizer contains NaN or infinity."""


class MissingCacheError(RuntimeError):
    """Backward pass requested without the activations cached by a forward pass."""
