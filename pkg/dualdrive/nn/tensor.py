"""Tensors are plain numpy arrays. Image tensors are ordered (height, width, channels),
batches add a leading axis. Production math runs in float32; gradient checks
build their networks in float64 and every kernel keeps the dtype it is given."""

import numpy as np
import numpy.typing as npt

from .exceptions import ShapeMismatchError

Tensor = npt.NDArray[np.floating]

FLOAT_DTYPE = np.float32


def as_batch(x: Tensor, rank: int) -> tuple[Tensor, bool]:
    """Add a leading batch axis if `x` is a single example of the given rank.
    Returns the batched array and whether the axis was added."""
    if x.ndim == rank:
        return x[np.newaxis], True
    if x.ndim == rank + 1:
        return x, False
    raise ShapeMismatchError(f"Expected rank {rank} or {rank + 1}, got shape {x.shape}")


def check_shape(x: Tensor, shape: tuple[int, ...], what: str):
    if tuple(x.shape) != tuple(shape):
        raise ShapeMismatchError(
            f"{what}: expected shape {tuple(shape)}, got {tuple(x.shape)}"
        )


def check_same_length(pred: Tensor, target: Tensor) -> tuple[Tensor, Tensor]:
    pred = np.ravel(pred)
    target = np.ravel(target)
    if pred.shape != target.shape:
        raise ShapeMismatchError(
            f"Length mismatch: {pred.shape[0]} predictions, {target.shape[0]} targets"
        )
    return pred, target
