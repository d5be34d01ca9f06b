from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from dualdrive.data import Dataset, EmptyDatasetError, mirror_frames
from dualdrive.models import Network
from dualdrive.nn import mae, mse_loss

EVAL_BATCH = 256


class OfflineMetrics(NamedTuple):
    mse: float
    mae: float


def predict_all(
    model: Network, frames: npt.ArrayLike, batch_size: int = EVAL_BATCH
) -> np.ndarray:
    frames = np.asarray(frames)
    if frames.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    starts = range(0, frames.shape[0], batch_size)
    predictions = [model.predict_batch(frames[i : i + batch_size]) for i in starts]
    return np.concatenate(predictions).astype(np.float64)


def evaluate_offline(
    model: Network, dataset: Dataset, batch_size: int = EVAL_BATCH
) -> OfflineMetrics:
    """MSE and MAE over the whole dataset, no augmentation."""
    if len(dataset) == 0:
        raise EmptyDatasetError("Cannot evaluate on an empty dataset")
    predictions = predict_all(model, dataset.frames, batch_size)
    targets = dataset.angles.astype(np.float64)
    return OfflineMetrics(mse_loss(predictions, targets), mae(predictions, targets))


def constant_baseline(dataset: Dataset, value: float = 0.0) -> OfflineMetrics:
    """Metrics of a predictor that always answers `value`."""
    if len(dataset) == 0:
        raise EmptyDatasetError("Cannot evaluate on an empty dataset")
    targets = dataset.angles.astype(np.float64)
    predictions = np.full_like(targets, value)
    return OfflineMetrics(mse_loss(predictions, targets), mae(predictions, targets))


def mirror_consistency(
    model: Network, frames: npt.ArrayLike, batch_size: int = EVAL_BATCH
) -> float:
    """Mean |predict(frame) + predict(mirror(frame))|. Zero for a perfectly
    left/right-antisymmetric model."""
    frames = np.asarray(frames)
    if frames.shape[0] == 0:
        raise EmptyDatasetError("Mirror consistency needs at least one frame")
    straight = predict_all(model, frames, batch_size)
    mirrored = predict_all(model, mirror_frames(frames), batch_size)
    return float(np.mean(np.abs(straight + mirrored)))
