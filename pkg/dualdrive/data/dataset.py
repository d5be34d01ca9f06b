"""Steering samples and the dataset-level operations: balancing, mirror
expansion and splitting."""

import logging
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

FRAME_SHAPE = (120, 160, 1)

DEFAULT_BINS = 25


class EmptyDatasetError(ValueError):
    """The operation needs at least one sample."""


class SplitSizeError(ValueError):
    """The requested train and test counts do not fit in the dataset."""


class Sample(NamedTuple):
    frame: npt.NDArray[np.uint8]
    angle: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable, ordered collection of (frame, angle) samples.

    `frames` is a uint8 array (N, 120, 160, 1), `angles` a float32 array (N,)
    with -1 full left and +1 full right. `provenance` records the operations
    that produced the dataset, e.g. ("raw", "balanced", "mirrored")."""

    frames: npt.NDArray[np.uint8]
    angles: npt.NDArray[np.float32]
    provenance: tuple[str, ...] = ("raw",)

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.uint8).view()
        angles = np.asarray(self.angles, dtype=np.float32).reshape(-1).view()
        if frames.ndim != 4 or tuple(frames.shape[1:]) != FRAME_SHAPE:
            raise ValueError(
                f"Frames must have shape N x {FRAME_SHAPE}, got {frames.shape}"
            )
        if frames.shape[0] != angles.shape[0]:
            raise ValueError(f"{frames.shape[0]} frames but {angles.shape[0]} angles")
        if not np.all(np.isfinite(angles)) or np.any(np.abs(angles) > 1.0):
            raise ValueError("Steering angles must lie in [-1, 1]")

        frames.flags.writeable = False
        angles.flags.writeable = False
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "angles", angles)

    @classmethod
    def empty(cls) -> "Dataset":
        return cls(
            np.zeros((0, *FRAME_SHAPE), dtype=np.uint8), np.zeros(0, dtype=np.float32)
        )

    @classmethod
    def concat(cls, parts: Sequence["Dataset"]) -> "Dataset":
        if not parts:
            return cls.empty()
        tags = (tag for part in parts for tag in part.provenance)
        provenance = tuple(dict.fromkeys(tags))
        return cls(
            np.concatenate([p.frames for p in parts]),
            np.concatenate([p.angles for p in parts]),
            provenance,
        )

    def __len__(self) -> int:
        return self.angles.shape[0]

    def __getitem__(self, index: int) -> Sample:
        return Sample(self.frames[index], float(self.angles[index]))

    def __iter__(self) -> Iterator[Sample]:
        for index in range(len(self)):
            yield self[index]

    def __eq__(self, other: object) -> bool:
        # Provenance is bookkeeping; two datasets are equal if their samples are.
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.frames, other.frames) and np.array_equal(
            self.angles, other.angles
        )

    def subset(self, indices: npt.ArrayLike, tag: str | None = None) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        provenance = self.provenance
        if tag is not None and tag not in provenance:
            provenance = (*provenance, tag)
        return Dataset(self.frames[indices], self.angles[indices], provenance)


def angle_bins(angles: npt.ArrayLike, bins: int) -> np.ndarray:
    """Index of the equal-width histogram bin over [-1, 1] for every angle.
    +1.0 falls into the last bin."""
    angles = np.asarray(angles, dtype=np.float64)
    index = np.floor((angles + 1.0) / 2.0 * bins).astype(np.int64)
    return np.clip(index, 0, bins - 1)


def balance(
    dataset: Dataset, bins: int = DEFAULT_BINS, cap_per_bin: int = 400, seed: int = 0
) -> Dataset:
    """Truncate every histogram bin to `cap_per_bin` samples by uniform random
    removal. Survivors keep their relative order."""
    if bins < 3:
        raise ValueError(f"Balancing needs at least 3 bins, got {bins}")
    if cap_per_bin < 1:
        raise ValueError(f"cap_per_bin must be positive, got {cap_per_bin}")
    if len(dataset) == 0:
        raise EmptyDatasetError("Cannot balance an empty dataset")

    rng = np.random.default_rng(seed)
    index = angle_bins(dataset.angles, bins)
    keep = np.ones(len(dataset), dtype=bool)
    for b in range(bins):
        members = np.flatnonzero(index == b)
        if members.size <= cap_per_bin:
            continue
        dropped = rng.choice(members, size=members.size - cap_per_bin, replace=False)
        keep[dropped] = False

    survivors = np.flatnonzero(keep)
    logger.debug(
        "balance: %d of %d samples survive (cap %d per bin)",
        survivors.size,
        len(dataset),
        cap_per_bin,
    )
    return dataset.subset(survivors, "balanced")


def mirror_frames(frames: npt.ArrayLike) -> np.ndarray:
    """Horizontal mirror of a frame (H, W, C) or a frame stack (N, H, W, C)."""
    frames = np.asarray(frames)
    return np.flip(frames, axis=frames.ndim - 2)


def mirror_expand(dataset: Dataset) -> Dataset:
    """Append the horizontal mirror of every sample with its angle negated."""
    return Dataset(
        np.concatenate([dataset.frames, mirror_frames(dataset.frames)]),
        # 0.0 - a keeps mirrored zeros at +0.0
        np.concatenate([dataset.angles, np.float32(0.0) - dataset.angles]),
        (*dataset.provenance, "mirrored"),
    )


def split(
    dataset: Dataset, train_count: int, test_count: int, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Disjoint random train/test subsets."""
    if train_count < 0 or test_count < 0:
        raise SplitSizeError("Split counts must be non-negative")
    if train_count + test_count > len(dataset):
        raise SplitSizeError(
            f"{train_count} + {test_count} samples requested"
            f" from a dataset of {len(dataset)}"
        )

    order = np.random.default_rng(seed).permutation(len(dataset))
    return (
        dataset.subset(order[:train_count], "train"),
        dataset.subset(order[train_count : train_count + test_count], "test"),
    )


def split_fraction(
    dataset: Dataset, test_fraction: float, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """`split` with the test share given as a fraction; 80,000 at 0.1875 gives
    65,000/15,000."""
    if not 0.0 <= test_fraction < 1.0:
        raise SplitSizeError(f"Test fraction must be in [0, 1), got {test_fraction}")
    test_count = int(round(len(dataset) * test_fraction))
    return split(dataset, len(dataset) - test_count, test_count, seed)
