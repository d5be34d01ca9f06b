"""DDDS1 dataset files.

    magic    b"DDDS1"
    count    uint32, little-endian
    samples  count x (19200 frame bytes, row-major 120x160, then float32 LE angle)
"""

import logging
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .dataset import FRAME_SHAPE, Dataset

logger = logging.getLogger(__name__)

MAGIC = b"DDDS1"

_HEADER = struct.Struct("<5sI")

FRAME_BYTES = FRAME_SHAPE[0] * FRAME_SHAPE[1] * FRAME_SHAPE[2]

RECORD_DTYPE = np.dtype([("frame", np.uint8, (FRAME_BYTES,)), ("angle", "<f4")])


class DatasetFormatError(ValueError):
    """Base class for dataset file errors."""


class DatasetMagicError(DatasetFormatError):
    """The data does not start with the DDDS1 magic."""


class DatasetTruncatedError(DatasetFormatError):
    """Fewer sample records than the header declares."""


def file_size(count: int) -> int:
    return _HEADER.size + count * RECORD_DTYPE.itemsize


def dataset_to_bytes(dataset: Dataset) -> bytes:
    records = np.empty(len(dataset), dtype=RECORD_DTYPE)
    records["frame"] = dataset.frames.reshape(len(dataset), FRAME_BYTES)
    records["angle"] = dataset.angles
    return _HEADER.pack(MAGIC, len(dataset)) + records.tobytes()


def dataset_from_bytes(data: bytes) -> Dataset:
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise DatasetMagicError("Not a DDDS1 dataset")
    if len(data) < _HEADER.size:
        raise DatasetTruncatedError("Header is incomplete")

    _, count = _HEADER.unpack_from(data, 0)
    expected = file_size(count)
    if len(data) < expected:
        raise DatasetTruncatedError(
            f"Header declares {count} samples ({expected} bytes),"
            f" got {len(data)} bytes"
        )

    records = np.frombuffer(data, dtype=RECORD_DTYPE, count=count, offset=_HEADER.size)
    frames = records["frame"].reshape(count, *FRAME_SHAPE).copy()
    angles = records["angle"].astype(np.float32)
    return Dataset(frames, angles)


def write_dataset(dataset: Dataset, sink: BinaryIO):
    sink.write(dataset_to_bytes(dataset))


def read_dataset(source: BinaryIO) -> Dataset:
    return dataset_from_bytes(source.read())


def save_dataset(dataset: Dataset, path: Path):
    logger.debug("Writing %d samples to '%s'", len(dataset), path)
    with path.open("wb") as f:
        write_dataset(dataset, f)


def load_dataset(path: Path) -> Dataset:
    logger.debug("Reading dataset '%s'", path)
    with path.open("rb") as f:
        return read_dataset(f)
