"""PGM (P5) frame dumps and feature-map montages."""

import logging
import math
from pathlib import Path
from typing import Sequence

import cv2
import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)


class ImageWriteError(OSError):
    """OpenCV could not encode or write the image."""


def write_pgm(path: Path, image: npt.ArrayLike):
    """Write a single-channel uint8 image (H, W) or (H, W, 1) as binary PGM."""
    image = np.asarray(image)
    if image.ndim == 3 and image.shape[2] == 1:
        image = image[:, :, 0]
    if image.ndim != 2 or image.dtype != np.uint8:
        raise ValueError(
            f"Expected a single-channel uint8 image, got {image.dtype} {image.shape}"
        )

    logger.debug("Writing %dx%d PGM to '%s'", image.shape[1], image.shape[0], path)
    if not cv2.imwrite(str(path), image, [cv2.IMWRITE_PXM_BINARY, 1]):
        raise ImageWriteError(f"Could not write '{path}'")


def read_pgm(path: Path) -> npt.NDArray[np.uint8]:
    image = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if image is None:
        raise FileNotFoundError(f"Could not read '{path}'")
    return image


def montage(
    maps: Sequence[npt.NDArray[np.uint8]] | np.ndarray,
    columns: int | None = None,
    border: int = 1,
) -> np.ndarray:
    """Tile equally sized maps into one image, row by row, separated by black
    borders."""
    maps = np.asarray(maps)
    if maps.ndim != 3 or maps.shape[0] == 0:
        raise ValueError(
            f"Expected a non-empty (count, h, w) stack, got shape {maps.shape}"
        )
    count, h, w = maps.shape
    if columns is None:
        columns = math.ceil(math.sqrt(count))
    rows = math.ceil(count / columns)

    height = rows * (h + border) + border
    width = columns * (w + border) + border
    tiled = np.zeros((height, width), dtype=np.uint8)
    for index in range(count):
        r, c = divmod(index, columns)
        top = border + r * (h + border)
        left = border + c * (w + border)
        tiled[top : top + h, left : left + w] = maps[index]
    return tiled
