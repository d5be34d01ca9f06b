"""Training-time image augmentation: with a configurable chance, one of zoom,
horizontal flip or brightness is applied to a sample."""

import enum
from typing import Protocol

import cv2
import numpy as np
import numpy.typing as npt
from pydantic import AliasChoices, BaseModel, Field, field_validator

from .dataset import Sample, mirror_frames


class Transform(enum.IntEnum):
    ZOOM = 0
    FLIP = 1
    BRIGHTNESS = 2


class AugmentRng(Protocol):
    """The subset of `numpy.random.Generator` that augmentation draws from."""

    def random(self) -> float: ...

    def integers(self, low: int, high: int | None = None) -> int: ...

    def uniform(self, low: float, high: float) -> float: ...


class AugmentConfig(BaseModel):
    probability: float = Field(default=0.5, ge=0.0, le=1.0)
    zoom_range: tuple[float, float] = Field(
        default=(1.0, 1.3),
        validation_alias=AliasChoices("zoom-range", "zoom_range"),
    )
    brightness_range: tuple[float, float] = Field(
        default=(0.7, 1.3),
        validation_alias=AliasChoices("brightness-range", "brightness_range"),
    )

    @field_validator("zoom_range")
    @classmethod
    def _check_zoom(cls, value: tuple[float, float]) -> tuple[float, float]:
        lo, hi = value
        if lo < 1.0 or hi < lo:
            raise ValueError("zoom range must satisfy 1 <= low <= high")
        return value

    @field_validator("brightness_range")
    @classmethod
    def _check_brightness(cls, value: tuple[float, float]) -> tuple[float, float]:
        lo, hi = value
        if lo <= 0.0 or hi < lo:
            raise ValueError("brightness range must satisfy 0 < low <= high")
        return value


def zoom(frame: npt.NDArray[np.uint8], factor: float) -> npt.NDArray[np.uint8]:
    """Center-crop by `factor` and resize back to the original size (bilinear)."""
    h, w = frame.shape[:2]
    crop_h = max(1, int(round(h / factor)))
    crop_w = max(1, int(round(w / factor)))
    top = (h - crop_h) // 2
    left = (w - crop_w) // 2
    crop = np.ascontiguousarray(frame[top : top + crop_h, left : left + crop_w])
    resized = cv2.resize(crop, (w, h), interpolation=cv2.INTER_LINEAR)
    # OpenCV drops the trailing single-channel axis.
    return resized.reshape(frame.shape)


def brightness(frame: npt.NDArray[np.uint8], factor: float) -> npt.NDArray[np.uint8]:
    scaled = np.rint(frame.astype(np.float32) * np.float32(factor))
    return np.clip(scaled, 0, 255).astype(np.uint8)


def apply_transform(
    sample: Sample, transform: Transform, factor: float = 1.0
) -> Sample:
    """Apply one transform. `factor` is ignored by FLIP."""
    if transform == Transform.ZOOM:
        return Sample(zoom(sample.frame, factor), sample.angle)
    if transform == Transform.FLIP:
        return Sample(mirror_frames(sample.frame), 0.0 - sample.angle)
    return Sample(brightness(sample.frame, factor), sample.angle)


def augment(
    sample: Sample, rng: AugmentRng, config: AugmentConfig | None = None
) -> Sample:
    """With probability `config.probability`, apply exactly one transform chosen
    uniformly. Otherwise the sample is returned unchanged."""
    if config is None:
        config = AugmentConfig()

    if rng.random() >= config.probability:
        return sample

    transform = Transform(int(rng.integers(0, len(Transform))))
    if transform == Transform.ZOOM:
        factor = float(rng.uniform(*config.zoom_range))
    elif transform == Transform.BRIGHTNESS:
        factor = float(rng.uniform(*config.brightness_range))
    else:
        factor = 1.0

    return apply_transform(sample, transform, factor)
