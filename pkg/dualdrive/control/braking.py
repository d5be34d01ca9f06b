"""Detection list to brake decision.

Proximity is read from the detector's confidence alone: a closer vehicle is
larger on screen and the detector is more certain of it."""

from typing import Iterable

from pydantic import AliasChoices, BaseModel, Field, model_validator

from .types import FRAME_HEIGHT, FRAME_WIDTH, VEHICLE_CLASS_ID, Detection


class BrakeConfig(BaseModel):
    threshold: float = Field(default=0.8, gt=0.0, lt=1.0)
    lane_band: tuple[float, float] = Field(
        default=(53.0, 107.0),
        validation_alias=AliasChoices("lane-band", "lane_band"),
    )
    horizon_row: float = Field(
        default=54.0,
        ge=0.0,
        le=FRAME_HEIGHT,
        validation_alias=AliasChoices("horizon-row", "horizon_row"),
    )
    vehicle_class_id: int = Field(
        default=VEHICLE_CLASS_ID,
        validation_alias=AliasChoices("vehicle-class-id", "vehicle_class_id"),
    )

    @model_validator(mode="after")
    def _check_band(self) -> "BrakeConfig":
        lo, hi = self.lane_band
        if not 0.0 <= lo < hi <= FRAME_WIDTH:
            raise ValueError(f"lane band must satisfy 0 <= low < high <= {FRAME_WIDTH}")
        return self


def relevant(
    detections: Iterable[Detection], config: BrakeConfig | None = None
) -> list[Detection]:
    """Vehicles in the ego lane band whose bottom edge lies below the horizon."""
    if config is None:
        config = BrakeConfig()
    lo, hi = config.lane_band
    return [
        det
        for det in detections
        if det.class_id == config.vehicle_class_id
        and lo <= det.center_x <= hi
        and det.bbox[3] > config.horizon_row
    ]


def brake_decision(
    detections: Iterable[Detection], config: BrakeConfig | None = None
) -> bool:
    if config is None:
        config = BrakeConfig()
    return any(
        det.confidence > config.threshold for det in relevant(detections, config)
    )
