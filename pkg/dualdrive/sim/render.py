"""Grayscale frame renderer.

Every pixel below the horizon is cast onto the ground plane and classified by
its position relative to the nearest centerline sample: lane boundary marking,
dashed center marking, road, or grass. Flat shading, no anti-aliasing."""

import enum
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from .camera import Camera
from .detections import lead_bbox, lead_position
from .track import Track
from .vehicle import LeadVehicle, VehicleState, vehicle_pose, vehicle_to_world

SKY = 170.0
GRASS = 110.0
ROAD = 60.0
MARKING = 230.0
LEAD = 35.0

SHOULDER = 0.3
MARKING_HALF_WIDTH = 0.12
CENTER_HALF_WIDTH = 0.08
DASH_PERIOD = 6.0
DASH_LENGTH = 3.0

RENDER_RANGE = 80.0
SAMPLE_STEP = 0.5
SAMPLES_BEHIND = 10.0
SAMPLES_AHEAD = 30.0

PUDDLE_CELL = 7.0
PUDDLE_TABLE_SIZE = 4096
PUDDLE_CHANCE = 0.6
PUDDLE_SHADE = 100.0
PUDDLE_MIX = 0.35
HAZE_SHADE = 120.0
HAZE_MIX = 0.8

HEADLIGHT_RANGE = 25.0
HEADLIGHT_HALF_ANGLE = math.radians(20.0)
NIGHT_FACTOR = 0.25


class TimeOfDay(enum.Enum):
    DAY = "day"
    NIGHT = "night"


class Weather(enum.Enum):
    SUNNY = "sunny"
    RAIN = "rain"
    CLEAR_SKY = "clear_sky"


VALID_CONDITIONS = frozenset(
    [
        (TimeOfDay.DAY, Weather.SUNNY),
        (TimeOfDay.DAY, Weather.RAIN),
        (TimeOfDay.NIGHT, Weather.CLEAR_SKY),
    ]
)


@dataclass(frozen=True)
class SceneConditions:
    time: TimeOfDay = TimeOfDay.DAY
    weather: Weather = Weather.SUNNY
    seed: int = 0

    def __post_init__(self):
        if (self.time, self.weather) not in VALID_CONDITIONS:
            labels = (f"{t.value},{w.value}" for t, w in VALID_CONDITIONS)
            raise ValueError(
                f"Unsupported conditions {self.label},"
                f" expected one of: {', '.join(sorted(labels))}"
            )

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SceneConditions":
        """Parse `time,weather`, e.g. "day,sunny", "day/rain" or
        "night:clear-sky"."""
        try:
            parts = re.split(r"[,/:]", text)
            time_text, weather_text = (
                part.strip().lower().replace("-", "_") for part in parts
            )
            return cls(TimeOfDay(time_text), Weather(weather_text), seed)
        except ValueError as ex:
            raise ValueError(f"Invalid conditions '{text}': {ex}") from ex

    @property
    def label(self) -> str:
        return f"{self.time.value},{self.weather.value}"


class PuddleTable(NamedTuple):
    present: np.ndarray
    along: np.ndarray
    lateral: np.ndarray
    semi_along: np.ndarray
    semi_lateral: np.ndarray


@lru_cache(maxsize=16)
def puddle_table(seed: int) -> PuddleTable:
    """One optional elliptical puddle per 7 m cell of road, repeating every
    4096 cells."""
    rng = np.random.default_rng(seed)
    n = PUDDLE_TABLE_SIZE
    semi_along = rng.uniform(1.0, 2.5, n)
    return PuddleTable(
        present=rng.random(n) < PUDDLE_CHANCE,
        along=rng.uniform(semi_along, PUDDLE_CELL - semi_along),
        lateral=rng.uniform(-1.2, 1.2, n),
        semi_along=semi_along,
        semi_lateral=rng.uniform(0.4, 1.2, n),
    )


class RoadCoordinates(NamedTuple):
    lateral: np.ndarray
    along: np.ndarray


def road_coordinates(
    track: Track, state: VehicleState, fx: npt.ArrayLike, ry: npt.ArrayLike
) -> RoadCoordinates:
    """Signed lateral offset from the centerline and arc length of vehicle-frame
    ground points."""
    wx, wy = vehicle_to_world(vehicle_pose(track, state), fx, ry)
    s_samples = state.s + np.arange(
        -SAMPLES_BEHIND, RENDER_RANGE + SAMPLES_AHEAD, SAMPLE_STEP
    )
    cx, cy, ch = track.pose_at(s_samples)

    d2 = (wx[:, np.newaxis] - cx) ** 2 + (wy[:, np.newaxis] - cy) ** 2
    nearest = np.argmin(d2, axis=1)
    ex = wx - cx[nearest]
    ey = wy - cy[nearest]
    heading = ch[nearest]
    lateral = -ex * np.sin(heading) + ey * np.cos(heading)
    along = (
        track.wrap(s_samples[nearest]) + ex * np.cos(heading) + ey * np.sin(heading)
    )
    return RoadCoordinates(lateral, along)


def _ground_shade(track: Track, coords: RoadCoordinates) -> np.ndarray:
    lateral, along = coords
    half = track.lane_width / 2
    shade = np.full(lateral.shape, GRASS)
    shade[np.abs(lateral) <= half + SHOULDER] = ROAD

    boundary = np.abs(np.abs(lateral) - half) <= MARKING_HALF_WIDTH
    center = np.abs(lateral) <= CENTER_HALF_WIDTH
    dashes = center & (np.mod(along, DASH_PERIOD) < DASH_LENGTH)
    shade[boundary | dashes] = MARKING
    return shade


def _puddle_mask(track: Track, coords: RoadCoordinates, seed: int) -> np.ndarray:
    lateral, along = coords
    table = puddle_table(seed)
    cell = np.floor(along / PUDDLE_CELL).astype(np.int64)
    index = np.mod(cell, PUDDLE_TABLE_SIZE)
    du = (along - cell * PUDDLE_CELL - table.along[index]) / table.semi_along[index]
    dv = (lateral - table.lateral[index]) / table.semi_lateral[index]
    on_road = np.abs(lateral) <= track.lane_width / 2 + SHOULDER
    return table.present[index] & on_road & (du * du + dv * dv <= 1.0)


def render(
    track: Track,
    state: VehicleState,
    conditions: SceneConditions | None = None,
    leads: Sequence[LeadVehicle] = (),
    camera: Camera | None = None,
) -> npt.NDArray[np.uint8]:
    """Render the (height, width, 1) uint8 camera frame."""
    if conditions is None:
        conditions = SceneConditions()
    if camera is None:
        camera = Camera()

    ground_x, ground_y, hits = camera.ground_grid
    ground = hits & (ground_x <= RENDER_RANGE)

    image = np.full((camera.height, camera.width), SKY)
    image[hits] = GRASS
    # Per-pixel distance and bearing of what the pixel shows, for the headlights.
    dist_x = np.where(hits, ground_x, np.inf)
    dist_y = np.where(hits, ground_y, 0.0)

    coords = road_coordinates(track, state, ground_x[ground], ground_y[ground])
    shade = _ground_shade(track, coords)
    if conditions.weather == Weather.RAIN:
        puddles = _puddle_mask(track, coords, conditions.seed)
        wet = PUDDLE_MIX * shade[puddles] + (1.0 - PUDDLE_MIX) * PUDDLE_SHADE
        shade[puddles] = wet
    image[ground] = shade

    # Far leads first so nearer ones are painted over them.
    rows = np.arange(camera.height)[:, np.newaxis] + 0.5
    cols = np.arange(camera.width)[np.newaxis, :] + 0.5
    for lead in sorted(leads, key=lambda lead: -lead.gap):
        if lead.gap <= 0:
            continue
        bbox = lead_bbox(track, state, lead, camera)
        if bbox is None:
            continue
        x_min, y_min, x_max, y_max = bbox
        mask = (cols >= x_min) & (cols <= x_max) & (rows >= y_min) & (rows <= y_max)
        image[mask] = LEAD
        fx, ry = lead_position(track, state, lead)
        dist_x[mask] = fx
        dist_y[mask] = ry

    if conditions.weather == Weather.RAIN:
        image = HAZE_MIX * image + (1.0 - HAZE_MIX) * HAZE_SHADE

    if conditions.time == TimeOfDay.NIGHT:
        ahead = np.where(np.isfinite(dist_x), dist_x, 1.0)
        bearing = np.abs(np.arctan2(dist_y, ahead))
        lit = (dist_x <= HEADLIGHT_RANGE) & (bearing <= HEADLIGHT_HALF_ANGLE)
        image = np.where(lit, image, image * NIGHT_FACTOR)

    frame = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    return frame[:, :, np.newaxis]
