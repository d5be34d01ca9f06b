"""Piecewise-constant-curvature tracks.

World frame: heading h points along (cos h, sin h) and the right-hand normal is
(-sin h, cos h). A positive curvature bends the road to the right, so the
heading increases along it."""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import numpy.typing as npt

from dualdrive.project.error import UnknownTrackException

MAX_CURVATURE = 0.1

DEFAULT_LANE_WIDTH = 3.5


@dataclass(frozen=True)
class Segment:
    length: float
    curvature: float = 0.0


@dataclass(frozen=True)
class Track:
    name: str
    segments: tuple[Segment, ...]
    lane_width: float = DEFAULT_LANE_WIDTH
    loop: bool = False
    _starts: np.ndarray = field(init=False, repr=False, compare=False)
    _poses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.segments:
            raise ValueError(f"Track '{self.name}' has no segments")
        for segment in self.segments:
            if segment.length <= 0:
                raise ValueError(
                    f"Track '{self.name}': segment length must be positive"
                )
            if abs(segment.curvature) > MAX_CURVATURE:
                raise ValueError(
                    f"Track '{self.name}': curvature {segment.curvature}"
                    f" exceeds {MAX_CURVATURE}"
                )
        if self.lane_width <= 0:
            raise ValueError("Lane width must be positive")

        starts = np.zeros(len(self.segments))
        poses = np.zeros((len(self.segments), 3))
        x = y = h = 0.0
        offset = 0.0
        for i, segment in enumerate(self.segments):
            starts[i] = offset
            poses[i] = (x, y, h)
            x, y, h = _segment_end(x, y, h, segment)
            offset += segment.length

        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_poses", poses)

    @property
    def length(self) -> float:
        return float(self._starts[-1] + self.segments[-1].length)

    def wrap(self, s: npt.ArrayLike) -> np.ndarray:
        """Arc length folded onto the track. Open tracks extend their last
        segment."""
        s = np.asarray(s, dtype=np.float64)
        if self.loop:
            return np.mod(s, self.length)
        return np.maximum(s, 0.0)

    def _locate(self, s: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
        s = self.wrap(s)
        index = np.searchsorted(self._starts, s, side="right") - 1
        index = np.clip(index, 0, len(self.segments) - 1)
        return index, s - self._starts[index]

    def curvature_at(self, s: npt.ArrayLike) -> np.ndarray:
        index, _ = self._locate(s)
        curvatures = np.array([seg.curvature for seg in self.segments])
        return curvatures[index]

    def pose_at(self, s: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Centerline position and heading at arc length `s`, vectorized and in
        closed form."""
        index, u = self._locate(s)
        x0, y0, h0 = self._poses[index].T
        k = self.curvature_at(s)

        straight = k == 0.0
        safe_k = np.where(straight, 1.0, k)
        h = h0 + k * u
        x = np.where(
            straight, x0 + u * np.cos(h0), x0 + (np.sin(h) - np.sin(h0)) / safe_k
        )
        y = np.where(
            straight, y0 + u * np.sin(h0), y0 - (np.cos(h) - np.cos(h0)) / safe_k
        )
        return x, y, h

    def mirrored(self) -> "Track":
        """The left-right mirror image: every curvature negated."""
        segments = tuple(Segment(seg.length, -seg.curvature) for seg in self.segments)
        return Track(
            name=f"{self.name}-mirrored",
            segments=segments,
            lane_width=self.lane_width,
            loop=self.loop,
        )


def _segment_end(
    x: float, y: float, h: float, segment: Segment
) -> tuple[float, float, float]:
    k, length = segment.curvature, segment.length
    if k == 0.0:
        return x + length * math.cos(h), y + length * math.sin(h), h
    h1 = h + k * length
    x1 = x + (math.sin(h1) - math.sin(h)) / k
    y1 = y - (math.cos(h1) - math.cos(h)) / k
    return x1, y1, h1


def _chicane(curvature: float, length: float) -> list[Segment]:
    # Heading returns to zero and the lateral displacement cancels.
    return [
        Segment(length, curvature),
        Segment(2 * length, -curvature),
        Segment(length, curvature),
    ]


def _rounded_rectangle(
    long_side: float, short_side: float, radius: float, chicane: list[Segment]
) -> tuple[Segment, ...]:
    corner = Segment(radius * math.pi / 2, 1.0 / radius)
    first, second = long_side * 2 / 3, long_side / 3
    segments: list[Segment] = []
    for _ in range(2):
        segments += [
            Segment(first),
            *chicane,
            Segment(second),
            corner,
            Segment(short_side),
            corner,
        ]
    return tuple(segments)


def straight_track() -> Track:
    return Track("straight", (Segment(10000.0),), loop=False)


def standard_track() -> Track:
    """Highway loop: long straights, gentle chicanes and 60 m corners."""
    segments = _rounded_rectangle(300.0, 150.0, 60.0, _chicane(1 / 100, 40.0))
    return Track("standard", segments, loop=True)


def city_track() -> Track:
    """City loop: short blocks, tight chicanes and 25 m corners."""
    segments = _rounded_rectangle(120.0, 60.0, 25.0, _chicane(1 / 40, 20.0))
    return Track("city", segments, loop=True)


TRACKS: dict[str, Callable[[], Track]] = {
    "straight": straight_track,
    "standard": standard_track,
    "highway": standard_track,
    "city": city_track,
}


def get_track(name: str) -> Track:
    try:
        return TRACKS[name]()
    except KeyError as ex:
        raise UnknownTrackException(
            f"Unknown track '{name}', expected one of {sorted(TRACKS)}"
        ) from ex
