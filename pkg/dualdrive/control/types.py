import enum
import math
from dataclasses import dataclass

FRAME_WIDTH = 160
FRAME_HEIGHT = 120

VEHICLE_CLASS_ID = 3


class Key(enum.Enum):
    FORWARD = "W"
    LEFT = "A"
    RIGHT = "D"
    SLOW = "S"
    HARD_BRAKE = "SPACE"


class NonFiniteAngleError(ValueError):
    """The steering angle is NaN or infinite."""


class InvalidCommandError(ValueError):
    """A key combination that cannot be pressed at once: LEFT with RIGHT, or
    SLOW with HARD_BRAKE."""


@dataclass(frozen=True)
class Command:
    """Keys held during one tick.

    `steer` is the clamped continuous angle the keys were derived from; the
    vehicle model steers with it. `slow_ticks` is the length of the slow-down
    pulse when SLOW is held."""

    keys: frozenset[Key]
    steer: float = 0.0
    slow_ticks: int = 0

    def __post_init__(self):
        if Key.LEFT in self.keys and Key.RIGHT in self.keys:
            raise InvalidCommandError("LEFT and RIGHT pressed together")
        if Key.SLOW in self.keys and Key.HARD_BRAKE in self.keys:
            raise InvalidCommandError("SLOW and HARD_BRAKE pressed together")
        if not math.isfinite(self.steer) or abs(self.steer) > 1.0:
            raise ValueError(f"Steering {self.steer} outside [-1, 1]")

    def __contains__(self, key: Key) -> bool:
        return key in self.keys

    @property
    def key_names(self) -> str:
        return "+".join(key.value for key in Key if key in self.keys)


IDLE = Command(frozenset())


@dataclass(frozen=True)
class Detection:
    """One detector output. The bbox is (x_min, y_min, x_max, y_max) in frame
    pixels with the origin at the top-left corner."""

    class_id: int
    bbox: tuple[float, float, float, float]
    confidence: float

    def __post_init__(self):
        x_min, y_min, x_max, y_max = self.bbox
        if not (x_min < x_max and y_min < y_max):
            raise ValueError(f"Degenerate bounding box {self.bbox}")
        if x_min < 0 or y_min < 0 or x_max > FRAME_WIDTH or y_max > FRAME_HEIGHT:
            raise ValueError(
                f"Bounding box {self.bbox} outside the"
                f" {FRAME_WIDTH}x{FRAME_HEIGHT} frame"
            )
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"Confidence {self.confidence} outside [0, 1]")

    @property
    def center_x(self) -> float:
        return (self.bbox[0] + self.bbox[2]) / 2

    @property
    def area(self) -> float:
        x_min, y_min, x_max, y_max = self.bbox
        return (x_max - x_min) * (y_max - y_min)
