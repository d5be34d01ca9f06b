"""Kinematic bicycle model in track coordinates."""

import math
from dataclasses import dataclass, replace

import numpy as np
import numpy.typing as npt
from pydantic import AliasChoices, BaseModel, Field

from dualdrive.control.types import Command, Key
from .track import Track

DT = 0.1

OFF_LANE_LIMIT = 1.0


class VehicleParams(BaseModel):
    wheelbase: float = Field(default=2.5, gt=0.0)
    max_steer: float = Field(
        default=0.61, gt=0.0, validation_alias=AliasChoices("max-steer", "max_steer")
    )
    v_max: float = Field(
        default=30.0, gt=0.0, validation_alias=AliasChoices("v-max", "v_max")
    )
    forward_accel: float = Field(
        default=2.0,
        ge=0.0,
        validation_alias=AliasChoices("forward-accel", "forward_accel"),
    )
    slow_decel: float = Field(
        default=4.0, ge=0.0, validation_alias=AliasChoices("slow-decel", "slow_decel")
    )
    brake_decel: float = Field(
        default=8.0,
        ge=0.0,
        validation_alias=AliasChoices("brake-decel", "brake_decel"),
    )
    drag: float = Field(default=0.5, ge=0.0)

    @property
    def full_lock_curvature(self) -> float:
        """Path curvature per unit steering, linearized at straight ahead."""
        return self.max_steer / self.wheelbase


@dataclass(frozen=True)
class VehicleState:
    """`s` is the distance driven along the centerline (not wrapped on loops),
    `d` the offset from the lane center (positive right), `psi` the heading
    relative to the road (positive right) and `v` the speed."""

    s: float = 0.0
    d: float = 0.0
    psi: float = 0.0
    v: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.s, self.d, self.psi, self.v)):
            raise ValueError(f"Non-finite vehicle state {self}")
        if self.v < 0:
            raise ValueError(f"Negative speed {self.v}")

    def realigned(self) -> "VehicleState":
        """Back on the lane center, aligned with the road, same speed."""
        return replace(self, d=0.0, psi=0.0)

    def mirrored(self) -> "VehicleState":
        return replace(self, d=-self.d, psi=-self.psi)


@dataclass(frozen=True)
class LeadVehicle:
    """A vehicle in the ego lane, `gap` meters ahead of the ego front."""

    gap: float
    speed: float = 0.0
    width: float = 2.5
    height: float = 3.2

    def advanced(self, ego_distance: float, dt: float = DT) -> "LeadVehicle":
        return replace(self, gap=self.gap + self.speed * dt - ego_distance)


def acceleration(command: Command, params: VehicleParams) -> float:
    if Key.HARD_BRAKE in command:
        return -params.brake_decel
    if Key.SLOW in command:
        return -params.slow_decel
    if Key.FORWARD in command:
        return params.forward_accel
    return -params.drag


def advance(
    state: VehicleState,
    command: Command,
    track: Track,
    dt: float = DT,
    params: VehicleParams | None = None,
) -> VehicleState:
    """One tick. The speed is updated first and the new speed moves the vehicle."""
    if dt <= 0:
        raise ValueError(f"Time step must be positive, got {dt}")
    if params is None:
        params = VehicleParams()

    v = min(max(state.v + acceleration(command, params) * dt, 0.0), params.v_max)
    kappa = float(track.curvature_at(state.s))
    yaw_rate = v / params.wheelbase * math.tan(params.max_steer * command.steer)
    psi = state.psi + yaw_rate * dt - kappa * v * dt
    d = state.d + v * math.sin(psi) * dt
    s = state.s + v * math.cos(psi) * dt
    return VehicleState(s=s, d=d, psi=psi, v=v)


def off_lane(state: VehicleState) -> bool:
    return abs(state.d) > OFF_LANE_LIMIT


# pylint: disable-next=unused-argument
def collision(state: VehicleState, lead: LeadVehicle) -> bool:
    """The gap is measured from the ego front; the ego state does not enter."""
    return lead.gap <= 0.0


def vehicle_pose(track: Track, state: VehicleState) -> tuple[float, float, float]:
    """World position and heading of the vehicle."""
    x, y, h = track.pose_at(state.s)
    xc, yc, phi = float(x), float(y), float(h)
    return xc - state.d * math.sin(phi), yc + state.d * math.cos(phi), phi + state.psi


def world_to_vehicle(
    pose: tuple[float, float, float], wx: npt.ArrayLike, wy: npt.ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    """World points to vehicle-frame (forward, right) coordinates."""
    x, y, h = pose
    dx = np.asarray(wx, dtype=np.float64) - x
    dy = np.asarray(wy, dtype=np.float64) - y
    ch, sh = math.cos(h), math.sin(h)
    return dx * ch + dy * sh, -dx * sh + dy * ch


def vehicle_to_world(
    pose: tuple[float, float, float], fx: npt.ArrayLike, ry: npt.ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    x, y, h = pose
    fx = np.asarray(fx, dtype=np.float64)
    ry = np.asarray(ry, dtype=np.float64)
    ch, sh = math.cos(h), math.sin(h)
    return x + fx * ch - ry * sh, y + fx * sh + ry * ch
