"""Pure-pursuit steering oracle: labels frames and drives the reference runs."""

from .track import Track
from .vehicle import VehicleParams, VehicleState, vehicle_pose, world_to_vehicle

DEFAULT_LOOKAHEAD = 12.0


def pursuit_curvature(
    track: Track, state: VehicleState, lookahead: float = DEFAULT_LOOKAHEAD
) -> float:
    """Curvature of the arc from the vehicle, tangent to its heading, through the
    lane-center point `lookahead` meters further along the track."""
    if lookahead <= 0:
        raise ValueError(f"Lookahead must be positive, got {lookahead}")
    x, y, _ = track.pose_at(state.s + lookahead)
    fx, ry = world_to_vehicle(vehicle_pose(track, state), x, y)
    fx, ry = float(fx), float(ry)
    return 2.0 * ry / (fx * fx + ry * ry)


def oracle_steering(
    track: Track,
    state: VehicleState,
    lookahead: float = DEFAULT_LOOKAHEAD,
    params: VehicleParams | None = None,
) -> float:
    """Steering angle in [-1, 1]: pursuit curvature over full-lock curvature,
    clamped."""
    if params is None:
        params = VehicleParams()
    angle = pursuit_curvature(track, state, lookahead) / params.full_lock_curvature
    return min(1.0, max(-1.0, angle))
