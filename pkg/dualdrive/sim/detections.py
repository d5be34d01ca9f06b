"""Ground-truth detector. Stands in for an object detector: it reports every lead
vehicle whose rear face projects into the frame, with a confidence that grows
with the on-screen area."""

from typing import Sequence

import numpy as np

from dualdrive.control.types import VEHICLE_CLASS_ID, Detection
from .camera import Camera
from .track import Track
from .vehicle import LeadVehicle, VehicleState, vehicle_pose, world_to_vehicle

MIN_DEPTH = 0.1

CONFIDENCE_FLOOR = 0.3
CONFIDENCE_SPAN = 0.69
SATURATION_AREA = 3000.0


def lead_position(
    track: Track, state: VehicleState, lead: LeadVehicle
) -> tuple[float, float]:
    """Vehicle-frame (forward, right) position of the center of the lead's rear
    face."""
    x, y, _ = track.pose_at(state.s + lead.gap)
    fx, ry = world_to_vehicle(vehicle_pose(track, state), x, y)
    return float(fx), float(ry)


def lead_bbox(
    track: Track, state: VehicleState, lead: LeadVehicle, camera: Camera
) -> tuple[float, float, float, float] | None:
    """Projected rear face clipped to the frame, or None when it is behind the
    camera or entirely outside the frame."""
    fx, ry = lead_position(track, state, lead)
    if fx <= MIN_DEPTH:
        return None

    half = lead.width / 2
    xs = np.full(4, fx)
    ys = np.array([ry - half, ry + half, ry - half, ry + half])
    zs = np.array([0.0, 0.0, lead.height, lead.height])
    cols, rows, depth = camera.project(xs, ys, zs)
    if np.any(depth <= MIN_DEPTH):
        return None

    x_min = float(np.clip(cols.min(), 0, camera.width))
    x_max = float(np.clip(cols.max(), 0, camera.width))
    y_min = float(np.clip(rows.min(), 0, camera.height))
    y_max = float(np.clip(rows.max(), 0, camera.height))
    if x_min >= x_max or y_min >= y_max:
        return None
    return x_min, y_min, x_max, y_max


def confidence_for_area(area: float) -> float:
    return CONFIDENCE_FLOOR + CONFIDENCE_SPAN * min(1.0, area / SATURATION_AREA)


def truth_detections(
    track: Track,
    state: VehicleState,
    leads: Sequence[LeadVehicle],
    camera: Camera | None = None,
) -> list[Detection]:
    """One detection per visible lead. Lighting does not matter: this is an oracle."""
    if camera is None:
        camera = Camera()

    detections = []
    for lead in leads:
        if lead.gap <= 0:
            continue
        bbox = lead_bbox(track, state, lead, camera)
        if bbox is None:
            continue
        area = (bbox[2] - bbox[0]) * (bbox[3] - bbox[1])
        detections.append(Detection(VEHICLE_CLASS_ID, bbox, confidence_for_area(area)))
    return detections
