from .camera import Camera
from .detections import (
    VEHICLE_CLASS_ID,
    confidence_for_area,
    lead_bbox,
    truth_detections,
)
from .oracle import DEFAULT_LOOKAHEAD, oracle_steering, pursuit_curvature
from .pgm import montage, read_pgm, write_pgm
from .render import SceneConditions, TimeOfDay, Weather, render
from .track import TRACKS, Segment, Track, get_track
from .vehicle import (
    DT,
    LeadVehicle,
    VehicleParams,
    VehicleState,
    advance,
    collision,
    off_lane,
    vehicle_pose,
)
