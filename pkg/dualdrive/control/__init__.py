from .braking import BrakeConfig, brake_decision, relevant
from .steering import (
    SteerConfig,
    apply_slow_pulse,
    clamp_angle,
    merge_commands,
    steer_command,
)
from .types import (
    IDLE,
    VEHICLE_CLASS_ID,
    Command,
    Detection,
    InvalidCommandError,
    Key,
    NonFiniteAngleError,
)
