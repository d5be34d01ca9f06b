"""Steering angle to key presses, with curvature-scaled slow-down pulses."""

import math

from pydantic import AliasChoices, BaseModel, Field, model_validator

from .types import Command, Key, NonFiniteAngleError


class SteerConfig(BaseModel):
    dead_zone: float = Field(
        default=0.05, validation_alias=AliasChoices("dead-zone", "dead_zone")
    )
    slow_threshold: float = Field(
        default=0.35,
        validation_alias=AliasChoices("slow-threshold", "slow_threshold"),
    )
    # Ticks of slow-down per unit of |angle|.
    slow_gain: float = Field(
        default=5.0, ge=0.0, validation_alias=AliasChoices("slow-gain", "slow_gain")
    )

    @model_validator(mode="after")
    def _check_order(self) -> "SteerConfig":
        if not 0.0 <= self.dead_zone < self.slow_threshold <= 1.0:
            raise ValueError("expected 0 <= dead_zone < slow_threshold <= 1")
        return self


def clamp_angle(angle: float) -> float:
    if not math.isfinite(angle):
        raise NonFiniteAngleError(f"Steering angle {angle} is not finite")
    return min(1.0, max(-1.0, float(angle)))


def steer_command(angle: float, config: SteerConfig | None = None) -> Command:
    """Keys for one steering prediction. The dead zone only decides whether a
    turn key is pressed; the clamped angle itself is carried in `Command.steer`."""
    if config is None:
        config = SteerConfig()
    angle = clamp_angle(angle)
    magnitude = abs(angle)

    keys: set[Key] = set()
    if angle < -config.dead_zone:
        keys.add(Key.LEFT)
    elif angle > config.dead_zone:
        keys.add(Key.RIGHT)

    slow_ticks = 0
    if magnitude > config.slow_threshold:
        keys.add(Key.SLOW)
        slow_ticks = max(1, round(config.slow_gain * magnitude))
    else:
        keys.add(Key.FORWARD)

    return Command(frozenset(keys), steer=angle, slow_ticks=slow_ticks)


def merge_commands(steering: Command, brake: bool) -> Command:
    """Combine the two controllers. HARD_BRAKE overrides SLOW, which overrides
    FORWARD."""
    if not brake:
        return steering
    keys = (steering.keys - {Key.FORWARD, Key.SLOW}) | {Key.HARD_BRAKE}
    return Command(frozenset(keys), steer=steering.steer)


def apply_slow_pulse(command: Command, remaining: int) -> tuple[Command, int]:
    """Hold SLOW for the pulse length requested by the last sharp turn.

    `remaining` is the number of pulse ticks left from earlier commands.
    Returns the command to execute this tick and the ticks left afterwards."""
    remaining = max(remaining, command.slow_ticks)
    if remaining <= 0 or Key.HARD_BRAKE in command:
        return command, 0
    keys = (command.keys - {Key.FORWARD}) | {Key.SLOW}
    slowed = Command(
        frozenset(keys), steer=command.steer, slow_ticks=command.slow_ticks
    )
    return slowed, remaining - 1
