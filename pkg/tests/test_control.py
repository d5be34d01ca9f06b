import math

import pytest
from pydantic import ValidationError

from dualdrive.control import (
    BrakeConfig,
    Command,
    Detection,
    InvalidCommandError,
    Key,
    NonFiniteAngleError,
    SteerConfig,
    apply_slow_pulse,
    brake_decision,
    clamp_angle,
    merge_commands,
    relevant,
    steer_command,
)


def vehicle(
    x_min: float,
    x_max: float,
    confidence: float,
    y_max: float = 90.0,
    class_id: int = 3,
) -> Detection:
    return Detection(class_id, (x_min, 40.0, x_max, y_max), confidence)


@pytest.mark.parametrize(
    "angle, keys",
    [
        (0.0, {Key.FORWARD}),
        (0.05, {Key.FORWARD}),
        (-0.05, {Key.FORWARD}),
        (0.2, {Key.RIGHT, Key.FORWARD}),
        (-0.2, {Key.LEFT, Key.FORWARD}),
        (0.35, {Key.RIGHT, Key.FORWARD}),
        (0.5, {Key.RIGHT, Key.SLOW}),
        (-1.0, {Key.LEFT, Key.SLOW}),
    ],
)
def test_steer_command_keys(angle: float, keys: set[Key]):
    assert steer_command(angle).keys == keys


@pytest.mark.parametrize("angle", [0.03, 0.2, 0.4, 0.9, 1.0])
def test_steer_command_antisymmetry(angle: float):
    right = steer_command(angle)
    left = steer_command(-angle)
    swap = {Key.LEFT: Key.RIGHT, Key.RIGHT: Key.LEFT}
    assert {swap.get(key, key) for key in left.keys} == right.keys
    assert left.slow_ticks == right.slow_ticks
    assert left.steer == -right.steer


def test_slow_pulse_scales_with_angle():
    assert steer_command(-1.0).slow_ticks == 5
    assert steer_command(0.5).slow_ticks == 2
    assert steer_command(0.36).slow_ticks == 2
    assert steer_command(0.2).slow_ticks == 0


def test_steer_command_clamps():
    command = steer_command(3.0)
    assert command.steer == 1.0
    assert Key.RIGHT in command
    with pytest.raises(NonFiniteAngleError):
        steer_command(math.nan)
    with pytest.raises(NonFiniteAngleError):
        clamp_angle(-math.inf)


def test_steer_config_order():
    with pytest.raises(ValidationError):
        SteerConfig(dead_zone=0.5, slow_threshold=0.3)
    config = SteerConfig(dead_zone=0.0, slow_threshold=1.0)
    assert steer_command(0.01, config).keys == {Key.RIGHT, Key.FORWARD}


def test_command_rejects_conflicts():
    with pytest.raises(InvalidCommandError):
        Command(frozenset([Key.LEFT, Key.RIGHT]))
    with pytest.raises(InvalidCommandError):
        Command(frozenset([Key.SLOW, Key.HARD_BRAKE]))
    assert Command(frozenset([Key.RIGHT, Key.SLOW])).key_names == "D+S"


def test_merge_commands():
    steering = steer_command(-0.8)
    assert merge_commands(steering, False) is steering
    braked = merge_commands(steering, True)
    assert braked.keys == {Key.LEFT, Key.HARD_BRAKE}
    assert braked.steer == steering.steer
    assert merge_commands(steer_command(0.0), True).keys == {Key.HARD_BRAKE}


def test_slow_pulse_outlasts_the_turn():
    command, remaining = apply_slow_pulse(steer_command(0.8), 0)
    assert Key.SLOW in command
    assert remaining == 3

    # The next tick drives straight but the pulse is still running.
    command, remaining = apply_slow_pulse(steer_command(0.0), remaining)
    assert command.keys == {Key.SLOW}
    assert remaining == 2

    braking = merge_commands(steer_command(0.0), True)
    command, remaining = apply_slow_pulse(braking, remaining)
    assert command.keys == {Key.HARD_BRAKE}
    assert remaining == 0


def test_detection_validation():
    with pytest.raises(ValueError):
        Detection(3, (10.0, 10.0, 5.0, 20.0), 0.5)
    with pytest.raises(ValueError):
        Detection(3, (0.0, 0.0, 170.0, 20.0), 0.5)
    with pytest.raises(ValueError):
        Detection(3, (0.0, 0.0, 10.0, 20.0), 1.5)


def test_relevant_filters_lane_class_and_horizon():
    detections = [
        vehicle(70, 90, 0.9),
        vehicle(0, 20, 0.9),
        vehicle(70, 90, 0.9, class_id=1),
        vehicle(70, 90, 0.9, y_max=50.0),
    ]
    assert relevant(detections) == detections[:1]


@pytest.mark.parametrize(
    "detections, expected",
    [
        ([], False),
        ([vehicle(70, 90, 0.9)], True),
        ([vehicle(70, 90, 0.8)], False),
        ([vehicle(0, 20, 0.95)], False),
        ([vehicle(0, 20, 0.95), vehicle(60, 80, 0.81)], True),
    ],
)
def test_brake_decision(detections: list[Detection], expected: bool):
    assert brake_decision(detections) is expected


@pytest.mark.parametrize("confidence", [0.5, 0.79, 0.81, 0.9, 0.99])
def test_brake_decision_monotone(confidence: float):
    before = brake_decision([vehicle(70, 90, confidence)])
    after = brake_decision([vehicle(70, 90, min(1.0, confidence + 0.05))])
    assert after or not before


def test_brake_config_validation():
    with pytest.raises(ValidationError):
        BrakeConfig(lane_band=(100.0, 50.0))
    assert brake_decision([vehicle(70, 90, 0.6)], BrakeConfig(threshold=0.5))
