"""Synthetic driving data: the steering oracle drives each track under each
lighting/weather condition while frames and its angles are recorded. Half of
the frames are recovery views rendered from a pose pushed off the lane center,
labelled with the oracle's correction from that pose."""

import logging
from dataclasses import replace
from typing import Iterator

import numpy as np
from pydantic import AliasChoices, BaseModel, Field

from dualdrive.control import Command, Key
from dualdrive.data import Dataset
from dualdrive.sim import (
    DT,
    SceneConditions,
    Track,
    VehicleParams,
    VehicleState,
    advance,
    get_track,
    oracle_steering,
    render,
)

logger = logging.getLogger(__name__)


def steering_command(angle: float) -> Command:
    """Forward with a continuous steering angle, as the oracle drives during data
    generation."""
    return Command(frozenset([Key.FORWARD]), steer=angle)


class DataGenConfig(BaseModel):
    samples: int = Field(default=5000, ge=1)
    tracks: list[str] = Field(default_factory=lambda: ["standard", "city"])
    conditions: list[str] = Field(
        default_factory=lambda: ["day/sunny", "day/rain", "night/clear_sky"]
    )
    speed: float = Field(default=10.0, gt=0.0)
    # Simulator ticks between recorded frames.
    stride: int = Field(default=3, ge=1)
    recovery_fraction: float = Field(
        default=0.5,
        ge=0.0,
        le=1.0,
        validation_alias=AliasChoices("recovery-fraction", "recovery_fraction"),
    )
    recovery_offset: float = Field(
        default=0.8,
        ge=0.0,
        validation_alias=AliasChoices("recovery-offset", "recovery_offset"),
    )
    recovery_heading: float = Field(
        default=0.1,
        ge=0.0,
        validation_alias=AliasChoices("recovery-heading", "recovery_heading"),
    )
    # Cap applied per histogram bin by the balance step of the CLI.
    balance_cap: int = Field(
        default=400, ge=1, validation_alias=AliasChoices("balance-cap", "balance_cap")
    )
    balance_bins: int = Field(
        default=25, ge=3, validation_alias=AliasChoices("balance-bins", "balance_bins")
    )
    seed: int = 0


def oracle_drive(
    track: Track, speed: float, start: float = 0.0
) -> Iterator[VehicleState]:
    """States of the oracle driving `track` at constant speed, one per tick."""
    params = VehicleParams(v_max=speed)
    state = VehicleState(s=start, v=speed)
    while True:
        yield state
        angle = oracle_steering(track, state, params=params)
        state = advance(state, steering_command(angle), track, DT, params)


def _recorded_states(
    track: Track, config: DataGenConfig, count: int, rng: np.random.Generator
) -> Iterator[VehicleState]:
    start = float(rng.uniform(0.0, track.length if track.loop else 100.0))
    drive = oracle_drive(track, config.speed, start)
    for _ in range(count):
        for _ in range(config.stride - 1):
            next(drive)
        state = next(drive)
        if rng.random() < config.recovery_fraction:
            offset, heading = config.recovery_offset, config.recovery_heading
            state = replace(
                state,
                d=state.d + float(rng.uniform(-offset, offset)),
                psi=state.psi + float(rng.uniform(-heading, heading)),
            )
        yield state


def generate_dataset(config: DataGenConfig | None = None) -> Dataset:
    """`config.samples` frames spread evenly over every (track, conditions) pair."""
    if config is None:
        config = DataGenConfig()
    if not config.tracks or not config.conditions:
        raise ValueError("Data generation needs at least one track and one condition")

    combos = [(name, text) for name in config.tracks for text in config.conditions]
    base, extra = divmod(config.samples, len(combos))
    rng = np.random.default_rng(config.seed)

    parts = []
    for index, (track_name, condition_text) in enumerate(combos):
        count = base + (1 if index < extra else 0)
        if count == 0:
            continue
        track = get_track(track_name)
        seed = int(rng.integers(0, 2**31))
        conditions = SceneConditions.parse(condition_text, seed=seed)

        frames = np.empty((count, 120, 160, 1), dtype=np.uint8)
        angles = np.empty(count, dtype=np.float32)
        for i, state in enumerate(_recorded_states(track, config, count, rng)):
            frames[i] = render(track, state, conditions)
            angles[i] = oracle_steering(track, state)

        logger.info("%s %s: %d samples", track_name, conditions.label, count)
        parts.append(Dataset(frames, angles))

    return Dataset.concat(parts)
