"""Closed-loop evaluation: the steering and braking controllers drive the simulator
in lockstep at 10 Hz and every departure from the lane costs one intervention."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Protocol

import numpy as np
from pydantic import AliasChoices, BaseModel, Field, model_validator

from dualdrive.control import (
    BrakeConfig,
    Detection,
    SteerConfig,
    apply_slow_pulse,
    brake_decision,
    merge_commands,
    steer_command,
)
from dualdrive.models import Network
from dualdrive.project.error import UnknownScenarioException
from dualdrive.sim import (
    DT,
    Camera,
    LeadVehicle,
    SceneConditions,
    TimeOfDay,
    Track,
    VehicleParams,
    VehicleState,
    Weather,
    advance,
    collision,
    get_track,
    off_lane,
    oracle_steering,
    render,
    truth_detections,
)
from .report import EvalReport, ScenarioResult

logger = logging.getLogger(__name__)

TICKS_PER_SECOND = round(1 / DT)

INTERVENTION_SECONDS = 6.0

INTERVENTION_TICKS = round(INTERVENTION_SECONDS * TICKS_PER_SECOND)


def autonomy(interventions: int, duration_s: float) -> int:
    """Percentage of the session driven autonomously,
    each intervention charged 6 seconds."""
    if duration_s <= 0:
        raise ValueError(f"Duration must be positive, got {duration_s}")
    if interventions < 0:
        raise ValueError(f"Negative intervention count {interventions}")
    lost = INTERVENTION_SECONDS * interventions / duration_s
    return max(0, round((1.0 - lost) * 100))


class LeadSpawn(BaseModel):
    """A vehicle entering the ego lane `time_s` seconds into the session."""

    time_s: float = Field(
        default=0.0, ge=0.0, validation_alias=AliasChoices("time-s", "time_s")
    )
    gap: float = Field(gt=0.0)
    speed: float = Field(default=0.0, ge=0.0)
    width: float = Field(default=2.5, gt=0.0)
    height: float = Field(default=3.2, gt=0.0)

    def vehicle(self) -> LeadVehicle:
        return LeadVehicle(
            gap=self.gap, speed=self.speed, width=self.width, height=self.height
        )


class ScenarioSpec(BaseModel):
    track: str = "standard"
    time: TimeOfDay = TimeOfDay.DAY
    weather: Weather = Weather.SUNNY
    duration_s: float = Field(
        default=300.0,
        gt=0.0,
        validation_alias=AliasChoices("duration-s", "duration_s"),
    )
    speed_limit: float = Field(
        default=12.0,
        gt=0.0,
        validation_alias=AliasChoices("speed-limit", "speed_limit"),
    )
    leads: list[LeadSpawn] = Field(default_factory=list)
    seed: int = 0

    @model_validator(mode="after")
    def _check_conditions(self) -> "ScenarioSpec":
        # Raises for combinations that have no counterpart in the evaluation table.
        SceneConditions(self.time, self.weather, self.seed)
        return self

    @property
    def conditions(self) -> SceneConditions:
        return SceneConditions(self.time, self.weather, self.seed)

    @property
    def ticks(self) -> int:
        return round(self.duration_s * TICKS_PER_SECOND)


def _entry(road: str, time: TimeOfDay, weather: Weather, seed: int) -> ScenarioSpec:
    return ScenarioSpec(track=road, time=time, weather=weather, seed=seed)


DAY, NIGHT = TimeOfDay.DAY, TimeOfDay.NIGHT
SUNNY, RAIN, CLEAR = Weather.SUNNY, Weather.RAIN, Weather.CLEAR_SKY

# The eight evaluation sessions: two road types, each driven on a sunny day,
# in the rain (twice) and on a clear night.
SCENARIOS: dict[str, ScenarioSpec] = {
    "highway-day-sunny": _entry("standard", DAY, SUNNY, 11),
    "highway-day-rain": _entry("standard", DAY, RAIN, 12),
    "highway-night-clear": _entry("standard", NIGHT, CLEAR, 13),
    "highway-day-rain-2": _entry("standard", DAY, RAIN, 14),
    "city-day-sunny": _entry("city", DAY, SUNNY, 21),
    "city-day-rain": _entry("city", DAY, RAIN, 22),
    "city-night-clear": _entry("city", NIGHT, CLEAR, 23),
    "city-day-rain-2": _entry("city", DAY, RAIN, 24),
}

TABLE_SCENARIOS = tuple(SCENARIOS)

# A truck stands in the lane 40 m ahead. Detection confidence passes the brake
# threshold only within about 5 m of it, which is enough to stop from 8 m/s but
# not from 10 m/s. Without braking the ego vehicle runs into it.
SCENARIOS["stopped-lead"] = ScenarioSpec(
    track="straight",
    duration_s=60.0,
    speed_limit=6.0,
    leads=[LeadSpawn(time_s=0.0, gap=40.0, speed=0.0)],
    seed=31,
)


def get_scenario(name: str) -> ScenarioSpec:
    try:
        return SCENARIOS[name].model_copy(deep=True)
    except KeyError as ex:
        raise UnknownScenarioException(
            f"Unknown scenario '{name}', expected one of {sorted(SCENARIOS)}"
        ) from ex


Frame = np.ndarray | None


class Driver(Protocol):
    """Steering source for the closed loop. Drivers that do not look at the
    camera set `needs_frame` to False and receive None as frame."""

    needs_frame: bool

    def steer(self, frame: Frame, track: Track, state: VehicleState) -> float: ...


class ModelDriver:
    needs_frame = True

    def __init__(self, model: Network) -> None:
        self.model = model

    def steer(self, frame: Frame, track: Track, state: VehicleState) -> float:
        assert frame is not None
        return self.model.predict(frame)


class OracleDriver:
    needs_frame = False

    def __init__(
        self, lookahead: float = 12.0, params: VehicleParams | None = None
    ) -> None:
        self.lookahead = lookahead
        self.params = params

    def steer(self, frame: Frame, track: Track, state: VehicleState) -> float:
        return oracle_steering(track, state, self.lookahead, self.params)


class ConstantDriver:
    needs_frame = False

    def __init__(self, angle: float) -> None:
        self.angle = angle

    def steer(self, frame: Frame, track: Track, state: VehicleState) -> float:
        return self.angle


def run_closed_loop(
    driver: Driver | Network,
    scenario: ScenarioSpec,
    brake_enabled: bool = True,
    steer_config: SteerConfig | None = None,
    brake_config: BrakeConfig | None = None,
    vehicle_params: VehicleParams | None = None,
    camera: Camera | None = None,
    concurrent: bool = False,
) -> EvalReport:
    """Drive one session and account interventions and collisions.

    Each tick: render, steer, detect, brake, merge, advance. When the vehicle
    leaves the lane it is put back on the lane center with its speed kept and
    the session clock jumps 6 seconds without any distance driven. With
    `concurrent`, steering and braking for a tick run on two threads over the
    same frame snapshot; the merge is the same so the report is too."""
    if isinstance(driver, Network):
        driver = ModelDriver(driver)
    steer_config = steer_config or SteerConfig()
    brake_config = brake_config or BrakeConfig()
    camera = camera or Camera()
    params = (vehicle_params or VehicleParams()).model_copy(
        update={"v_max": scenario.speed_limit}
    )

    track = get_track(scenario.track)
    conditions = scenario.conditions
    pending = sorted(scenario.leads, key=lambda spawn: spawn.time_s)
    active: list[LeadVehicle] = []

    state = VehicleState(v=scenario.speed_limit)
    clock = 0
    slow_remaining = 0
    interventions = 0
    collisions = 0
    offsets: list[float] = []

    executor = None
    if concurrent:
        executor = ThreadPoolExecutor(max_workers=2, thread_name_prefix="pipeline")
    try:
        while clock < scenario.ticks:
            while pending and round(pending[0].time_s * TICKS_PER_SECOND) <= clock:
                active.append(pending.pop(0).vehicle())

            frame = None
            if driver.needs_frame:
                frame = render(track, state, conditions, active, camera)
                frame.flags.writeable = False
            detections: list[Detection] = []
            if brake_enabled:
                detections = truth_detections(track, state, active, camera)

            if executor is not None:
                angle_future = executor.submit(driver.steer, frame, track, state)
                brake_future = executor.submit(brake_decision, detections, brake_config)
                angle, brake = angle_future.result(), brake_future.result()
            else:
                angle = driver.steer(frame, track, state)
                brake = brake_decision(detections, brake_config)

            command = merge_commands(steer_command(angle, steer_config), brake)
            command, slow_remaining = apply_slow_pulse(command, slow_remaining)

            new_state = advance(state, command, track, DT, params)
            driven = new_state.s - state.s
            active = [lead.advanced(driven) for lead in active]
            hit = [lead for lead in active if collision(new_state, lead)]
            if hit:
                collisions += len(hit)
                active = [lead for lead in active if lead not in hit]
                logger.debug("t=%.1fs: collision with lead vehicle", clock * DT)

            state = new_state
            clock += 1
            offsets.append(abs(state.d))

            if off_lane(state):
                interventions += 1
                logger.debug(
                    "t=%.1fs: off lane (d=%.2f m), intervention %d",
                    clock * DT,
                    state.d,
                    interventions,
                )
                state = state.realigned()
                slow_remaining = 0
                clock += INTERVENTION_TICKS
    finally:
        if executor is not None:
            executor.shutdown()

    return EvalReport(
        interventions=interventions,
        autonomy_percent=autonomy(interventions, scenario.duration_s),
        collisions=collisions,
        mean_abs_offset_m=float(np.mean(offsets)) if offsets else 0.0,
        ticks=len(offsets),
    )


def run_table(
    driver: Driver | Network,
    names: tuple[str, ...] = TABLE_SCENARIOS,
    seed_offset: int = 0,
    duration_s: float | None = None,
    **kwargs,
) -> list[ScenarioResult]:
    """Run a driver over the evaluation catalogue."""
    results = []
    for name in names:
        scenario = get_scenario(name)
        scenario.seed += seed_offset
        if duration_s is not None:
            scenario.duration_s = duration_s
        report = run_closed_loop(driver, scenario, **kwargs)
        logger.info(
            "%s: %d interventions, %d%% autonomy",
            name,
            report.interventions,
            report.autonomy_percent,
        )
        results.append(ScenarioResult(scenario=name, report=report))
    return results
