import pytest

from dualdrive.harness import (
    ConstantDriver,
    OracleDriver,
    ScenarioSpec,
    autonomy,
    get_scenario,
    run_closed_loop,
    run_table,
)
from dualdrive.harness.closed_loop import SCENARIOS, TABLE_SCENARIOS, LeadSpawn
from dualdrive.models import Network, build_model
from dualdrive.project.error import UnknownScenarioException
from dualdrive.sim import TimeOfDay, Weather

# (interventions, autonomy %) for both networks in all eight evaluation sessions.
TABLE_PAIRS = [
    (0, 100), (0, 100),
    (7, 86), (6, 88),
    (4, 92), (3, 94),
    (11, 78), (12, 76),
    (5, 90), (4, 92),
    (12, 76), (14, 72),
    (7, 86), (7, 86),
    (17, 66), (20, 60),
]  # fmt: skip


@pytest.mark.parametrize("interventions, percent", TABLE_PAIRS)
def test_autonomy_table(interventions: int, percent: int):
    assert autonomy(interventions, 300.0) == percent


def test_autonomy_floor_and_errors():
    assert autonomy(60, 300.0) == 0
    assert autonomy(0, 10.0) == 100
    with pytest.raises(ValueError):
        autonomy(1, 0.0)
    with pytest.raises(ValueError):
        autonomy(-1, 300.0)


def test_scenario_catalogue():
    assert len(TABLE_SCENARIOS) == 8
    assert {SCENARIOS[name].track for name in TABLE_SCENARIOS} == {"standard", "city"}
    scenario = get_scenario("highway-night-clear")
    assert (scenario.time, scenario.weather) == (TimeOfDay.NIGHT, Weather.CLEAR_SKY)
    assert scenario.ticks == 3000

    # Copies are independent of the catalogue.
    scenario.seed = 99
    assert get_scenario("highway-night-clear").seed == 13

    with pytest.raises(UnknownScenarioException):
        get_scenario("moon")


def test_scenario_rejects_rain_at_night():
    with pytest.raises(ValueError):
        ScenarioSpec(time=TimeOfDay.NIGHT, weather=Weather.RAIN)


def test_scenario_aliases():
    scenario = ScenarioSpec.model_validate(
        {"duration-s": 12.5, "speed-limit": 8, "leads": [{"gap": 20, "time-s": 1}]}
    )
    assert scenario.ticks == 125
    assert scenario.leads[0].time_s == 1.0


@pytest.mark.parametrize("track", ["straight", "standard", "city"])
def test_oracle_drives_without_interventions(track: str):
    report = run_closed_loop(OracleDriver(), ScenarioSpec(track=track, duration_s=60.0))
    assert report.interventions == 0
    assert report.autonomy_percent == 100
    assert report.collisions == 0
    assert report.ticks == 600
    assert report.mean_abs_offset_m < 0.5


def test_constant_steering_needs_interventions():
    scenario = ScenarioSpec(track="straight", duration_s=30.0)
    report = run_closed_loop(ConstantDriver(1.0), scenario)
    assert report.interventions > 0
    assert report.autonomy_percent < 100
    # Every intervention skips six seconds of the session.
    assert report.ticks + 60 * report.interventions >= 300


def test_closed_loop_is_deterministic():
    scenario = ScenarioSpec(track="city", weather=Weather.RAIN, duration_s=5.0, seed=4)
    model = Network.initialize(build_model("modified"), seed=1)
    first = run_closed_loop(model, scenario)
    assert run_closed_loop(model, scenario) == first
    assert run_closed_loop(model, scenario, concurrent=True) == first


def test_braking_prevents_collision():
    scenario = get_scenario("stopped-lead")
    braked = run_closed_loop(OracleDriver(), scenario, brake_enabled=True)
    unbraked = run_closed_loop(OracleDriver(), scenario, brake_enabled=False)
    assert braked.collisions == 0
    assert unbraked.collisions == 1


@pytest.mark.parametrize(
    "speed, collisions", [(6.0, 0), (8.0, 0), (10.0, 1), (12.0, 1)]
)
def test_stopped_lead_braking_speed_limit(speed: float, collisions: int):
    scenario = get_scenario("stopped-lead")
    scenario.speed_limit = speed
    report = run_closed_loop(OracleDriver(), scenario, brake_enabled=True)
    assert report.collisions == collisions


def test_moving_lead_is_never_reached():
    scenario = ScenarioSpec(
        track="straight",
        duration_s=20.0,
        speed_limit=6.0,
        leads=[LeadSpawn(time_s=2.0, gap=15.0, speed=6.0)],
    )
    assert run_closed_loop(OracleDriver(), scenario).collisions == 0


def test_run_table_subset():
    names = ("stopped-lead", "highway-day-sunny")
    results = run_table(OracleDriver(), names=names, duration_s=10.0)
    assert [r.scenario for r in results] == ["stopped-lead", "highway-day-sunny"]
    assert all(r.report.autonomy_percent == 100 for r in results)
    assert results[1].report.ticks == 100
