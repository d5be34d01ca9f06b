"""Report schemas and their JSON and text renderings."""

from typing import TypeVar

import colorama
from pydantic import BaseModel, Field, ValidationError
from pydantic_core import from_json


class ReportDeserializeError(Exception):
    """The given text is not a serialized report of the expected kind."""


class EvalReport(BaseModel):
    interventions: int = Field(ge=0)
    autonomy_percent: int = Field(ge=0, le=100)
    collisions: int = Field(ge=0)
    mean_abs_offset_m: float = Field(ge=0.0)
    ticks: int = Field(ge=0)


class ScenarioResult(BaseModel):
    scenario: str
    report: EvalReport


class ModelBench(BaseModel):
    name: str
    median_ms: float
    p95_ms: float
    params: int
    macs: int
    checkpoint_bytes: int


class BenchReport(BaseModel):
    frames: int
    warmup: int
    models: list[ModelBench]
    # modified median over original median; absent unless both were measured
    latency_ratio: float | None = None


class DualPipelineReport(BaseModel):
    frames: int
    seconds: float
    steering_fps: float
    braking_fps: float
    brake_decisions: int


class TrainingHistory(BaseModel):
    loss: list[float] = Field(default_factory=list)
    val_loss: list[float] = Field(default_factory=list)
    val_mae: list[float] = Field(default_factory=list)
    steps: int = 0


ReportT = TypeVar("ReportT", bound=BaseModel)


def serialize_report(report: BaseModel) -> str:
    return report.model_dump_json(indent=2)


def deserialize_report(json_str: str, kind: type[ReportT]) -> ReportT:
    try:
        return kind.model_validate(from_json(json_str))
    except (ValidationError, ValueError) as ex:
        raise ReportDeserializeError(f"Not a {kind.__name__}") from ex


def report_lines(report: BaseModel) -> list[str]:
    """One `key: value` line per top-level field."""
    return [f"{key}: {value}" for key, value in report.model_dump().items()]


def autonomy_color(percent: int) -> str:
    if percent >= 100:
        return colorama.Fore.GREEN
    if percent >= 80:
        return colorama.Fore.YELLOW
    return colorama.Fore.RED


def eval_report_lines(report: EvalReport, plain: bool = False) -> list[str]:
    lines = report_lines(report)
    if plain:
        return lines
    return [
        (
            f"autonomy_percent: {autonomy_color(report.autonomy_percent)}"
            f"{report.autonomy_percent}{colorama.Style.RESET_ALL}"
            if line.startswith("autonomy_percent:")
            else line
        )
        for line in lines
    ]


def scenario_table_lines(
    results: list[ScenarioResult], plain: bool = False
) -> list[str]:
    """Interventions and autonomy per scenario, aligned in columns."""
    width = max([len("scenario"), *(len(r.scenario) for r in results)])
    lines = [f"{'scenario':<{width}}  interventions  autonomy  collisions"]
    for result in results:
        report = result.report
        percent = f"{report.autonomy_percent:>7}%"
        if not plain:
            color = autonomy_color(report.autonomy_percent)
            percent = f"{color}{percent}{colorama.Style.RESET_ALL}"
        lines.append(
            f"{result.scenario:<{width}}  {report.interventions:>13}"
            f"  {percent}  {report.collisions:>10}"
        )
    return lines
