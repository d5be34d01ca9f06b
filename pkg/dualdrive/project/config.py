"""Configuration files.

Two syntaxes are accepted. `.yml`/`.yaml` files are nested mappings read with
ruamel.yaml. Any other file holds `key = value` lines with dotted keys:

    # comment
    train.epochs = 50
    train.augment.zoom-range = 1.0, 1.3
    data.tracks = standard, city

Values are coerced by the pydantic schemas; list and tuple fields take
comma-separated values."""

import types
import typing
from pathlib import Path
from typing import Any

import ruamel.yaml
from pydantic import BaseModel, Field, ValidationError

from dualdrive.control import BrakeConfig, SteerConfig
from dualdrive.harness.closed_loop import ScenarioSpec
from dualdrive.harness.gen_data import DataGenConfig
from dualdrive.harness.train import TrainConfig
from dualdrive.sim import VehicleParams
from .error import InvalidConfigException


class DualDriveConfig(BaseModel):
    train: TrainConfig = Field(default_factory=TrainConfig)
    steer: SteerConfig = Field(default_factory=SteerConfig)
    brake: BrakeConfig = Field(default_factory=BrakeConfig)
    scenario: ScenarioSpec = Field(default_factory=ScenarioSpec)
    vehicle: VehicleParams = Field(default_factory=VehicleParams)
    data: DataGenConfig = Field(default_factory=DataGenConfig)


PRESETS: dict[str, dict[str, Any]] = {
    # Desk scale: minutes on a laptop CPU.
    "desk": {},
    # 100,000 recorded frames balanced to about 40,000, mirrored to 80,000 and
    # split 65,000/15,000; the modified network trains twice as long.
    "full": {
        "data": {"samples": 100000, "balance_cap": 2600},
        "train": {
            "epochs": 1000,
            "epochs_by_model": {"original": 1000, "modified": 2000},
        },
    },
}


def _merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _field_annotation(path: list[str]) -> Any:
    """Type annotation of the config field at the dotted path, or None if unknown."""
    model: Any = DualDriveConfig
    annotation: Any = None
    for part in path:
        if not (isinstance(model, type) and issubclass(model, BaseModel)):
            return None
        field = model.model_fields.get(part)
        if field is None:
            return None
        annotation = field.annotation
        model = annotation
    return annotation


def _is_sequence(annotation: Any) -> bool:
    origin = typing.get_origin(annotation)
    if origin in (list, tuple):
        return True
    if origin in (typing.Union, types.UnionType):
        return any(_is_sequence(arg) for arg in typing.get_args(annotation))
    return False


def parse_key_values(text: str, source: str = "<string>") -> dict[str, Any]:
    """Nested mapping from `key = value` lines."""
    result: dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigException(
                f"{source}:{line_number}: expected 'key = value'"
            )

        key, value = (part.strip() for part in line.split("=", 1))
        path = [part.replace("-", "_") for part in key.split(".")]
        if not all(path):
            raise InvalidConfigException(
                f"{source}:{line_number}: malformed key '{key}'"
            )

        parsed: Any = value
        if _is_sequence(_field_annotation(path)):
            parsed = [item.strip() for item in value.split(",") if item.strip()]

        node = result
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise InvalidConfigException(
                    f"{source}:{line_number}: '{part}' is both a value and a section"
                )
            node = child
        node[path[-1]] = parsed
    return result


def read_config_file(path: Path) -> dict[str, Any]:
    try:
        if path.suffix.lower() in (".yml", ".yaml"):
            yaml = ruamel.yaml.YAML(typ="safe")
            with path.open("r", encoding="utf-8") as f:
                data = yaml.load(f)
            if data is None:
                return {}
            if not isinstance(data, dict):
                raise InvalidConfigException(
                    f"{path}: expected a mapping at the top level"
                )
            return data
        return parse_key_values(path.read_text(encoding="utf-8"), str(path))
    except OSError as ex:
        raise InvalidConfigException(f"{path}: {ex}") from ex
    except ruamel.yaml.YAMLError as ex:
        raise InvalidConfigException(f"{path}: {ex}") from ex


def load_config(path: Path | None = None, preset: str = "desk") -> DualDriveConfig:
    """Preset values, overridden by the file at `path` if given."""
    if preset not in PRESETS:
        raise InvalidConfigException(
            f"Unknown preset '{preset}', expected one of {sorted(PRESETS)}"
        )

    data = PRESETS[preset]
    if path is not None:
        data = _merge(data, read_config_file(path))

    try:
        return DualDriveConfig.model_validate(data)
    except ValidationError as ex:
        raise InvalidConfigException(f"{path or preset}: {ex}") from ex


def with_seed(config: DualDriveConfig, seed: int) -> DualDriveConfig:
    """Copy of the config with every seed field replaced."""
    return config.model_copy(
        update={
            "train": config.train.model_copy(update={"seed": seed}),
            "scenario": config.scenario.model_copy(update={"seed": seed}),
            "data": config.data.model_copy(update={"seed": seed}),
        }
    )
