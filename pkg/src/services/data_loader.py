"""
Data loader service for Resonant.

This module reads experiment configs from YAML files into typed
ExperimentConfig objects and writes result tables as CSV. Config parsing is
fail-closed: unknown keys, wrong types and missing files are all reported
as ConfigError naming the offending key or path.
"""

import dataclasses
import enum
import typing
from pathlib import Path
from typing import Any, Optional

import pandas as pd
import yaml

from src.config import CSV_FLOAT_FORMAT
from src.errors import ConfigError
from src.models import (
    DiagnosticsSettings,
    EsnConfig,
    ExperimentConfig,
    ExperimentSettings,
    OutputSettings,
    QrcConfig,
    ReadoutSettings,
    SweepDeclaration,
    TaskSpec,
)
from src.logging_utils import setup_logger

logger = setup_logger(__name__)

SECTIONS: dict[str, type] = {
    "task": TaskSpec,
    "esn": EsnConfig,
    "qrc": QrcConfig,
    "readout": ReadoutSettings,
    "experiment": ExperimentSettings,
    "output": OutputSettings,
    "diagnostics": DiagnosticsSettings,
}
TOP_LEVEL_KEYS = {"seed", "sweep", *SECTIONS}


def load_yaml(file_path: Path) -> dict[str, Any]:
    """
    Load a YAML mapping from a file.

    Args:
        file_path: Path to the YAML file.

    Returns:
        The parsed mapping (empty for an empty file).

    Raises:
        ConfigError: If the file is missing, unreadable, not valid YAML, or
            does not hold a mapping.

    Example:
        >>> raw = load_yaml(Path("content/sine_smoke.yaml"))
        >>> raw["task"]["kind"]
        'sine-prediction'
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {file_path}")
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {file_path}: {e}") from e
    except OSError as e:
        raise ConfigError(f"cannot read {file_path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{file_path} must contain a mapping at the top level")
    logger.info(f"Successfully loaded config from {file_path}")
    return data


def validate_known_fields(data: dict[str, Any], allowed: set[str], entity_name: str) -> None:
    """
    Reject keys that are not part of a section.

    Args:
        data: The mapping to check.
        allowed: Accepted key names.
        entity_name: Section name for the error message.

    Raises:
        ConfigError: Naming the first unknown key.

    Example:
        >>> validate_known_fields({"nodes": 10, "nodez": 3}, {"nodes"}, "esn")
        Traceback (most recent call last):
        ...
        src.errors.ConfigError: unknown key 'esn.nodez'
    """
    unknown = sorted(key for key in data if key not in allowed)
    if unknown:
        raise ConfigError(f"unknown key '{entity_name}.{unknown[0]}'")


def as_int(value: Any, where: str) -> int:
    """Strictly convert a value to an integer (bools and fractions rejected)."""
    if isinstance(value, bool):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
    raise ConfigError(f"{where} must be an integer, got {value!r}")


def as_float(value: Any, where: str) -> float:
    """
    Strictly convert a value to a float.

    Strings are accepted because YAML reads exponent notation without a
    dot (``1e-6``) as a string.
    """
    if isinstance(value, bool):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    try:
        return float(value)
    except (ValueError, TypeError):
        raise ConfigError(f"{where} must be a number, got {value!r}") from None


def as_bool(value: Any, where: str) -> bool:
    if isinstance(value, bool):
        return value
    raise ConfigError(f"{where} must be true or false, got {value!r}")


def as_list(value: Any, where: str) -> list:
    """Accept a list, or a scalar as a one-element list."""
    if isinstance(value, list):
        return value
    if value is None:
        raise ConfigError(f"{where} must be a list")
    return [value]


def coerce_field(cls: type, name: str, value: Any, where: str) -> Any:
    """
    Convert a raw YAML value to the declared type of a dataclass field.

    Args:
        cls: Section dataclass.
        name: Field name.
        value: Raw value.
        where: Dotted key for error messages.
    """
    hint = typing.get_type_hints(cls)[name]
    if typing.get_origin(hint) is typing.Union:
        options = [arg for arg in typing.get_args(hint) if arg is not type(None)]
        if value is None:
            return None
        hint = options[0]
    if typing.get_origin(hint) is tuple:
        return tuple(as_float(item, f"{where}[{i}]") for i, item in enumerate(as_list(value, where)))
    if isinstance(hint, type) and issubclass(hint, enum.Enum):
        try:
            return hint(value)
        except ValueError:
            choices = ", ".join(member.value for member in hint)
            raise ConfigError(f"{where} must be one of {choices}, got {value!r}") from None
    if hint is bool:
        return as_bool(value, where)
    if hint is int:
        return as_int(value, where)
    if hint is float:
        return as_float(value, where)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    raise ConfigError(f"{where} has unsupported type {hint}")


def parse_section(cls: type, data: Any, section: str) -> Any:
    """Build one section dataclass from its raw mapping."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    validate_known_fields(data, names, section)
    values = {
        key: coerce_field(cls, key, value, f"{section}.{key}") for key, value in data.items()
    }
    return cls(**values)


def parse_sweeps(data: Any, sections: dict[str, Any]) -> tuple[SweepDeclaration, ...]:
    """
    Parse the ``sweep`` list and type its values by the swept field.

    Raises:
        ConfigError: If a declaration is malformed or names no config field.
    """
    declarations = []
    for index, item in enumerate(as_list(data, "sweep")):
        where = f"sweep[{index}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where} must be a mapping with parameter and values")
        validate_known_fields(item, {"parameter", "values"}, where)
        parameter = item.get("parameter")
        if not isinstance(parameter, str):
            raise ConfigError(f"{where}.parameter must be a string")
        values = as_list(item.get("values"), f"{where}.values")
        if not values:
            raise ConfigError(f"{where}.values must not be empty")
        if parameter == "seed":
            typed = tuple(as_int(v, f"{where}.values") for v in values)
        else:
            section, _, name = parameter.partition(".")
            cls = SECTIONS.get(section)
            if cls is None or sections.get(section) is None or name not in {
                f.name for f in dataclasses.fields(cls)
            }:
                raise ConfigError(f"sweep parameter '{parameter}' does not name a config field")
            typed = tuple(coerce_field(cls, name, v, parameter) for v in values)
        declarations.append(SweepDeclaration(parameter=parameter, values=typed))
    return tuple(declarations)


def parse_config(data: dict[str, Any], seed_override: Optional[int] = None) -> ExperimentConfig:
    """
    Turn a raw config mapping into a validated ExperimentConfig.

    Args:
        data: Parsed YAML mapping.
        seed_override: Replaces the global seed when given.

    Raises:
        ConfigError: On unknown keys, wrong types or inconsistent values.
    """
    validate_known_fields(data, TOP_LEVEL_KEYS, "config")
    sections = {
        name: parse_section(cls, data.get(name), name)
        for name, cls in SECTIONS.items()
        if name in data or name not in ("esn", "qrc")
    }
    seed = as_int(data.get("seed", 0), "seed")
    if seed_override is not None:
        seed = seed_override
    sweeps = parse_sweeps(data["sweep"], sections) if data.get("sweep") is not None else ()
    config = ExperimentConfig(
        task=sections["task"],
        esn=sections.get("esn"),
        qrc=sections.get("qrc"),
        readout=sections["readout"],
        experiment=sections["experiment"],
        sweeps=sweeps,
        output=sections["output"],
        diagnostics=sections["diagnostics"],
        seed=seed,
    )
    config.validate()
    return config


def load_config(file_path: Path, seed_override: Optional[int] = None) -> ExperimentConfig:
    """Load and validate an experiment config file."""
    return parse_config(load_yaml(file_path), seed_override)


def save_csv(frame: pd.DataFrame, file_path: Path) -> Path:
    """
    Write a table as CSV with full-precision floats.

    Args:
        frame: Table to write; column order is preserved.
        file_path: Destination, parent directories are created.

    Returns:
        The written path.
    """
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(file_path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Successfully saved {len(frame)} rows to {file_path}")
    return file_path
