"""
Model bundle service for Resonant.

A bundle is a versioned, line-oriented text file holding everything needed
to rebuild a trained model: the backend config with its generation seed
(the reservoir itself is regenerated, never stored), the readout weights
at 17 significant digits and the task normalization maps. Example:

    format_version = 1
    backend = esn
    include_input = false

    [esn]
    nodes = 100
    ...
    seed = 1

    [readout]
    regularization = 9.9999999999999995e-07
    outputs = 1
    width = 101

    [weights]
    0.12345678901234566 -0.5 ...

    [input_normalization]
    offset = 0
    scale = 1

    [target_normalization]
    offset = -1
    scale = 2

Blank lines and lines starting with '#' are ignored.
"""

import dataclasses
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.config import BUNDLE_FORMAT_VERSION, NONE_SENTINEL
from src.errors import BundleError, ReservoirError
from src.models import (
    EsnConfig,
    ExperimentConfig,
    ModelBundle,
    Nonlinearity,
    Normalization,
    QrcConfig,
    Readout,
    TimeSeries,
)
from src.services import experiment_service, readout_service
from src.services.experiment_service import ExperimentResult
from src.services.reservoir_service import Reservoir, harvest
from src.logging_utils import setup_logger

logger = setup_logger(__name__)

BACKEND_CONFIGS = {"esn": EsnConfig, "qrc": QrcConfig}
NORMALIZATION_SECTIONS = ("input_normalization", "target_normalization")


def _format_value(value: Any) -> str:
    if value is None:
        return NONE_SENTINEL
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Nonlinearity):
        return value.value
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _format_row(values: np.ndarray) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def bundle_from_result(result: ExperimentResult) -> ModelBundle:
    """Collect the persistent parts of a finished experiment."""
    config = result.config
    return ModelBundle(
        backend=config.backend_name,
        backend_config=config.esn if config.esn is not None else config.qrc,
        readout=result.readout,
        include_input=config.readout.include_input,
        input_normalization=result.task.input_normalization,
        target_normalization=result.task.target_normalization,
        format_version=BUNDLE_FORMAT_VERSION,
    )


def dumps(bundle: ModelBundle) -> str:
    """Serialize a bundle to its text form."""
    lines = [
        f"format_version = {bundle.format_version}",
        f"backend = {bundle.backend}",
        f"include_input = {_format_value(bundle.include_input)}",
        "",
        f"[{bundle.backend}]",
    ]
    for f in dataclasses.fields(bundle.backend_config):
        lines.append(f"{f.name} = {_format_value(getattr(bundle.backend_config, f.name))}")
    readout = bundle.readout
    lines += [
        "",
        "[readout]",
        f"regularization = {_format_value(float(readout.regularization))}",
        f"outputs = {readout.outputs}",
        f"width = {readout.width}",
        "",
        "[weights]",
    ]
    lines += [_format_row(row) for row in readout.weights]
    for name in NORMALIZATION_SECTIONS:
        normalization: Normalization = getattr(bundle, name)
        lines += [
            "",
            f"[{name}]",
            f"offset = {_format_row(np.asarray(normalization.offset))}",
            f"scale = {_format_row(np.asarray(normalization.scale))}",
        ]
    return "\n".join(lines) + "\n"


def save_bundle(bundle: ModelBundle, path: Path) -> None:
    """Write a bundle file, creating parent directories as needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(bundle), encoding="utf-8")
    logger.info(f"Saved {bundle.backend} model bundle to {path}")


class _Reader:
    """Line cursor over a bundle file that remembers line numbers."""

    def __init__(self, text: str):
        self.lines = [
            (number, line.strip())
            for number, line in enumerate(text.splitlines(), start=1)
            if line.strip() and not line.strip().startswith("#")
        ]
        self.position = 0
        self.last_line = len(text.splitlines())

    def next(self, expecting: str) -> tuple[int, str]:
        if self.position >= len(self.lines):
            raise BundleError(f"file ends while expecting {expecting}", line=self.last_line + 1)
        item = self.lines[self.position]
        self.position += 1
        return item

    def at_end(self) -> bool:
        return self.position >= len(self.lines)

    def section(self, name: str) -> None:
        number, line = self.next(f"section [{name}]")
        if line != f"[{name}]":
            raise BundleError(f"expected section [{name}], found '{line}'", line=number)

    def key_value(self, key: str) -> tuple[int, str]:
        number, line = self.next(f"'{key} = ...'")
        name, sep, value = line.partition("=")
        if not sep or name.strip() != key:
            raise BundleError(f"expected '{key} = ...', found '{line}'", line=number)
        return number, value.strip()


def _parse_float(text: str, number: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise BundleError(f"corrupted numeric field '{text}'", line=number) from None
    if not np.isfinite(value):
        raise BundleError(f"non-finite numeric field '{text}'", line=number)
    return value


def _parse_int(text: str, number: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise BundleError(f"corrupted integer field '{text}'", line=number) from None


def _parse_bool(text: str, number: int) -> bool:
    if text not in ("true", "false"):
        raise BundleError(f"corrupted boolean field '{text}'", line=number)
    return text == "true"


def _parse_row(text: str, number: int, width: Optional[int] = None) -> list[float]:
    values = [_parse_float(token, number) for token in text.split()]
    if width is not None and len(values) != width:
        raise BundleError(f"expected {width} values, found {len(values)}", line=number)
    return values


def _parse_field(cls: type, name: str, text: str, number: int) -> Any:
    default = next(f for f in dataclasses.fields(cls) if f.name == name).default
    if text == NONE_SENTINEL:
        return None
    if name == "nonlinearity":
        try:
            return Nonlinearity(text)
        except ValueError:
            raise BundleError(f"unknown nonlinearity '{text}'", line=number) from None
    if isinstance(default, bool):
        return _parse_bool(text, number)
    if isinstance(default, int) or name == "seed":
        return _parse_int(text, number)
    return _parse_float(text, number)


def loads(text: str) -> ModelBundle:
    """
    Parse the text form of a bundle.

    Raises:
        BundleError: On a version mismatch, an unknown backend, a missing or
            malformed line, or a corrupted numeric field; the message names
            the offending line.
    """
    reader = _Reader(text)
    number, version_text = reader.key_value("format_version")
    version = _parse_int(version_text, number)
    if version != BUNDLE_FORMAT_VERSION:
        raise BundleError(
            f"unsupported format version {version} (expected {BUNDLE_FORMAT_VERSION})", line=number
        )
    number, backend = reader.key_value("backend")
    if backend not in BACKEND_CONFIGS:
        raise BundleError(f"unknown backend '{backend}'", line=number)
    number, include_text = reader.key_value("include_input")
    include_input = _parse_bool(include_text, number)

    config_cls = BACKEND_CONFIGS[backend]
    reader.section(backend)
    values = {}
    for f in dataclasses.fields(config_cls):
        number, text_value = reader.key_value(f.name)
        values[f.name] = _parse_field(config_cls, f.name, text_value, number)
    backend_config = config_cls(**values)

    reader.section("readout")
    number, lambda_text = reader.key_value("regularization")
    regularization = _parse_float(lambda_text, number)
    number, outputs_text = reader.key_value("outputs")
    outputs = _parse_int(outputs_text, number)
    number, width_text = reader.key_value("width")
    width = _parse_int(width_text, number)
    if outputs < 1 or width < 2:
        raise BundleError(f"invalid readout shape ({outputs}, {width})", line=number)

    reader.section("weights")
    rows = []
    for _ in range(outputs):
        number, line = reader.next("a weight row")
        if line.startswith("["):
            raise BundleError(f"expected {outputs} weight rows, found {len(rows)}", line=number)
        rows.append(_parse_row(line, number, width))

    normalizations = {}
    for name in NORMALIZATION_SECTIONS:
        reader.section(name)
        number, offset_text = reader.key_value("offset")
        offset = _parse_row(offset_text, number)
        number, scale_text = reader.key_value("scale")
        scale = _parse_row(scale_text, number, len(offset))
        if any(s == 0.0 for s in scale):
            raise BundleError("normalization scale must be nonzero", line=number)
        normalizations[name] = Normalization(tuple(offset), tuple(scale))

    if not reader.at_end():
        number, line = reader.next("end of file")
        raise BundleError(f"unexpected trailing content '{line}'", line=number)

    return ModelBundle(
        backend=backend,
        backend_config=backend_config,
        readout=Readout(np.array(rows), regularization=regularization),
        include_input=include_input,
        input_normalization=normalizations["input_normalization"],
        target_normalization=normalizations["target_normalization"],
        format_version=version,
    )


def load_bundle(path: Path) -> ModelBundle:
    """
    Read a bundle file.

    Raises:
        BundleError: If the file is missing, unreadable or malformed.
    """
    path = Path(path)
    if not path.exists():
        raise BundleError(f"model file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise BundleError(f"cannot read model file {path}: {e}") from e
    bundle = loads(text)
    logger.info(f"Loaded {bundle.backend} model bundle from {path}")
    return bundle


def validate_bundle(bundle: ModelBundle, config: Optional[ExperimentConfig] = None) -> Reservoir:
    """
    Regenerate the bundle's backend and check the readout fits it.

    Args:
        bundle: Loaded bundle.
        config: When given, its backend kind must match the bundle's.

    Returns:
        The regenerated reservoir.

    Raises:
        BundleError: On a backend kind or dimension mismatch.
    """
    if config is not None and config.backend_name != bundle.backend:
        raise BundleError(
            f"bundle holds a {bundle.backend} model but the config declares {config.backend_name}"
        )
    try:
        bundle.backend_config.validate()
        reservoir = experiment_service.build_reservoir(
            ExperimentConfig(**{bundle.backend: bundle.backend_config})
        )
    except ReservoirError as e:
        raise BundleError(f"cannot regenerate the {bundle.backend} backend: {e}") from e
    descriptor = reservoir.descriptor
    channels = len(bundle.input_normalization.offset)
    if channels != descriptor.input_dimension:
        raise BundleError(
            f"input normalization has {channels} channels, backend expects {descriptor.input_dimension}"
        )
    expected = descriptor.readout_dimension + 1 + (channels if bundle.include_input else 0)
    if bundle.readout.width != expected:
        raise BundleError(
            f"readout width {bundle.readout.width} does not match backend readout width {expected}"
        )
    if bundle.readout.outputs != len(bundle.target_normalization.offset):
        raise BundleError("readout outputs and target normalization disagree")
    return reservoir


def predict(
    bundle: ModelBundle, series: TimeSeries, reservoir: Optional[Reservoir] = None
) -> np.ndarray:
    """
    Predict targets for a raw input series with a loaded model.

    The series is normalized with the stored input map, driven from the
    default initial state, and the readout output is mapped back to target
    units. Returns one row per input step.
    """
    reservoir = validate_bundle(bundle) if reservoir is None else reservoir
    u = bundle.input_normalization.apply(series)
    trajectory = experiment_service.drive_reservoir(reservoir, u)
    design = harvest(trajectory, washout=0, inputs=u if bundle.include_input else None)
    normalized = TimeSeries(readout_service.apply(bundle.readout, design))
    return bundle.target_normalization.invert(normalized).data
