"""
Configuration files, JSON/CSV reports, run manifests and record schemas.
"""

import csv
import json
import logging
import platform
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Type, Union

from . import types
from .__version__ import __version__

logger = logging.getLogger(__name__)

Record = Union[types.BaseModel, Sequence[types.BaseModel]]

_NONE_LITERALS = ("none", "null")

SCHEMA_RECORDS: List[Type[types.BaseModel]] = [
    types.RunConfig,
    types.ParameterReport,
    types.RenormFixedPointApprox,
    types.DomainSummary,
    types.SeriesBound,
    types.ExpansionProfile,
    types.QuadraticRecursion,
    types.DeltaCertificate,
    types.DeltaBisection,
    types.AreaCertificate,
    types.DimensionReport,
    types.CascadeReport,
    types.EscapeFraction,
    types.LemmaClassRow,
    types.Manifest,
]


def _parse_value(key: str, raw: str) -> Any:
    value = raw.strip()
    if value.lower() in _NONE_LITERALS:
        return None
    if key == "resolutions":
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def _range_error(exc: types.ValidationError, origin: str) -> types.ConfigError:
    error = exc.errors()[0]
    key = ".".join(str(part) for part in error["loc"])
    return types.ConfigError(f"{origin}: invalid value for {key}: {error['msg']}", types.ErrorCode.range)


def read_config_values(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Raw `key = value` pairs of a configuration file, `#` starting a comment.

    Raises:
        ConfigError: with code `io` when the file cannot be read, `parse` for a
            malformed line or an unknown key.
    """

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise types.ConfigError(f"cannot read config {path}: {exc}", types.ErrorCode.io) from exc

    known = set(types.model_field_names(types.RunConfig))
    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise types.ConfigError(f"{path}:{number}: expected `key = value`, got {line!r}", types.ErrorCode.parse)
        if key not in known:
            raise types.ConfigError(f"{path}:{number}: unknown key {key!r}", types.ErrorCode.parse)
        values[key] = _parse_value(key, raw)
    return values


def load_config(path: Union[str, Path]) -> types.RunConfig:
    """
    Loads a `RunConfig` from a `key = value` file.

    Raises:
        ConfigError: `io`, `parse` (naming the line) or `range` (naming the key).
    """

    return merge_config(read_config_values(path), origin=str(path))


def merge_config(*layers: Dict[str, Any], origin: str = "config") -> types.RunConfig:
    "Later layers override earlier ones; `None` entries are skipped"
    merged: Dict[str, Any] = {}
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    try:
        return types.model_validate(types.RunConfig, merged)
    except types.ValidationError as exc:
        raise _range_error(exc, origin) from exc


def _row_value(value: Any) -> Any:
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, sort_keys=True)
    if value is None:
        return ""
    if isinstance(value, types.Enum):
        return value.value
    return value


def write_report(record: Record, path: Union[str, Path]) -> Path:
    """
    Writes a record as JSON (sorted keys, indent 2, trailing newline) or a
    list of rows as CSV with a header line.
    """

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(record, types.BaseModel):
            text = json.dumps(types.model_dump(record), sort_keys=True, indent=2) + "\n"
            path.write_text(text, encoding="utf-8")
        else:
            rows = [types.model_dump(row) for row in record]
            if not rows:
                raise types.ConfigError(f"no rows to write to {path}", types.ErrorCode.io)
            with open(path, "w", newline="", encoding="utf-8") as out:
                writer = csv.DictWriter(out, fieldnames=list(rows[0]))
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: _row_value(v) for k, v in row.items()})
    except OSError as exc:
        raise types.ConfigError(f"cannot write {path}: {exc}", types.ErrorCode.io) from exc

    logger.debug("wrote %s", path)
    return path


def _csv_value(raw: str) -> Any:
    if raw == "":
        return None
    if raw[:1] in "[{":
        return json.loads(raw)
    return raw


def read_report(path: Union[str, Path], model: Type[types.ModelT]) -> Union[types.ModelT, List[types.ModelT]]:
    """
    Reads back what `write_report` wrote: one record from JSON, a list of rows from CSV.
    """

    path = Path(path)
    try:
        if path.suffix == ".csv":
            with open(path, newline="", encoding="utf-8") as src:
                return [
                    types.model_validate(model, {k: _csv_value(v) for k, v in row.items()})
                    for row in csv.DictReader(src)
                ]
        return types.model_validate(model, json.loads(path.read_text(encoding="utf-8")))
    except OSError as exc:
        raise types.ConfigError(f"cannot read {path}: {exc}", types.ErrorCode.io) from exc
    except json.JSONDecodeError as exc:
        raise types.ConfigError(f"{path}: {exc}", types.ErrorCode.parse) from exc


def versions() -> Dict[str, str]:
    import numpy
    import pydantic
    import scipy

    return {
        "feigenjulia": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION if hasattr(pydantic, "VERSION") else "unknown",
    }


def write_manifest(
    directory: Union[str, Path],
    command: str,
    argv: Sequence[str],
    config: Optional[types.RunConfig],
    wall_time: float,
    artifacts: Sequence[Union[str, Path]],
    exit_code: int,
    error: Optional[str] = None,
) -> Path:
    directory = Path(directory)
    manifest = types.Manifest(
        command=command,
        argv=list(argv),
        config=types.model_dump(config) if config is not None else {},
        versions=versions(),
        wall_time=wall_time,
        artifacts=sorted(Path(a).name for a in artifacts),
        exit_code=exit_code,
        error=error,
    )
    return write_report(manifest, directory / "manifest.json")


def export_schemas(directory: Union[str, Path]) -> List[Path]:
    "JSON schemas of the public records, one file per record"
    directory = Path(directory)
    written = []
    for model in SCHEMA_RECORDS:
        path = directory / f"{model.__name__}.json"
        try:
            directory.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(types.model_json_schema(model), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            raise types.ConfigError(f"cannot write {path}: {exc}", types.ErrorCode.io) from exc
        written.append(path)
    return written
