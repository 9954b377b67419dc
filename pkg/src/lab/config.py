from pathlib import Path
from typing import Any, Dict, Optional
import json
import logging

import tomli
import tomli_w
from pydantic import ValidationError

from helpers.exceptions import ConfigError, ConstraintViolation, MissingKey, TypeMismatch, UnknownKey
from lab.schemas import RunSpec

logger = logging.getLogger(__name__)

TYPE_ERRORS = {"enum", "literal_error", "int_from_float", "model_type", "model_attributes_type", "tuple_type"}


def _dotted(loc) -> str:
    return ".".join(str(part) for part in loc) or "spec"


def translate_validation_error(error: ValidationError) -> ConfigError:
    """
    Map the first pydantic error onto the lab's configuration errors.

    ``missing`` becomes MissingKey, ``extra_forbidden`` UnknownKey, parsing and type
    errors TypeMismatch, anything else (bounds, cross-field rules) ConstraintViolation.
    """
    first = error.errors()[0]
    key = _dotted(first["loc"])
    kind = first["type"]
    message = first["msg"]
    if kind == "missing":
        return MissingKey(key, "required key is missing")
    if kind == "extra_forbidden":
        return UnknownKey(key, "unknown key")
    if kind.endswith("_parsing") or kind.endswith("_type") or kind in TYPE_ERRORS:
        return TypeMismatch(key, f"{message} (got {first.get('input')!r})")
    return ConstraintViolation(key, message)


def read_document(path: Path) -> Dict[str, Any]:
    """Load a TOML config or an emitted manifest.json (its ``spec`` object)."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            with path.open("r", encoding="utf-8") as f:
                document = json.load(f)
            return document.get("spec", document)
        with path.open("rb") as f:
            return tomli.load(f)
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config: {e}") from e
    except (tomli.TOMLDecodeError, json.JSONDecodeError) as e:
        raise TypeMismatch(str(path), f"malformed document: {e}") from e


def parse_document(document: Dict[str, Any]) -> RunSpec:
    try:
        return RunSpec.model_validate(document)
    except ValidationError as e:
        raise translate_validation_error(e) from e


def parse_config(path: Path) -> RunSpec:
    """
    Parse and validate a run configuration.

    Args:
        path (Path): TOML file with ``[pde]`` and optional sections, or a manifest.json.

    Returns:
        RunSpec: Fully validated spec with defaults applied.

    Raises:
        MissingKey: If a required key is absent.
        UnknownKey: If a key is not part of the schema.
        TypeMismatch: If a value has the wrong type or the file is malformed.
        ConstraintViolation: If a bound or cross-field rule fails.
    """
    spec = parse_document(read_document(path))
    logger.debug(f"parsed config {path}")
    return spec


def canonical_document(spec: RunSpec) -> Dict[str, Any]:
    # TOML has no null; unset optionals are left out and fall back to None on re-parse
    return spec.model_dump(mode="json", exclude_none=True)


def emit_canonical(spec: RunSpec) -> str:
    return tomli_w.dumps(canonical_document(spec))


def apply_overrides(spec: RunSpec, grad_max: Optional[float] = None, t_end: Optional[float] = None) -> RunSpec:
    """Revalidated copy of ``spec`` with the command-line solver overrides."""
    if grad_max is None and t_end is None:
        return spec
    document = canonical_document(spec)
    if grad_max is not None:
        document["solver"]["grad_max"] = grad_max
    if t_end is not None:
        document["solver"]["t_end"] = t_end
    return parse_document(document)


def with_updates(spec: RunSpec, updates: Dict[str, Dict[str, Any]]) -> RunSpec:
    """Revalidated copy of ``spec`` with ``{section: {key: value}}`` replaced."""
    document = canonical_document(spec)
    for section, values in updates.items():
        document.setdefault(section, {}).update(values)
    return parse_document(document)
