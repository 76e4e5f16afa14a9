"""CSV and manifest rendering for experiment results."""

import hashlib
import json
import math
from collections.abc import Iterable, Mapping
from typing import Any

from errors import NumericalError

FLOAT_FORMAT = ".17g"


def format_float(value: float) -> str:
    """Round-trippable text for a finite float.

    Raises:
        NumericalError: if the value is NaN or infinite.
    """
    if not math.isfinite(value):
        raise NumericalError(f"non-finite value {value} in results", value)
    return format(value, FLOAT_FORMAT)


def format_cell(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def csv_row(values: Iterable[object]) -> str:
    return ",".join(map(format_cell, values))


def comment_lines(provenance: Mapping[str, object]) -> list[str]:
    return [f"# {key}: {value}" for key, value in provenance.items()]


def config_digest(config: Mapping[str, Any]) -> str:
    """sha256 over the canonical JSON of a configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def render_csv(
    header: list[str],
    rows: Iterable[Iterable[object]],
    provenance: Mapping[str, object],
) -> str:
    lines = [*comment_lines(provenance), ",".join(header)]
    lines.extend(csv_row(row) for row in rows)
    return "\n".join(lines) + "\n"


def render_manifest(manifest: Mapping[str, Any]) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"
