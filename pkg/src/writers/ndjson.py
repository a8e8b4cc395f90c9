from __future__ import annotations

from dataclasses import dataclass
import json
import math
from pathlib import Path
from typing import Any

from .base import BaseWriter


def json_safe(value: Any) -> Any:
    """Copy of value with NaN and infinities replaced by None, so the output stays valid JSON."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    return value


@dataclass
class NdjsonSettings:
    path: Path


class NdjsonWriter(BaseWriter):
    """One JSON object per line, keys in the order the row provides them, non-finite floats as null."""

    def __init__(self, settings: NdjsonSettings) -> None:
        self._settings = settings
        settings.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(settings.path, "w", encoding="utf-8")

    def write(self, row: dict[str, Any]) -> None:
        self._handle.write(json.dumps(json_safe(row), allow_nan=False))
        self._handle.write("\n")

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()


def read_ndjson(path: Path) -> list[dict[str, Any]]:
    with open(path, "r", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]
