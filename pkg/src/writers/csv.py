from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .base import BaseWriter


@dataclass
class CsvSettings:
    path: Path
    columns: Sequence[str]


class CsvWriter(BaseWriter):
    def __init__(self, settings: CsvSettings) -> None:
        self._settings = settings
        settings.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(settings.path, "w", encoding="utf-8", newline="")
        self._writer = csv.DictWriter(self._handle, fieldnames=list(settings.columns), extrasaction="raise")
        self._writer.writeheader()

    def write(self, row: dict[str, Any]) -> None:
        self._writer.writerow({key: _cell(value) for key, value in row.items()})

    def write_rows(self, rows: Sequence[Sequence[Any]]) -> None:
        columns = self._settings.columns
        for values in rows:
            self.write(dict(zip(columns, values)))

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(repr(float(item)) for item in value)
    return value
