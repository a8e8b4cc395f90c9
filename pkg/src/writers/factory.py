from __future__ import annotations

from pathlib import Path
from typing import Any

from ..config import OutputConfig
from ..diagnostics import RECORD_FIELDS, DiagnosticsRecord
from ..solver.grid import Field
from .base import BaseWriter
from .csv import CsvSettings, CsvWriter
from .ndjson import NdjsonSettings, NdjsonWriter


RECORDS_FILE = "diagnostics.ndjson"
RECORDS_CSV_FILE = "diagnostics.csv"
SNAPSHOT_COLUMNS = ("x", "rho", "u", "theta")

FLAT_RECORD_COLUMNS = tuple(
    column
    for name in RECORD_FIELDS
    for column in (
        [f"Y{i}" for i in range(1, 7)] if name == "Y" else [f"P{i}" for i in range(1, 6)] if name == "P" else [name]
    )
)


class _FlatRecordWriter(BaseWriter):
    def __init__(self, inner: CsvWriter) -> None:
        self._inner = inner

    def write(self, row: dict[str, Any]) -> None:
        self._inner.write(flatten_record(row))

    def close(self) -> None:
        self._inner.close()


def flatten_record(row: dict[str, Any]) -> dict[str, Any]:
    flat = {key: value for key, value in row.items() if key not in ("Y", "P")}
    flat.update({f"Y{i}": value for i, value in enumerate(row["Y"], start=1)})
    flat.update({f"P{i}": value for i, value in enumerate(row["P"], start=1)})
    return flat


def build_record_writers(output: OutputConfig, directory: Path) -> list[BaseWriter]:
    writers: list[BaseWriter] = [NdjsonWriter(NdjsonSettings(path=directory / RECORDS_FILE))]
    if output.records_csv:
        writers.append(
            _FlatRecordWriter(CsvWriter(CsvSettings(path=directory / RECORDS_CSV_FILE, columns=FLAT_RECORD_COLUMNS)))
        )
    return writers


def emit_record(writers: list[BaseWriter], record: DiagnosticsRecord) -> None:
    row = record.to_dict()
    for writer in writers:
        writer.write(row)


def snapshot_path(directory: Path, t: float) -> Path:
    return directory / "snapshots" / f"t_{t:012.4f}.csv"


def write_snapshot(directory: Path, field: Field) -> Path:
    path = snapshot_path(directory, field.t)
    with CsvWriter(CsvSettings(path=path, columns=SNAPSHOT_COLUMNS)) as writer:
        writer.write_rows(list(zip(field.grid.x.tolist(), field.rho.tolist(), field.u.tolist(), field.theta.tolist())))
    return path
