from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
import json
import math
import os
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .diagnostics import DiagnosticsRecord, DissipationReport, fit_shift_bound, norm_equivalence
from .fitting import linear_trend
from .writers.csv import CsvSettings, CsvWriter
from .writers.ndjson import json_safe


SUMMARY_VERSION = 1


@dataclass
class RunSummary:
    name: str
    mode: str
    version: int = SUMMARY_VERSION
    boundary: str | None = None
    seed: int = 0
    delta: float | None = None
    sigma: float | None = None
    rho_minus: float | None = None
    u_minus: float | None = None
    theta_minus: float | None = None
    M: float | None = None
    alpha: float | None = None
    beta: float | None = None
    length: float | None = None
    nodes: int | None = None
    h: float | None = None
    t_final: float | None = None
    steps: int = 0
    records: int = 0
    initial_sup_err: float | None = None
    peak_sup_err: float | None = None
    final_sup_err: float | None = None
    final_X: float | None = None
    final_Xdot: float | None = None
    xdot_trend: float | None = None
    max_shift_identity: float | None = None
    shift_bound_violations: int = 0
    P1_max: float | None = None
    P1_abs_max: float | None = None
    P45_mean: float | None = None
    c_star: float | None = None
    dissipation_ok_fraction: float | None = None
    gronwall_ok: bool | None = None
    C0: float | None = None
    norm_lower: float | None = None
    norm_upper: float | None = None
    mass_initial: float | None = None
    mass_final: float | None = None
    manufactured_error: float | None = None
    passed: bool | None = None
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


SUMMARY_COLUMNS = tuple(item.name for item in fields(RunSummary))


def xdot_trend(records: Sequence[DiagnosticsRecord]) -> float:
    """Slope of |Xdot| against t over the second half of the run."""
    if len(records) < 4:
        return float("nan")
    t_half = 0.5 * records[-1].t
    tail = [r for r in records if r.t >= t_half]
    if len(tail) < 2:
        return float("nan")
    return linear_trend([r.t for r in tail], [abs(r.Xdot) for r in tail])


def fill_from_records(
    summary: RunSummary,
    records: Sequence[DiagnosticsRecord],
    dissipation: DissipationReport | None = None,
) -> RunSummary:
    if not records:
        return summary
    sup = np.array([r.sup_err for r in records])
    p1 = np.array([r.P[0] for r in records])
    p45 = np.array([abs(r.P[3]) + abs(r.P[4]) for r in records])
    summary.records = len(records)
    summary.initial_sup_err = float(sup[0])
    summary.peak_sup_err = float(np.max(sup[1:])) if sup.size > 1 else float(sup[0])
    summary.final_sup_err = float(sup[-1])
    summary.final_X = records[-1].X
    summary.final_Xdot = records[-1].Xdot
    summary.xdot_trend = xdot_trend(records)
    summary.max_shift_identity = float(max(r.shift_identity for r in records))
    summary.shift_bound_violations = sum(1 for r in records if not r.shift_bound_ok)
    summary.P1_max = float(np.max(p1))
    summary.P1_abs_max = float(np.max(np.abs(p1)))
    summary.P45_mean = float(np.mean(p45))
    summary.C0 = fit_shift_bound(records)
    summary.norm_lower, summary.norm_upper = norm_equivalence(records)
    if dissipation is not None:
        summary.c_star = dissipation.c_star
        summary.dissipation_ok_fraction = dissipation.ok_fraction
        summary.gronwall_ok = dissipation.gronwall_ok
    return summary


def save_summary(path: str | os.PathLike, summary: RunSummary) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(json_safe(summary.to_dict()), handle, indent=2, sort_keys=True, allow_nan=False)


def load_summary(path: str | os.PathLike) -> RunSummary:
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, dict):
        raise ValueError(f"{path} does not hold a summary mapping")
    known = {key: value for key, value in raw.items() if key in SUMMARY_COLUMNS}
    return RunSummary(**known)


def write_summary_csv(path: Path, summaries: Sequence[RunSummary]) -> None:
    with CsvWriter(CsvSettings(path=path, columns=SUMMARY_COLUMNS)) as writer:
        for summary in summaries:
            row = summary.to_dict()
            row["reasons"] = "; ".join(summary.reasons)
            writer.write(row)


def is_finite(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
