from __future__ import annotations

import asyncio
from dataclasses import asdict, dataclass, field
import json
import logging
from pathlib import Path
from typing import Any

import yaml

from .config import _expand_env, _require_dict, apply_overrides, parse_config, read_raw
from .errors import ConfigError
from .fitting import fit
from .scenario import run_scenario
from .summary import RunSummary, is_finite
from .writers.csv import CsvSettings, CsvWriter
from .writers.ndjson import json_safe


SWEEP_FILE = "sweep.json"
SWEEP_CSV_FILE = "sweep.csv"
FIT_MODELS = ("power", "exponential", "linear")
LOG_MODELS = ("power", "exponential")


@dataclass
class FitSpec:
    x: str
    y: str
    model: str


@dataclass
class SweepConfig:
    base: Path
    parameters: list[dict[str, Any]]
    fit: FitSpec | None
    concurrency: int


@dataclass
class SweepMember:
    index: int
    parameters: dict[str, Any]
    status: str
    error: str | None = None
    summary: dict[str, Any] | None = None


@dataclass
class SweepReport:
    members: list[SweepMember] = field(default_factory=list)
    fit: dict[str, Any] | None = None

    @property
    def failed(self) -> int:
        return sum(1 for member in self.members if member.status != "ok")

    def to_dict(self) -> dict[str, Any]:
        return {"members": [asdict(member) for member in self.members], "fit": self.fit}


def load_sweep(path: str) -> SweepConfig:
    with open(path, "r", encoding="utf-8") as handle:
        raw = yaml.safe_load(handle) or {}
    data = _expand_env(raw)
    if not isinstance(data, dict):
        raise ConfigError("Sweep root must be a mapping")
    for key in data:
        if key not in ("base", "parameters", "fit", "concurrency"):
            raise ConfigError(f"unknown sweep key: {key}")
    base = data.get("base")
    if not base:
        raise ConfigError("sweep.base must name a scenario config")
    parameters_raw = data.get("parameters") or []
    if not isinstance(parameters_raw, list):
        raise ConfigError("sweep.parameters must be a list")
    parameters = [dict(_require_dict(entry, "sweep.parameters entries")) for entry in parameters_raw]
    concurrency = int(data.get("concurrency", 2))
    if concurrency < 1:
        raise ConfigError("sweep.concurrency must be >= 1")
    return SweepConfig(
        base=(Path(path).parent / str(base)).resolve(),
        parameters=parameters,
        fit=_load_fit(data.get("fit")),
        concurrency=concurrency,
    )


def _load_fit(value: Any) -> FitSpec | None:
    if value is None:
        return None
    raw = _require_dict(value, "sweep.fit")
    model = str(raw.get("model", "power")).lower()
    if model not in FIT_MODELS:
        raise ConfigError(f"sweep.fit.model must be one of {', '.join(FIT_MODELS)}")
    if not raw.get("x") or not raw.get("y"):
        raise ConfigError("sweep.fit needs x and y")
    return FitSpec(x=str(raw["x"]), y=str(raw["y"]), model=model)


def _lookup(member: SweepMember, key: str) -> Any:
    if member.summary is not None and key in member.summary:
        return member.summary[key]
    return member.parameters.get(key)


def fit_members(members: list[SweepMember], spec: FitSpec) -> dict[str, Any]:
    """Fit spec.model over the ok members; log models skip points that are zero or underflowed."""
    pairs = []
    dropped = 0
    for member in members:
        if member.status != "ok":
            continue
        x, y = _lookup(member, spec.x), _lookup(member, spec.y)
        if not (is_finite(x) and is_finite(y)):
            continue
        if spec.model in LOG_MODELS and (float(y) <= 0 or (spec.model == "power" and float(x) <= 0)):
            dropped += 1
            continue
        pairs.append((float(x), float(y)))
    result: dict[str, Any] = {
        "x": spec.x,
        "y": spec.y,
        "model": spec.model,
        "points": len(pairs),
        "dropped": dropped,
        "value": None,
    }
    if dropped:
        logging.getLogger(__name__).info("Sweep fit skipped %s nonpositive point(s) for %s", dropped, spec.y)
    if len(pairs) >= 2:
        xs, ys = zip(*sorted(pairs))
        try:
            result["value"] = fit(spec.model, list(xs), list(ys))
        except ValueError as exc:
            result["error"] = str(exc)
    return result


async def run_sweep(sweep: SweepConfig, output_dir: Path, overrides: tuple[str, ...] = ()) -> SweepReport:
    """Run every parameter point as its own scenario; failures are recorded, never fatal."""
    logger = logging.getLogger(__name__)
    base_raw = apply_overrides(read_raw(str(sweep.base)), overrides)
    semaphore = asyncio.Semaphore(sweep.concurrency)
    output_dir.mkdir(parents=True, exist_ok=True)

    async def run_member(index: int, parameters: dict[str, Any]) -> RunSummary:
        config = parse_config(apply_overrides(base_raw, parameters))
        config.scenario.name = f"{config.scenario.name}-{index:03d}"
        async with semaphore:
            return await asyncio.to_thread(run_scenario, config, output_dir / f"member_{index:03d}")

    tasks = [run_member(index, parameters) for index, parameters in enumerate(sweep.parameters)]
    results = await asyncio.gather(*tasks, return_exceptions=True)

    report = SweepReport()
    for index, (parameters, outcome) in enumerate(zip(sweep.parameters, results)):
        if isinstance(outcome, Exception):
            logger.warning("Sweep member %s failed: %s", index, outcome)
            report.members.append(
                SweepMember(index=index, parameters=parameters, status="error", error=f"{type(outcome).__name__}: {outcome}")
            )
            continue
        report.members.append(SweepMember(index=index, parameters=parameters, status="ok", summary=outcome.to_dict()))
    if sweep.fit is not None:
        report.fit = fit_members(report.members, sweep.fit)
        logger.info("Sweep fit %s(%s -> %s): %s", sweep.fit.model, sweep.fit.x, sweep.fit.y, report.fit.get("value"))
    save_sweep(output_dir, report)
    return report


def save_sweep(output_dir: Path, report: SweepReport) -> None:
    with open(output_dir / SWEEP_FILE, "w", encoding="utf-8") as handle:
        json.dump(json_safe(report.to_dict()), handle, indent=2, sort_keys=True, allow_nan=False)
    parameter_keys = sorted({key for member in report.members for key in member.parameters})
    summary_keys = ("final_sup_err", "P45_mean", "manufactured_error", "h", "beta", "delta", "passed")
    columns = ("index", "status", *parameter_keys, *summary_keys, "error")
    with CsvWriter(CsvSettings(path=output_dir / SWEEP_CSV_FILE, columns=columns)) as writer:
        for member in report.members:
            row: dict[str, Any] = {"index": member.index, "status": member.status, "error": member.error or ""}
            row.update({key: member.parameters.get(key, "") for key in parameter_keys})
            summary = member.summary or {}
            row.update({key: summary.get(key, "") for key in summary_keys})
            writer.write(row)
