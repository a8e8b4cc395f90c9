from __future__ import annotations

from dataclasses import dataclass, field
import os
from typing import Any, Sequence

import yaml

from .errors import ConfigError
from .solver.boundary import BoundaryKind
from .solver.perturbation import COMPONENTS, PerturbationSpec
from .solver.stepper import SolverSettings
from .thermo import GasParams, State


MODES = ("stability", "transport", "manufactured")
DEFAULT_RIGHT_STATE = State(rho=1.0, u=-1.2, theta=1.0)
DEFAULT_DELTA = 0.1


@dataclass
class ScenarioSection:
    name: str
    mode: str
    seed: int


@dataclass
class BoundaryConfig:
    kind: BoundaryKind
    u_minus: float | None
    theta_minus: float | None


@dataclass
class ShockConfig:
    right: State
    right_u_explicit: bool
    rho_minus: float | None
    delta: float | None
    tol: float


@dataclass
class ProfileConfig:
    halfwidth_scale: float
    tail_tol: float
    points: int


@dataclass
class GridConfig:
    length: float | None
    max_spacing: float
    nodes: int | None


@dataclass
class TimeConfig:
    t_final: float | None
    solver: SolverSettings


@dataclass
class ShiftConfig:
    beta: float | None
    beta_scale: float
    frozen: bool


@dataclass
class DiagnosticsConfig:
    every: int
    dissipation_tolerance: float
    identity_tolerance: float


@dataclass
class OutputConfig:
    directory: str
    snapshots: list[float] = field(default_factory=list)
    records_csv: bool = False
    profile_csv: bool = False


@dataclass
class ScenarioConfig:
    scenario: ScenarioSection
    gas: GasParams
    boundary: BoundaryConfig
    shock: ShockConfig
    profile: ProfileConfig
    grid: GridConfig
    time: TimeConfig
    shift: ShiftConfig
    perturbation: PerturbationSpec
    diagnostics: DiagnosticsConfig
    output: OutputConfig


SECTIONS = (
    "scenario",
    "gas",
    "boundary",
    "shock",
    "profile",
    "grid",
    "time",
    "shift",
    "perturbation",
    "diagnostics",
    "output",
)


def _expand_env(value: Any) -> Any:
    if isinstance(value, str):
        return os.path.expandvars(value)
    if isinstance(value, list):
        return [_expand_env(item) for item in value]
    if isinstance(value, dict):
        return {key: _expand_env(val) for key, val in value.items()}
    return value


def _require_dict(value: Any, name: str) -> dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a mapping")
    return value


def _check_keys(raw: dict[str, Any], allowed: Sequence[str], name: str) -> None:
    for key in raw:
        if key not in allowed:
            prefix = f"{name}." if name else ""
            raise ConfigError(f"unknown config key: {prefix}{key}")


def _number(raw: dict[str, Any], key: str, name: str, default: Any) -> float | None:
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{name}.{key} must be a number")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}.{key} must be a number")


def _integer(raw: dict[str, Any], key: str, name: str, default: Any) -> int | None:
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ConfigError(f"{name}.{key} must be an integer")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}.{key} must be an integer")


def _positive(value: float | None, label: str) -> None:
    if value is not None and not value > 0:
        raise ConfigError(f"{label} must be > 0")


def apply_overrides(raw: dict[str, Any], overrides: Sequence[str] | dict[str, Any]) -> dict[str, Any]:
    """Apply `section.key=value` overrides; string values are parsed as YAML scalars."""
    data = {key: dict(value) if isinstance(value, dict) else value for key, value in raw.items()}
    items = overrides.items() if isinstance(overrides, dict) else (_split_override(item) for item in overrides)
    for dotted, value in items:
        section, _, key = str(dotted).partition(".")
        if not section or not key or "." in key:
            raise ConfigError(f"override key must look like section.key: {dotted}")
        if section not in SECTIONS:
            raise ConfigError(f"unknown config key: {section}")
        target = _require_dict(data.get(section), section)
        data[section] = {**target, key: value}
    return data


def _split_override(item: str) -> tuple[str, Any]:
    dotted, sep, text = item.partition("=")
    if not sep:
        raise ConfigError(f"override must look like section.key=value: {item}")
    try:
        value = yaml.safe_load(text) if text.strip() else None
    except yaml.YAMLError:
        raise ConfigError(f"override value for {dotted} is not valid YAML")
    return dotted.strip(), value


def read_raw(path: str) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as handle:
        raw = yaml.safe_load(handle) or {}
    data = _expand_env(raw)
    if not isinstance(data, dict):
        raise ConfigError("Config root must be a mapping")
    return data


def load_config(path: str, overrides: Sequence[str] = ()) -> ScenarioConfig:
    return parse_config(apply_overrides(read_raw(path), overrides))


def parse_config(data: dict[str, Any]) -> ScenarioConfig:
    _check_keys(data, SECTIONS, "")
    sections = {name: _require_dict(data.get(name), name) for name in SECTIONS}
    try:
        return ScenarioConfig(
            scenario=_load_scenario(sections["scenario"]),
            gas=_load_gas(sections["gas"]),
            boundary=_load_boundary(sections["boundary"]),
            shock=_load_shock(sections["shock"]),
            profile=_load_profile(sections["profile"]),
            grid=_load_grid(sections["grid"]),
            time=_load_time(sections["time"]),
            shift=_load_shift(sections["shift"]),
            perturbation=_load_perturbation(sections["perturbation"]),
            diagnostics=_load_diagnostics(sections["diagnostics"]),
            output=_load_output(sections["output"]),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_scenario(raw: dict[str, Any]) -> ScenarioSection:
    _check_keys(raw, ("name", "mode", "seed"), "scenario")
    mode = str(raw.get("mode", "stability")).strip().lower()
    if mode not in MODES:
        raise ConfigError(f"scenario.mode must be one of {', '.join(MODES)}")
    return ScenarioSection(
        name=str(raw.get("name", "scenario")),
        mode=mode,
        seed=_integer(raw, "seed", "scenario", 0),
    )


def _load_gas(raw: dict[str, Any]) -> GasParams:
    _check_keys(raw, ("R", "gamma", "mu", "kappa"), "gas")
    return GasParams(
        R=_number(raw, "R", "gas", 1.0),
        gamma=_number(raw, "gamma", "gas", 5.0 / 3.0),
        mu=_number(raw, "mu", "gas", 1.0),
        kappa=_number(raw, "kappa", "gas", 1.0),
    )


def _load_boundary(raw: dict[str, Any]) -> BoundaryConfig:
    _check_keys(raw, ("kind", "u_minus", "theta_minus"), "boundary")
    kind_raw = str(raw.get("kind", "outflow")).strip().lower()
    try:
        kind = BoundaryKind(kind_raw)
    except ValueError:
        raise ConfigError("boundary.kind must be 'outflow' or 'impermeable'")
    u_minus = _number(raw, "u_minus", "boundary", None)
    theta_minus = _number(raw, "theta_minus", "boundary", None)
    _positive(theta_minus, "boundary.theta_minus")
    if kind is BoundaryKind.IMPERMEABLE and u_minus not in (None, 0.0):
        raise ConfigError("boundary.u_minus must be 0 for an impermeable wall")
    if kind is BoundaryKind.IMPERMEABLE and theta_minus is not None:
        raise ConfigError("boundary.theta_minus is determined by the impermeable closure; remove it")
    if kind is BoundaryKind.OUTFLOW and u_minus is not None and not u_minus < 0:
        raise ConfigError("boundary.u_minus must be < 0 for outflow")
    if (u_minus is None) != (theta_minus is None) and kind is BoundaryKind.OUTFLOW:
        raise ConfigError("boundary.u_minus and boundary.theta_minus must be given together")
    return BoundaryConfig(kind=kind, u_minus=u_minus, theta_minus=theta_minus)


def _load_shock(raw: dict[str, Any]) -> ShockConfig:
    _check_keys(raw, ("right", "rho_minus", "delta", "tol"), "shock")
    right_raw = _require_dict(raw.get("right"), "shock.right")
    _check_keys(right_raw, ("rho", "u", "theta"), "shock.right")
    rho = _number(right_raw, "rho", "shock.right", DEFAULT_RIGHT_STATE.rho)
    u = _number(right_raw, "u", "shock.right", DEFAULT_RIGHT_STATE.u)
    theta = _number(right_raw, "theta", "shock.right", DEFAULT_RIGHT_STATE.theta)
    _positive(rho, "shock.right.rho")
    _positive(theta, "shock.right.theta")
    if not u < 0:
        raise ConfigError("shock.right.u must be < 0")
    rho_minus = _number(raw, "rho_minus", "shock", None)
    delta = _number(raw, "delta", "shock", None)
    if rho_minus is not None and delta is not None:
        raise ConfigError("set only one of shock.rho_minus and shock.delta")
    _positive(delta, "shock.delta")
    if rho_minus is not None and not rho_minus > rho:
        raise ConfigError("shock.rho_minus must be > shock.right.rho")
    tol = _number(raw, "tol", "shock", 1e-8)
    _positive(tol, "shock.tol")
    return ShockConfig(
        right=State(rho=rho, u=u, theta=theta),
        right_u_explicit="u" in right_raw,
        rho_minus=rho_minus,
        delta=delta,
        tol=tol,
    )


def _load_profile(raw: dict[str, Any]) -> ProfileConfig:
    _check_keys(raw, ("halfwidth_scale", "tail_tol", "points"), "profile")
    points = _integer(raw, "points", "profile", 4001)
    if points < 5 or points % 2 == 0:
        raise ConfigError("profile.points must be an odd integer >= 5")
    config = ProfileConfig(
        halfwidth_scale=_number(raw, "halfwidth_scale", "profile", 40.0),
        tail_tol=_number(raw, "tail_tol", "profile", 1e-8),
        points=points,
    )
    _positive(config.halfwidth_scale, "profile.halfwidth_scale")
    _positive(config.tail_tol, "profile.tail_tol")
    return config


def _load_grid(raw: dict[str, Any]) -> GridConfig:
    _check_keys(raw, ("length", "max_spacing", "nodes"), "grid")
    length_raw = raw.get("length", "auto")
    length = None if length_raw in (None, "auto") else _number(raw, "length", "grid", None)
    nodes = _integer(raw, "nodes", "grid", None)
    if nodes is not None and nodes < 16:
        raise ConfigError("grid.nodes must be >= 16")
    config = GridConfig(length=length, max_spacing=_number(raw, "max_spacing", "grid", 0.5), nodes=nodes)
    _positive(config.length, "grid.length")
    _positive(config.max_spacing, "grid.max_spacing")
    return config


def _load_time(raw: dict[str, Any]) -> TimeConfig:
    _check_keys(raw, ("t_final", "cfl", "cfl_diffusive", "upwind_density"), "time")
    t_final = _number(raw, "t_final", "time", None)
    _positive(t_final, "time.t_final")
    solver = SolverSettings(
        cfl=_number(raw, "cfl", "time", 0.4),
        cfl_diffusive=_number(raw, "cfl_diffusive", "time", 0.25),
        upwind_density=bool(raw.get("upwind_density", True)),
    )
    return TimeConfig(t_final=t_final, solver=solver)


def _load_shift(raw: dict[str, Any]) -> ShiftConfig:
    _check_keys(raw, ("beta", "beta_scale", "frozen"), "shift")
    config = ShiftConfig(
        beta=_number(raw, "beta", "shift", None),
        beta_scale=_number(raw, "beta_scale", "shift", 40.0),
        frozen=bool(raw.get("frozen", False)),
    )
    _positive(config.beta, "shift.beta")
    _positive(config.beta_scale, "shift.beta_scale")
    return config


def _load_perturbation(raw: dict[str, Any]) -> PerturbationSpec:
    _check_keys(raw, ("shape", "amplitude", "center", "width", "components", "modes", "tol"), "perturbation")
    components_raw = raw.get("components", ["u"])
    if components_raw == "all":
        components = COMPONENTS
    elif isinstance(components_raw, str):
        components = (components_raw,)
    elif isinstance(components_raw, list):
        components = tuple(str(item) for item in components_raw)
    else:
        raise ConfigError("perturbation.components must be a list or 'all'")
    return PerturbationSpec(
        shape=str(raw.get("shape", "gaussian")).strip().lower(),
        amplitude=_number(raw, "amplitude", "perturbation", 0.01),
        center=_number(raw, "center", "perturbation", None),
        width=_number(raw, "width", "perturbation", 20.0),
        components=components,
        modes=_integer(raw, "modes", "perturbation", 4),
        tol=_number(raw, "tol", "perturbation", 1e-10),
    )


def _load_diagnostics(raw: dict[str, Any]) -> DiagnosticsConfig:
    _check_keys(raw, ("every", "dissipation_tolerance", "identity_tolerance"), "diagnostics")
    every = _integer(raw, "every", "diagnostics", 1)
    if every < 1:
        raise ConfigError("diagnostics.every must be >= 1")
    config = DiagnosticsConfig(
        every=every,
        dissipation_tolerance=_number(raw, "dissipation_tolerance", "diagnostics", 1e-3),
        identity_tolerance=_number(raw, "identity_tolerance", "diagnostics", 1e-12),
    )
    _positive(config.dissipation_tolerance, "diagnostics.dissipation_tolerance")
    _positive(config.identity_tolerance, "diagnostics.identity_tolerance")
    return config


def _load_output(raw: dict[str, Any]) -> OutputConfig:
    _check_keys(raw, ("directory", "snapshots", "records_csv", "profile_csv"), "output")
    snapshots_raw = raw.get("snapshots") or []
    if not isinstance(snapshots_raw, list):
        raise ConfigError("output.snapshots must be a list of times")
    snapshots = []
    for value in snapshots_raw:
        try:
            snapshots.append(float(value))
        except (TypeError, ValueError):
            raise ConfigError("output.snapshots entries must be numbers")
        if snapshots[-1] < 0:
            raise ConfigError("output.snapshots entries must be >= 0")
    return OutputConfig(
        directory=str(raw.get("directory", "./output")),
        snapshots=sorted(snapshots),
        records_csv=bool(raw.get("records_csv", False)),
        profile_csv=bool(raw.get("profile_csv", False)),
    )
