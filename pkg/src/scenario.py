from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from pathlib import Path

from .config import DEFAULT_DELTA, ScenarioConfig
from .diagnostics import entropy_dissipation_check, leading_constants
from .errors import ConfigError
from .hugoniot import (
    ShockData,
    impermeable_closure,
    left_state_for_amplitude,
    left_state_on_S3,
    outflow_closure,
)
from .profile import PROFILE_COLUMNS, ShockProfile, build_profile, profile_rows
from .shift import check_truncation
from .simulation import Simulation, SimulationSettings
from .solver.boundary import BoundaryKind, BoundarySpec
from .solver.grid import Grid1D
from .solver.perturbation import PerturbationSpec, initialize
from .summary import RunSummary, fill_from_records, save_summary, write_summary_csv
from .thermo import State
from .verdicts import classify_run
from .verification import MANUFACTURED_T_FINAL, ManufacturedSolution, manufactured_error
from .writers.csv import CsvSettings, CsvWriter
from .writers.factory import build_record_writers, emit_record, write_snapshot


STABILITY_T_FINAL = 200.0
# Transport runs follow the wave for this many units of sigma * t.
TRANSPORT_DISTANCE = 5.0
# Extra room past the shock at t_final, in units of 1/delta.
TAIL_MARGIN = 60.0
# Room kept past the farthest xi a run visits, in units of 1/delta.
COVER_MARGIN = 10.0
DEFAULT_MANUFACTURED_NODES = 81

SUMMARY_FILE = "summary.json"
SUMMARY_CSV_FILE = "summary.csv"
PROFILE_FILE = "profile.csv"

logger = logging.getLogger(__name__)


@dataclass
class ScenarioPlan:
    shock: ShockData
    bc: BoundarySpec
    beta: float
    t_final: float
    grid: Grid1D


def resolve_shock(config: ScenarioConfig) -> tuple[ShockData, BoundarySpec]:
    """Run the closure the boundary kind calls for and return the wave with its boundary data."""
    gas = config.gas
    shock_cfg = config.shock
    boundary = config.boundary
    right = shock_cfg.right
    if boundary.kind is BoundaryKind.OUTFLOW:
        if boundary.u_minus is not None:
            if shock_cfg.rho_minus is not None or shock_cfg.delta is not None:
                raise ConfigError("set either boundary.u_minus/theta_minus or a shock amplitude, not both")
            u_minus, theta_minus = boundary.u_minus, boundary.theta_minus
        else:
            if shock_cfg.rho_minus is not None:
                seed = left_state_on_S3(gas, right, shock_cfg.rho_minus)
            else:
                seed = left_state_for_amplitude(gas, right, shock_cfg.delta or DEFAULT_DELTA)
            if not seed.left.u < 0:
                raise ConfigError(
                    f"shock amplitude gives u_minus={seed.left.u:.6g}; the outflow problem needs u_minus < 0"
                )
            u_minus, theta_minus = seed.left.u, seed.left.theta
        shock = outflow_closure(gas, right, u_minus, theta_minus, shock_cfg.tol)
    else:
        if shock_cfg.rho_minus is not None:
            raise ConfigError("shock.rho_minus is fixed by the impermeable closure; use shock.delta or shock.right.u")
        u_plus = right.u
        if shock_cfg.delta is not None:
            if shock_cfg.right_u_explicit and right.u != -shock_cfg.delta:
                raise ConfigError("shock.delta and shock.right.u disagree (impermeable walls have delta = -u_plus)")
            u_plus = -shock_cfg.delta
        elif not shock_cfg.right_u_explicit:
            u_plus = -DEFAULT_DELTA
        shock = impermeable_closure(gas, State(rho=right.rho, u=u_plus, theta=right.theta))
    if shock.degenerate:
        raise ConfigError("the configured shock has zero amplitude")
    logger.info(
        "Closure (%s): rho-=%.10g u-=%.10g theta-=%.10g sigma=%.10g delta=%.6g",
        boundary.kind.value,
        shock.left.rho,
        shock.left.u,
        shock.left.theta,
        shock.sigma,
        shock.delta,
    )
    return shock, BoundarySpec.from_state(boundary.kind, shock.left)


def plan_scenario(config: ScenarioConfig, shock: ShockData, bc: BoundarySpec) -> ScenarioPlan:
    delta = shock.delta
    beta = config.shift.beta if config.shift.beta is not None else config.shift.beta_scale / delta
    t_final = config.time.t_final
    if t_final is None:
        t_final = STABILITY_T_FINAL if config.scenario.mode == "stability" else TRANSPORT_DISTANCE / shock.sigma
    length = config.grid.length
    if length is None:
        length = beta + shock.sigma * t_final + TAIL_MARGIN / delta
    if config.grid.nodes is not None:
        grid = Grid1D(L=length, N=config.grid.nodes)
    else:
        grid = Grid1D.with_spacing(length, min(0.5 / delta, config.grid.max_spacing))
    logger.info("Grid: L=%.6g N=%s h=%.4g beta=%.6g t_final=%.6g", grid.L, grid.N, grid.h, beta, t_final)
    return ScenarioPlan(shock=shock, bc=bc, beta=beta, t_final=t_final, grid=grid)


def profile_extent(config: ScenarioConfig, plan: ScenarioPlan) -> tuple[float, int]:
    """Half-width and point count of the profile table for a run.

    The configured width is widened to cover every xi = x - sigma t - X - beta the run visits,
    with |X| <= sigma t / 2, at the node spacing of the configured table.
    """
    delta = plan.shock.delta
    base = config.profile.halfwidth_scale / delta
    reach = max(plan.beta + 1.5 * plan.shock.sigma * plan.t_final, plan.grid.L - plan.beta)
    halfwidth = max(base, reach + COVER_MARGIN / delta)
    spacing = 2.0 * base / (config.profile.points - 1)
    points = max(config.profile.points, 2 * math.ceil(halfwidth / spacing) + 1)
    return halfwidth, points


def build_scenario_profile(
    config: ScenarioConfig, shock: ShockData, plan: ScenarioPlan | None = None
) -> ShockProfile:
    if plan is None:
        halfwidth, points = config.profile.halfwidth_scale / shock.delta, config.profile.points
    else:
        halfwidth, points = profile_extent(config, plan)
    profile = build_profile(config.gas, shock, halfwidth=halfwidth, tail_tol=config.profile.tail_tol, points=points)
    logger.info("Profile built: %s points, halfwidth %.6g", profile.xi.size, profile.halfwidth)
    return profile


def write_profile_csv(path: Path, profile: ShockProfile) -> None:
    with CsvWriter(CsvSettings(path=path, columns=PROFILE_COLUMNS)) as writer:
        writer.write_rows(profile_rows(profile))


def run_scenario(config: ScenarioConfig, output_dir: str | Path | None = None) -> RunSummary:
    directory = Path(output_dir if output_dir is not None else config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    logger.info("Scenario %s (%s) -> %s", config.scenario.name, config.scenario.mode, directory)
    if config.scenario.mode == "manufactured":
        summary = _run_manufactured(config)
    else:
        summary = _run_wave(config, directory)
    save_summary(directory / SUMMARY_FILE, summary)
    write_summary_csv(directory / SUMMARY_CSV_FILE, [summary])
    logger.info(
        "Scenario %s finished: final_sup_err=%s passed=%s",
        config.scenario.name,
        summary.final_sup_err if summary.mode != "manufactured" else summary.manufactured_error,
        summary.passed,
    )
    for reason in summary.reasons:
        logger.info("  %s", reason)
    return summary


def _run_manufactured(config: ScenarioConfig) -> RunSummary:
    nodes = config.grid.nodes or DEFAULT_MANUFACTURED_NODES
    t_final = config.time.t_final or MANUFACTURED_T_FINAL
    error = manufactured_error(nodes, t_final, config.time.solver, config.gas)
    return RunSummary(
        name=config.scenario.name,
        mode="manufactured",
        boundary=BoundaryKind.OUTFLOW.value,
        seed=config.scenario.seed,
        length=ManufacturedSolution.length,
        nodes=nodes,
        h=ManufacturedSolution.length / (nodes - 1),
        t_final=t_final,
        manufactured_error=error,
    )


def _run_wave(config: ScenarioConfig, directory: Path) -> RunSummary:
    gas = config.gas
    shock, bc = resolve_shock(config)
    plan = plan_scenario(config, shock, bc)
    profile = build_scenario_profile(config, shock, plan)
    if config.output.profile_csv:
        write_profile_csv(directory / PROFILE_FILE, profile)
    check_truncation(profile, plan.grid, plan.beta, plan.t_final)
    alpha, M = leading_constants(gas, shock)

    stability = config.scenario.mode == "stability"
    perturbation = config.perturbation if stability else PerturbationSpec()
    field = initialize(plan.grid, profile, plan.beta, perturbation, seed=config.scenario.seed)
    simulation = Simulation(
        gas,
        profile,
        bc,
        SimulationSettings(
            t_final=plan.t_final,
            beta=plan.beta,
            record_every=config.diagnostics.every,
            snapshot_times=tuple(config.output.snapshots),
            frozen_shift=config.shift.frozen,
        ),
        config.time.solver,
    )
    writers = build_record_writers(config.output, directory)
    try:
        result = simulation.run(
            field,
            on_record=lambda record: emit_record(writers, record),
            on_snapshot=lambda snap: write_snapshot(directory, snap),
        )
    finally:
        for writer in writers:
            writer.close()

    dissipation = None
    if stability:
        dissipation = entropy_dissipation_check(
            result.records, M, shock.delta, tolerance=config.diagnostics.dissipation_tolerance
        )
    summary = RunSummary(
        name=config.scenario.name,
        mode=config.scenario.mode,
        boundary=bc.kind.value,
        seed=config.scenario.seed,
        delta=shock.delta,
        sigma=shock.sigma,
        rho_minus=shock.left.rho,
        u_minus=shock.left.u,
        theta_minus=shock.left.theta,
        M=M,
        alpha=alpha,
        beta=plan.beta,
        length=plan.grid.L,
        nodes=plan.grid.N,
        h=plan.grid.h,
        t_final=plan.t_final,
        steps=result.steps,
        mass_initial=result.mass[0],
        mass_final=result.mass[1],
    )
    fill_from_records(summary, result.records, dissipation)
    if summary.shift_bound_violations:
        logger.warning("|X(t)| exceeded sigma t / 2 on %s records", summary.shift_bound_violations)
    verdict = classify_run(summary, bc.kind, config.diagnostics.identity_tolerance, config.shift.frozen)
    summary.passed = verdict.passed
    summary.reasons = verdict.reasons
    return summary
