from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Callable

from .diagnostics import DiagnosticsRecord, evaluate
from .profile import ShockProfile
from .shift import ShiftState, ShiftTracker, shift_constant
from .solver.boundary import BoundarySpec, apply_bc
from .solver.grid import Field
from .solver.stepper import HalfLineSolver, SolverSettings, total_mass
from .thermo import GasParams


RecordCallback = Callable[[DiagnosticsRecord], None]
SnapshotCallback = Callable[[Field], None]


@dataclass
class SimulationSettings:
    t_final: float
    beta: float
    record_every: int = 1
    snapshot_times: tuple[float, ...] = ()
    frozen_shift: bool = False

    def __post_init__(self) -> None:
        if not self.t_final > 0:
            raise ValueError("time.t_final must be > 0")
        if self.record_every < 1:
            raise ValueError("diagnostics.every must be >= 1")


@dataclass
class SimulationResult:
    field: Field
    shift: ShiftState
    steps: int
    records: list[DiagnosticsRecord] = field(default_factory=list)
    mass: tuple[float, float] = (0.0, 0.0)


class Simulation:
    """Advances one half-line problem around a shifted wave and records diagnostics."""

    def __init__(
        self,
        gas: GasParams,
        profile: ShockProfile,
        bc: BoundarySpec,
        settings: SimulationSettings,
        solver_settings: SolverSettings | None = None,
    ) -> None:
        self._gas = gas
        self._profile = profile
        self._bc = bc
        self._settings = settings
        self._solver = HalfLineSolver(gas, bc, profile.shock.right, solver_settings)
        self._logger = logging.getLogger(__name__)

    def run(
        self,
        field: Field,
        on_record: RecordCallback | None = None,
        on_snapshot: SnapshotCallback | None = None,
    ) -> SimulationResult:
        settings = self._settings
        shock = self._profile.shock
        apply_bc(field, self._bc, shock.right)
        shift = ShiftState.start(settings.beta, shift_constant(self._gas, shock), shock.delta)
        tracker = ShiftTracker(self._profile, self._gas, shift, frozen=settings.frozen_shift)
        records: list[DiagnosticsRecord] = []
        pending = sorted(t for t in settings.snapshot_times if 0.0 <= t <= settings.t_final)
        mass_start = total_mass(field)

        def record() -> None:
            entry = evaluate(field, self._profile, tracker.state, self._gas, frozen=settings.frozen_shift)
            records.append(entry)
            if on_record is not None:
                on_record(entry)

        def snapshot() -> None:
            while pending and pending[0] <= field.t + 1e-12:
                pending.pop(0)
                if on_snapshot is not None:
                    on_snapshot(field)

        record()
        snapshot()
        steps = 0
        end = settings.t_final
        while end - field.t > 1e-12 * max(1.0, end):
            dt = self._solver.time_step(field, end - field.t)
            if pending:
                dt = min(dt, pending[0] - field.t)
            tracker.begin_step(dt)
            field = self._solver.advance(field, dt, tracker.stage_hook)
            tracker.finish_step()
            steps += 1
            finished = end - field.t <= 1e-12 * max(1.0, end)
            if steps % settings.record_every == 0 or finished:
                record()
            snapshot()
            if steps % 1000 == 0:
                self._logger.debug("t=%.4g steps=%s X=%.6g", field.t, steps, tracker.state.X)

        return SimulationResult(
            field=field,
            shift=tracker.state,
            steps=steps,
            records=records,
            mass=(mass_start, total_mass(field)),
        )
