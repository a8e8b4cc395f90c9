from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np

from .fitting import loglog_slope
from .profile import ShockProfile, sample_shifted
from .simulation import Simulation, SimulationSettings
from .solver.boundary import BoundaryKind, BoundarySpec
from .solver.grid import Field, Grid1D
from .solver.perturbation import initialize
from .solver.stepper import HalfLineSolver, SolverSettings
from .thermo import GasParams, State


MANUFACTURED_GAS = GasParams(R=1.0, gamma=5.0 / 3.0, mu=0.05, kappa=0.05)
MANUFACTURED_FAR_STATE = State(rho=1.0, u=-0.5, theta=1.0)
MANUFACTURED_NODES = (41, 81, 161)
MANUFACTURED_T_FINAL = 0.1

logger = logging.getLogger(__name__)


class ManufacturedSolution:
    """Smooth (rho, u, theta) on [0, 1] with outflow data at x = 0 and the far state at x = 1.

    rho = 1 + 0.2 sin(pi x) cos t, u = -0.5 + 0.1 sin(pi x) sin(t + 1),
    theta = 1 + 0.1 sin(2 pi x) cos t.
    """

    length = 1.0

    def __init__(self, gas: GasParams = MANUFACTURED_GAS) -> None:
        self.gas = gas
        self.boundary = BoundarySpec(BoundaryKind.OUTFLOW, u_minus=-0.5, theta_minus=1.0)
        self.far_state = MANUFACTURED_FAR_STATE

    def exact(self, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = np.sin(np.pi * x)
        return (
            1.0 + 0.2 * s * np.cos(t),
            -0.5 + 0.1 * s * np.sin(t + 1.0),
            1.0 + 0.1 * np.sin(2.0 * np.pi * x) * np.cos(t),
        )

    def forcing(self, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        gas = self.gas
        pi = np.pi
        s, c = np.sin(pi * x), np.cos(pi * x)
        s2, c2 = np.sin(2.0 * pi * x), np.cos(2.0 * pi * x)
        rho, u, theta = self.exact(t, x)
        rho_t = -0.2 * s * np.sin(t)
        rho_x = 0.2 * pi * c * np.cos(t)
        u_t = 0.1 * s * np.cos(t + 1.0)
        u_x = 0.1 * pi * c * np.sin(t + 1.0)
        u_xx = -0.1 * pi * pi * s * np.sin(t + 1.0)
        theta_t = -0.1 * s2 * np.sin(t)
        theta_x = 0.2 * pi * c2 * np.cos(t)
        theta_xx = -0.4 * pi * pi * s2 * np.cos(t)
        s_rho = rho_t + u * rho_x + rho * u_x
        s_u = u_t + u * u_x + gas.R * (rho_x * theta + rho * theta_x) / rho - gas.mu * u_xx / rho
        s_theta = (
            theta_t
            + u * theta_x
            + (gas.gamma - 1.0) * theta * u_x
            - (gas.kappa * theta_xx + gas.mu * u_x * u_x) / (gas.cv * rho)
        )
        return s_rho, s_u, s_theta

    def initial_field(self, grid: Grid1D) -> Field:
        rho, u, theta = self.exact(0.0, grid.x)
        return Field(grid=grid, t=0.0, rho=rho, u=u, theta=theta)


@dataclass
class RefinementResult:
    spacings: list[float]
    errors: list[float]
    order: float

    @property
    def monotone(self) -> bool:
        return all(later < earlier for earlier, later in zip(self.errors, self.errors[1:]))


def manufactured_error(
    nodes: int,
    t_final: float = MANUFACTURED_T_FINAL,
    settings: SolverSettings | None = None,
    gas: GasParams = MANUFACTURED_GAS,
) -> float:
    """Sup error over the three variables at t_final on a grid of `nodes` points."""
    solution = ManufacturedSolution(gas)
    grid = Grid1D(L=solution.length, N=nodes)
    solver = HalfLineSolver(gas, solution.boundary, solution.far_state, settings, forcing=solution.forcing)
    field = solver.run(solution.initial_field(grid), t_final)
    exact = solution.exact(field.t, grid.x)
    return float(max(np.max(np.abs(field.rho - exact[0])), np.max(np.abs(field.u - exact[1])), np.max(np.abs(field.theta - exact[2]))))


def manufactured_refinement(
    nodes: tuple[int, ...] = MANUFACTURED_NODES,
    t_final: float = MANUFACTURED_T_FINAL,
    settings: SolverSettings | None = None,
    gas: GasParams = MANUFACTURED_GAS,
) -> RefinementResult:
    spacings = [1.0 / (n - 1) for n in nodes]
    errors = [manufactured_error(n, t_final, settings, gas) for n in nodes]
    order = loglog_slope(spacings, errors)
    logger.info("Manufactured refinement: errors=%s order=%.3f", ", ".join(f"{e:.3e}" for e in errors), order)
    return RefinementResult(spacings=spacings, errors=errors, order=order)


def transport_error(
    gas: GasParams,
    profile: ShockProfile,
    bc: BoundarySpec,
    grid: Grid1D,
    beta: float,
    t_final: float,
    frozen_shift: bool = False,
    settings: SolverSettings | None = None,
) -> float:
    """Sup distance at t_final between the solution from exact wave data and the translated wave."""
    field = initialize(grid, profile, beta)
    simulation = Simulation(
        gas,
        profile,
        bc,
        SimulationSettings(t_final=t_final, beta=beta, record_every=10**9, frozen_shift=frozen_shift),
        settings,
    )
    result = simulation.run(field)
    sample = sample_shifted(profile, grid.x, t=result.field.t, X=result.shift.X, beta=beta)
    final = result.field
    return float(
        max(
            np.max(np.abs(final.rho - sample.rho)),
            np.max(np.abs(final.u - sample.u)),
            np.max(np.abs(final.theta - sample.theta)),
        )
    )


def transport_refinement(
    gas: GasParams,
    profile: ShockProfile,
    bc: BoundarySpec,
    length: float,
    spacings: tuple[float, ...],
    beta: float,
    t_final: float,
    frozen_shift: bool = False,
) -> RefinementResult:
    errors = []
    actual = []
    for spacing in spacings:
        grid = Grid1D.with_spacing(length, spacing)
        actual.append(grid.h)
        errors.append(transport_error(gas, profile, bc, grid, beta, t_final, frozen_shift))
    return RefinementResult(spacings=actual, errors=errors, order=loglog_slope(actual, errors))
