from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Callable

import numpy as np

from ..errors import StepSizeError
from ..thermo import GasParams, State
from .boundary import BoundarySpec, apply_bc
from .grid import Field

# forcing(t, x) -> (s_rho, s_u, s_theta), added to the right-hand sides
Forcing = Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
StageHook = Callable[[int, Field], None]


@dataclass(frozen=True)
class SolverSettings:
    cfl: float = 0.4
    cfl_diffusive: float = 0.25
    upwind_density: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.cfl <= 1:
            raise ValueError("time.cfl must be in (0, 1]")
        if not 0 < self.cfl_diffusive <= 0.5:
            raise ValueError("time.cfl_diffusive must be in (0, 0.5]")


def stable_time_step(field: Field, gas: GasParams, settings: SolverSettings | None = None) -> float:
    settings = settings or SolverSettings()
    h = field.grid.h
    speed = np.max(np.abs(field.u) + np.sqrt(gas.gamma * gas.R * field.theta))
    advective = settings.cfl * h / speed
    diffusivity = max(gas.mu, gas.kappa * (gas.gamma - 1.0) / gas.R)
    diffusive = settings.cfl_diffusive * h * h * float(np.min(field.rho)) / diffusivity
    return float(min(advective, diffusive))


def rates(
    field: Field,
    gas: GasParams,
    settings: SolverSettings | None = None,
    forcing: Forcing | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Semi-discrete time derivatives of (rho, u, theta).

    Node 0 carries only the one-sided continuity equation; u and theta there,
    and all of node N-1, are Dirichlet and get zero rates.
    """
    settings = settings or SolverSettings()
    h = field.grid.h
    rho, u, theta = field.rho, field.u, field.theta
    drho = np.zeros_like(rho)
    du = np.zeros_like(u)
    dtheta = np.zeros_like(theta)

    rc, uc, tc = rho[1:-1], u[1:-1], theta[1:-1]
    ux = (u[2:] - u[:-2]) / (2.0 * h)
    tx = (theta[2:] - theta[:-2]) / (2.0 * h)
    rx = (rho[2:] - rho[:-2]) / (2.0 * h)
    uxx = (u[2:] - 2.0 * uc + u[:-2]) / (h * h)
    txx = (theta[2:] - 2.0 * tc + theta[:-2]) / (h * h)
    if settings.upwind_density:
        backward = (rc - rho[:-2]) / h
        forward = (rho[2:] - rc) / h
        rx_advect = np.where(uc > 0, backward, forward)
    else:
        rx_advect = rx

    drho[1:-1] = -(uc * rx_advect + rc * ux)
    du[1:-1] = -uc * ux - gas.R * (rx * tc + rc * tx) / rc + gas.mu * uxx / rc
    dtheta[1:-1] = (
        -uc * tx
        - (gas.gamma - 1.0) * tc * ux
        + (gas.kappa * txx + gas.mu * ux * ux) / (gas.cv * rc)
    )

    ux0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
    if settings.upwind_density:
        rx0 = (rho[1] - rho[0]) / h
    else:
        rx0 = (-3.0 * rho[0] + 4.0 * rho[1] - rho[2]) / (2.0 * h)
    drho[0] = -(u[0] * rx0 + rho[0] * ux0)

    if forcing is not None:
        s_rho, s_u, s_theta = forcing(field.t, field.grid.x)
        drho[:-1] += s_rho[:-1]
        du[1:-1] += s_u[1:-1]
        dtheta[1:-1] += s_theta[1:-1]
    return drho, du, dtheta


def step(
    field: Field,
    gas: GasParams,
    bc: BoundarySpec,
    far_state: State,
    dt: float,
    settings: SolverSettings | None = None,
    forcing: Forcing | None = None,
    stage_hook: StageHook | None = None,
) -> Field:
    """One two-stage (Heun) step. `stage_hook(i, stage_field)` sees both stage inputs."""
    settings = settings or SolverSettings()
    limit = stable_time_step(field, gas, settings)
    if not 0 < dt <= limit * (1.0 + 1e-12):
        raise StepSizeError(f"dt={dt:.6g} violates the stability limit {limit:.6g}")

    if stage_hook is not None:
        stage_hook(0, field)
    k1 = rates(field, gas, settings, forcing)
    stage = field.copy(
        t=field.t + dt,
        rho=field.rho + dt * k1[0],
        u=field.u + dt * k1[1],
        theta=field.theta + dt * k1[2],
    )
    apply_bc(stage, bc, far_state)

    if stage_hook is not None:
        stage_hook(1, stage)
    k2 = rates(stage, gas, settings, forcing)
    half = 0.5 * dt
    result = field.copy(
        t=field.t + dt,
        rho=field.rho + half * (k1[0] + k2[0]),
        u=field.u + half * (k1[1] + k2[1]),
        theta=field.theta + half * (k1[2] + k2[2]),
    )
    return apply_bc(result, bc, far_state)


def total_mass(field: Field) -> float:
    return field.grid.integrate(field.rho)


class HalfLineSolver:
    """Owns the solution on one grid and advances it with a fixed boundary closure."""

    def __init__(
        self,
        gas: GasParams,
        bc: BoundarySpec,
        far_state: State,
        settings: SolverSettings | None = None,
        forcing: Forcing | None = None,
    ) -> None:
        self._gas = gas
        self._bc = bc
        self._far_state = far_state
        self._settings = settings or SolverSettings()
        self._forcing = forcing
        self._logger = logging.getLogger(__name__)

    @property
    def settings(self) -> SolverSettings:
        return self._settings

    def time_step(self, field: Field, remaining: float) -> float:
        return min(stable_time_step(field, self._gas, self._settings), remaining)

    def advance(self, field: Field, dt: float, stage_hook: StageHook | None = None) -> Field:
        return step(field, self._gas, self._bc, self._far_state, dt, self._settings, self._forcing, stage_hook)

    def run(self, field: Field, t_final: float) -> Field:
        steps = 0
        while field.t < t_final - 1e-12 * max(1.0, t_final):
            field = self.advance(field, self.time_step(field, t_final - field.t))
            steps += 1
        self._logger.debug("Advanced to t=%.6g in %s steps", field.t, steps)
        return field
