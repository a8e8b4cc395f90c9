from __future__ import annotations

from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from .hugoniot import ShockData
from .profile import ProfileSample, ShockProfile, sample_shifted
from .solver.grid import Field, Grid1D
from .thermo import GasParams


TRUNCATION_TOL = 1e-10

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShiftState:
    X: float
    Xdot: float
    beta: float
    M: float
    delta: float

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ValueError("shift.beta must be > 0")
        if not self.M > 0:
            raise ValueError("shift.M must be > 0")
        if not self.delta > 0:
            raise ValueError("shift needs a shock with delta > 0")

    @classmethod
    def start(cls, beta: float, M: float, delta: float) -> ShiftState:
        return cls(X=0.0, Xdot=0.0, beta=beta, M=M, delta=delta)


def shift_constant(gas: GasParams, shock: ShockData) -> float:
    g = gas.gamma
    return (g + 1.0) / shock.left.rho * (1.0 + 2.0 * gas.kappa * (g - 1.0) ** 2 / (gas.mu * gas.R * g))


def weights(shock: ShockData, sample: ProfileSample) -> tuple[np.ndarray, np.ndarray]:
    """(a, a_x) on sampled profile values: a = 1 + (u- - u_bar)/sqrt(delta)."""
    root = math.sqrt(shock.delta)
    return 1.0 + (shock.left.u - sample.u) / root, -sample.d_u / root


def weight_a(shock: ShockData, profile: ShockProfile, xi):
    sample = sample_shifted(profile, xi)
    a = weights(shock, sample)[0]
    return a if np.ndim(xi) else float(a[0])


def weight_a_derivative(shock: ShockData, profile: ShockProfile, xi):
    sample = sample_shifted(profile, xi)
    a_x = weights(shock, sample)[1]
    return a_x if np.ndim(xi) else float(a_x[0])


def reference_sample(field: Field, profile: ShockProfile, shift: ShiftState) -> ProfileSample:
    """The shifted wave at the field's nodes and time."""
    return sample_shifted(profile, field.grid.x, t=field.t, X=shift.X, beta=shift.beta)


def shift_rhs(field: Field, profile: ShockProfile, shift: ShiftState, gas: GasParams) -> float:
    sample = reference_sample(field, profile, shift)
    a = weights(profile.shock, sample)[0]
    integrand = a * (
        gas.R * sample.theta / sample.rho * (field.rho - sample.rho) * sample.d_rho
        + field.rho * (field.u - sample.u) * sample.d_u
        + gas.cv * field.rho / sample.theta * (field.theta - sample.theta) * sample.d_theta
    )
    return -shift.M / shift.delta * field.grid.integrate(integrand)


def predict(shift: ShiftState, k1: float, dt: float) -> ShiftState:
    """Shift seen by the second stage of a step."""
    return replace(shift, X=shift.X + dt * k1)


def advance_shift(shift: ShiftState, rhs_evaluations: tuple[float, float], dt: float) -> ShiftState:
    k1, k2 = rhs_evaluations
    return replace(shift, X=shift.X + 0.5 * dt * (k1 + k2), Xdot=0.5 * (k1 + k2))


def check_truncation(profile: ShockProfile, grid: Grid1D, beta: float, t_final: float) -> float:
    """Distance of the wave from its right end state at x = L over the run.

    The worst case is t = t_final with X = 0, where the shock sits closest to L.
    """
    right = profile.shock.right
    xi_end = grid.L - beta - profile.shock.sigma * t_final
    if xi_end <= profile.xi[-1]:
        sample = sample_shifted(profile, xi_end)
        tail = abs(sample.rho[0] - right.rho) + abs(sample.u[0] - right.u) + abs(sample.theta[0] - right.theta)
    else:
        last = (
            abs(profile.rho_bar[-1] - right.rho)
            + abs(profile.u_bar[-1] - right.u)
            + abs(profile.theta_bar[-1] - right.theta)
        )
        tail = last * math.exp(-profile.rates[1] * (xi_end - profile.xi[-1]))
    if tail > TRUNCATION_TOL:
        raise ValueError(
            f"grid.length={grid.L:.6g} truncates the wave tail ({tail:.3e} > {TRUNCATION_TOL:.0e}); "
            "increase grid.length or reduce time.t_final"
        )
    return float(tail)


class ShiftTracker:
    """Co-integrates X(t) with the PDE through the solver's stage hook."""

    def __init__(self, profile: ShockProfile, gas: GasParams, shift: ShiftState, frozen: bool = False) -> None:
        self._profile = profile
        self._gas = gas
        self._frozen = frozen
        self._stages: list[float] = []
        self._dt = 0.0
        self._logger = logging.getLogger(__name__)
        self.state = shift

    def rhs(self, field: Field) -> float:
        if self._frozen:
            return 0.0
        return shift_rhs(field, self._profile, self.state, self._gas)

    def begin_step(self, dt: float) -> None:
        self._dt = dt
        self._stages = []

    def stage_hook(self, index: int, field: Field) -> None:
        if index == 0:
            self._stages.append(self.rhs(field))
            return
        if self._frozen:
            self._stages.append(0.0)
            return
        stage_shift = predict(self.state, self._stages[0], self._dt)
        self._stages.append(shift_rhs(field, self._profile, stage_shift, self._gas))

    def finish_step(self) -> ShiftState:
        if len(self._stages) != 2:
            raise RuntimeError("shift step finished without both stage evaluations")
        self.state = advance_shift(self.state, (self._stages[0], self._stages[1]), self._dt)
        return self.state
