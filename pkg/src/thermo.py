from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np


# Below this |z - 1| the series form of phi is used.
PHI_SERIES_RADIUS = 1e-2


@dataclass(frozen=True)
class GasParams:
    R: float = 1.0
    gamma: float = 5.0 / 3.0
    mu: float = 1.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not self.R > 0:
            raise ValueError("gas.R must be > 0")
        if not self.gamma > 1:
            raise ValueError("gas.gamma must be > 1")
        if not self.mu > 0:
            raise ValueError("gas.mu must be > 0")
        if not self.kappa > 0:
            raise ValueError("gas.kappa must be > 0")

    @property
    def cv(self) -> float:
        return self.R / (self.gamma - 1.0)


@dataclass(frozen=True)
class State:
    rho: float
    u: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and math.isfinite(self.u) and math.isfinite(self.theta)):
            raise ValueError("state values must be finite")
        if not self.rho > 0:
            raise ValueError("state.rho must be > 0")
        if not self.theta > 0:
            raise ValueError("state.theta must be > 0")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.rho, self.u, self.theta)


@dataclass(frozen=True)
class ConservedState:
    rho: float
    m: float
    E: float

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValueError("conserved.rho must be > 0")


class RegionTag(str, Enum):
    SUPER_PLUS = "super_plus"
    TRANS_PLUS = "trans_plus"
    SUB_PLUS = "sub_plus"
    SUB_MINUS = "sub_minus"
    TRANS_MINUS = "trans_minus"
    SUPER_MINUS = "super_minus"


def pressure(gas: GasParams, s: State) -> float:
    return gas.R * s.rho * s.theta


def sound_speed(gas: GasParams, s: State) -> float:
    if not s.theta > 0:
        raise ValueError("theta must be positive")
    return math.sqrt(gas.gamma * gas.R * s.theta)


def eigenvalues(gas: GasParams, s: State) -> tuple[float, float, float]:
    c = sound_speed(gas, s)
    return (s.u - c, s.u, s.u + c)


def classify_region(gas: GasParams, s: State, tol: float = 0.0) -> RegionTag:
    """Place a state in one of the six regions split by u = 0 and u = +-c.

    Exact comparison by default; a positive `tol` widens the transonic bands and
    turns |u| < tol into an error instead of guessing a sign.
    """
    c = sound_speed(gas, s)
    u = s.u
    if u == 0.0 or abs(u) < tol:
        raise ValueError(f"ambiguous region: |u|={abs(u):.3e} is within tolerance of 0")
    if abs(u - c) <= tol:
        return RegionTag.TRANS_PLUS
    if abs(u + c) <= tol:
        return RegionTag.TRANS_MINUS
    if u > c:
        return RegionTag.SUPER_PLUS
    if u > 0:
        return RegionTag.SUB_PLUS
    if u > -c:
        return RegionTag.SUB_MINUS
    return RegionTag.SUPER_MINUS


def entropy(gas: GasParams, s: State) -> float:
    return -gas.R * math.log(s.rho) + gas.cv * math.log(s.theta)


def phi(z):
    """Phi(z) = z - ln z - 1, accurate where z is close to 1."""
    z = np.asarray(z, dtype=float)
    w = z - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = w - np.log1p(w)
    series = w * w * (
        0.5 + w * (-1.0 / 3.0 + w * (0.25 + w * (-0.2 + w * (1.0 / 6.0 + w * (-1.0 / 7.0 + w * (0.125 - w / 9.0))))))
    )
    return np.where(np.abs(w) < PHI_SERIES_RADIUS, series, direct)[()]


def relative_entropy_density(gas: GasParams, rho, u, theta, rho_bar, u_bar, theta_bar):
    """theta_bar * eta(U|U_bar) for arrays or scalars of primitive variables."""
    rho = np.asarray(rho, dtype=float)
    theta_bar = np.asarray(theta_bar, dtype=float)
    du = np.asarray(u, dtype=float) - np.asarray(u_bar, dtype=float)
    return rho * (
        gas.R * theta_bar * phi(np.asarray(rho_bar) / rho)
        + gas.cv * theta_bar * phi(np.asarray(theta) / theta_bar)
        + 0.5 * du * du
    )


def weighted_relative_entropy_density(gas: GasParams, s: State, sbar: State) -> float:
    value = relative_entropy_density(gas, s.rho, s.u, s.theta, sbar.rho, sbar.u, sbar.theta)
    return float(value)


def primitive_to_conserved(gas: GasParams, s: State) -> ConservedState:
    internal = gas.cv * s.theta
    return ConservedState(rho=s.rho, m=s.rho * s.u, E=s.rho * (internal + 0.5 * s.u * s.u))


def conserved_to_primitive(gas: GasParams, c: ConservedState) -> State:
    u = c.m / c.rho
    theta = (c.E / c.rho - 0.5 * u * u) / gas.cv
    if not theta > 0:
        raise ValueError(f"recovered temperature must be > 0, got {theta:.6g}")
    return State(rho=c.rho, u=u, theta=theta)
