from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.optimize import brentq, least_squares, root

from .errors import ShockCurveError
from .thermo import GasParams, State, eigenvalues, pressure, sound_speed


RH_TOLERANCE = 1e-10
ON_CURVE_TOLERANCE = 1e-8
# Keeps bracket ends strictly inside the admissible compression range.
COMPRESSION_MARGIN = 1e-12

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShockData:
    left: State
    right: State
    sigma: float
    delta: float
    family: int = 3

    @property
    def degenerate(self) -> bool:
        return self.delta == 0.0


def _rh_components(
    gas: GasParams,
    rho_l: float,
    u_l: float,
    theta_l: float,
    rho_r: float,
    u_r: float,
    theta_r: float,
    sigma: float,
) -> np.ndarray:
    p_l = gas.R * rho_l * theta_l
    p_r = gas.R * rho_r * theta_r
    e_l = rho_l * (gas.cv * theta_l + 0.5 * u_l * u_l)
    e_r = rho_r * (gas.cv * theta_r + 0.5 * u_r * u_r)
    mass = -sigma * (rho_r - rho_l) + (rho_r * u_r - rho_l * u_l)
    momentum = -sigma * (rho_r * u_r - rho_l * u_l) + (rho_r * u_r * u_r + p_r - rho_l * u_l * u_l - p_l)
    energy = -sigma * (e_r - e_l) + (u_r * (e_r + p_r) - u_l * (e_l + p_l))
    return np.array([mass, momentum, energy])


def rh_residual(gas: GasParams, left: State, right: State, sigma: float) -> np.ndarray:
    """Mass, momentum and energy jump residuals for a discontinuity moving at sigma."""
    return _rh_components(gas, left.rho, left.u, left.theta, right.rho, right.u, right.theta, sigma)


def shock_speed_3(gas: GasParams, left: State, right: State) -> float:
    if not left.rho > right.rho:
        raise ValueError("3-shock speed needs rho_minus > rho_plus")
    radicand = (left.rho / right.rho) * (pressure(gas, left) - pressure(gas, right)) / (left.rho - right.rho)
    if not radicand > 0:
        raise ValueError(f"3-shock speed radicand must be positive, got {radicand:.6g}")
    return right.u + math.sqrt(radicand)


def max_compression(gas: GasParams) -> float:
    return (gas.gamma + 1.0) / (gas.gamma - 1.0)


def shock_curve_point(gas: GasParams, right: State, rho_minus: float) -> tuple[State, float]:
    """Closed-form point of the 3-shock curve through `right`, parametrized by rho_minus.

    Uses the ideal-gas Hugoniot pressure ratio; (p- - p+)/(rho- - rho+) is expanded
    analytically so the zero-amplitude point needs no special case.
    """
    g = gas.gamma
    denom = (g + 1.0) * right.rho - (g - 1.0) * rho_minus
    if not denom > 0:
        raise ShockCurveError(
            f"rho_minus={rho_minus:.6g} exceeds the maximal compression "
            f"{max_compression(gas) * right.rho:.6g}"
        )
    p_plus = pressure(gas, right)
    slope = 2.0 * g * p_plus / denom
    p_minus = p_plus + slope * (rho_minus - right.rho)
    sigma = right.u + math.sqrt(rho_minus / right.rho * slope)
    u_minus = sigma + right.rho * (right.u - sigma) / rho_minus
    theta_minus = p_minus / (gas.R * rho_minus)
    return State(rho=rho_minus, u=u_minus, theta=theta_minus), sigma


def _admit(gas: GasParams, left: State, right: State, sigma: float, tol: float = RH_TOLERANCE) -> ShockData:
    residual = rh_residual(gas, left, right, sigma)
    worst = float(np.max(np.abs(residual)))
    if worst > tol:
        raise ShockCurveError(f"Rankine-Hugoniot residual {worst:.3e} exceeds {tol:.1e}")
    delta = abs(right.u - left.u)
    if not sigma > 0:
        raise ShockCurveError(f"shock speed must be positive, got {sigma:.6g}")
    if delta > 0:
        if not (left.rho > right.rho and left.u > right.u and left.theta > right.theta):
            raise ShockCurveError("3-shock end states must satisfy rho-, u-, theta- > rho+, u+, theta+")
        lam_left = eigenvalues(gas, left)[2]
        lam_right = eigenvalues(gas, right)[2]
        if not lam_left > sigma > lam_right:
            raise ShockCurveError(
                f"Lax condition violated: lambda3(left)={lam_left:.6g}, sigma={sigma:.6g}, "
                f"lambda3(right)={lam_right:.6g}"
            )
    return ShockData(left=left, right=right, sigma=sigma, delta=delta)


def _degenerate(gas: GasParams, right: State) -> ShockData:
    return _admit(gas, right, right, eigenvalues(gas, right)[2])


def _rho_for_velocity(gas: GasParams, right: State, u_target: float) -> float:
    """Bisection on the 1-parameter reduction u_minus(rho_minus) = u_target."""
    hi = right.rho * max_compression(gas) * (1.0 - COMPRESSION_MARGIN)

    def gap(rho_minus: float) -> float:
        return shock_curve_point(gas, right, rho_minus)[0].u - u_target

    if gap(hi) <= 0:
        raise ShockCurveError(f"velocity {u_target:.6g} is beyond the reach of the 3-shock curve")
    return brentq(gap, right.rho, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500)


def left_state_on_S3(gas: GasParams, right: State, rho_minus: float, tol: float = RH_TOLERANCE) -> ShockData:
    if rho_minus < right.rho:
        raise ValueError("rho_minus must be >= rho_plus on the 3-shock branch")
    if rho_minus == right.rho:
        return _degenerate(gas, right)
    guess, sigma0 = shock_curve_point(gas, right, rho_minus)

    def residual(z: np.ndarray) -> np.ndarray:
        return _rh_components(gas, rho_minus, z[0], z[1], right.rho, right.u, right.theta, z[2])

    x0 = np.array([guess.u, guess.theta, sigma0])
    solution = root(residual, x0, method="hybr", options={"xtol": 1e-14})
    x = x0
    if solution.success and np.max(np.abs(residual(solution.x))) <= np.max(np.abs(residual(x0))):
        x = solution.x
    else:
        logger.debug("Newton polish declined for rho_minus=%s; keeping curve point", rho_minus)
    left = State(rho=rho_minus, u=float(x[0]), theta=float(x[1]))
    return _admit(gas, left, right, float(x[2]), tol)


def left_state_for_amplitude(gas: GasParams, right: State, delta: float) -> ShockData:
    """Point of the 3-shock curve with velocity jump u- - u+ = delta."""
    if delta < 0:
        raise ValueError("shock.delta must be >= 0")
    if delta == 0:
        return _degenerate(gas, right)
    rho_minus = _rho_for_velocity(gas, right, right.u + delta)
    return left_state_on_S3(gas, right, rho_minus)


def outflow_closure(
    gas: GasParams,
    right: State,
    u_minus: float,
    theta_minus: float,
    tol: float = ON_CURVE_TOLERANCE,
) -> ShockData:
    if u_minus == right.u and theta_minus == right.theta:
        return _degenerate(gas, right)
    if not theta_minus > 0:
        raise ValueError("theta_minus must be > 0")
    if not right.u < u_minus < 0:
        raise ValueError("outflow closure needs u_plus < u_minus < 0")

    rho0 = _rho_for_velocity(gas, right, u_minus)
    sigma0 = shock_curve_point(gas, right, rho0)[1]

    def residual(z: np.ndarray) -> np.ndarray:
        return _rh_components(gas, z[0], u_minus, theta_minus, right.rho, right.u, right.theta, z[1])

    x0 = np.array([rho0, sigma0])
    fit = least_squares(residual, x0, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14)
    x = fit.x if np.max(np.abs(fit.fun)) <= np.max(np.abs(residual(x0))) else x0
    worst = float(np.max(np.abs(residual(x))))
    if worst > tol:
        raise ShockCurveError(
            f"(u_minus, theta_minus)=({u_minus:.6g}, {theta_minus:.6g}) is not on shock curve "
            f"(residual {worst:.3e} > {tol:.1e})"
        )
    left = State(rho=float(x[0]), u=u_minus, theta=theta_minus)
    shock = _admit(gas, left, right, float(x[1]), max(tol, RH_TOLERANCE))
    logger.debug("Outflow closure: rho_minus=%.12g sigma=%.12g", left.rho, shock.sigma)
    return shock


def impermeable_closure(gas: GasParams, right: State, tol: float = RH_TOLERANCE) -> ShockData:
    if not right.u < 0:
        raise ValueError("impermeable closure needs u_plus < 0")
    rho0 = _rho_for_velocity(gas, right, 0.0)
    guess, sigma0 = shock_curve_point(gas, right, rho0)

    def residual(z: np.ndarray) -> np.ndarray:
        return _rh_components(gas, z[0], 0.0, z[1], right.rho, right.u, right.theta, z[2])

    x0 = np.array([rho0, guess.theta, sigma0])
    solution = root(residual, x0, method="hybr", options={"xtol": 1e-14})
    x = x0
    if solution.success and np.max(np.abs(residual(solution.x))) <= np.max(np.abs(residual(x0))):
        x = solution.x
    left = State(rho=float(x[0]), u=0.0, theta=float(x[1]))
    shock = _admit(gas, left, right, float(x[2]), tol)
    logger.debug("Impermeable closure: rho_minus=%.12g sigma=%.12g", left.rho, shock.sigma)
    return shock


def sigma_gap(gas: GasParams, shock: ShockData) -> float:
    """|sigma - (u- + c-)|, linear in the amplitude for small shocks."""
    return abs(shock.sigma - (shock.left.u + sound_speed(gas, shock.left)))
