from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import logging
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from .errors import ProfileError
from .fitting import exponential_rate, loglog_slope
from .hugoniot import ShockData, left_state_for_amplitude, sigma_gap
from .thermo import GasParams, State, sound_speed


HALFWIDTH_SCALE = 40.0
DEFAULT_POINTS = 4001
DEFAULT_TAIL_TOL = 1e-8
LAUNCH_OFFSET = 1e-6
ODE_RTOL = 1e-10
MASS_TOL = 1e-10
CENTER_TOL = 1e-8
JACOBIAN_WINDOW = (0.05, 0.95)
# Tail rates are fitted where |rho - rho_end| lies in this band, relative to the jump.
TAIL_BAND = (1e-4, 1e-3)
# Values closer than this to an end state sit on floating-point plateaus.
ROUNDOFF_FLOOR = 1e-12

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ShockProfile:
    shock: ShockData
    xi: np.ndarray
    rho_bar: np.ndarray
    u_bar: np.ndarray
    theta_bar: np.ndarray
    d_rho: np.ndarray
    d_u: np.ndarray
    d_theta: np.ndarray
    dd_u: np.ndarray
    dd_theta: np.ndarray
    xi0_index: int
    gas: GasParams
    dd_rho: np.ndarray
    rates: tuple[float, float] = (0.0, 0.0)

    @property
    def delta(self) -> float:
        return self.shock.delta

    @property
    def halfwidth(self) -> float:
        return float(self.xi[-1])

    @cached_property
    def _splines(self) -> dict[str, object]:
        return {
            "rho": CubicHermiteSpline(self.xi, self.rho_bar, self.d_rho),
            "u": CubicHermiteSpline(self.xi, self.u_bar, self.d_u),
            "theta": CubicHermiteSpline(self.xi, self.theta_bar, self.d_theta),
            "d_rho": CubicHermiteSpline(self.xi, self.d_rho, self.dd_rho),
            "d_u": CubicHermiteSpline(self.xi, self.d_u, self.dd_u),
            "d_theta": CubicHermiteSpline(self.xi, self.d_theta, self.dd_theta),
            "dd_u": CubicSpline(self.xi, self.dd_u),
            "dd_theta": CubicSpline(self.xi, self.dd_theta),
        }


@dataclass
class ProfileSample:
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    d_rho: np.ndarray
    d_u: np.ndarray
    d_theta: np.ndarray
    dd_u: np.ndarray
    dd_theta: np.ndarray


class _TravelingWave:
    """Reduced (u, theta) system of the traveling wave, rho eliminated by mass flux."""

    def __init__(self, gas: GasParams, shock: ShockData) -> None:
        self.gas = gas
        self.shock = shock
        self.sigma = shock.sigma
        left = shock.left
        self.flux = left.rho * (left.u - self.sigma)
        self.u_mid = 0.5 * (shock.left.u + shock.right.u)

    def rho(self, u):
        return self.flux / (u - self.sigma)

    def rhs(self, u, theta) -> tuple[np.ndarray, np.ndarray]:
        # Each side is evaluated against its nearer end state to limit cancellation.
        near_left = np.asarray(u) > self.u_mid
        du_left, dtheta_left = self._rhs_from(self.shock.left, u, theta)
        du_right, dtheta_right = self._rhs_from(self.shock.right, u, theta)
        return np.where(near_left, du_left, du_right), np.where(near_left, dtheta_left, dtheta_right)

    def _rhs_from(self, ref: State, u, theta):
        gas = self.gas
        rho = self.rho(u)
        dev = u - ref.u
        f1 = self.flux * dev + gas.R * (rho * theta - ref.rho * ref.theta)
        f2 = self.flux * (gas.cv * (theta - ref.theta) - 0.5 * dev * dev) + gas.R * ref.rho * ref.theta * dev
        return f1 / gas.mu, f2 / gas.kappa

    def jacobian(self, u: float, theta: float) -> np.ndarray:
        gas = self.gas
        left = self.shock.left
        gap = u - self.sigma
        rho = self.flux / gap
        return np.array(
            [
                [(self.flux - gas.R * theta * rho / gap) / gas.mu, gas.R * rho / gas.mu],
                [(-self.flux * (u - left.u) + gas.R * left.rho * left.theta) / gas.kappa, self.flux * gas.cv / gas.kappa],
            ]
        )

    def second_derivatives(self, u, theta, du, dtheta):
        gas = self.gas
        left = self.shock.left
        gap = u - self.sigma
        rho = self.flux / gap
        ddu = ((self.flux - gas.R * theta * rho / gap) * du + gas.R * rho * dtheta) / gas.mu
        ddtheta = ((-self.flux * (u - left.u) + gas.R * left.rho * left.theta) * du + self.flux * gas.cv * dtheta) / gas.kappa
        return ddu, ddtheta


def _eigenpair(matrix: np.ndarray, pick: str) -> tuple[float, np.ndarray]:
    values, vectors = np.linalg.eig(matrix)
    if np.max(np.abs(values.imag)) > 1e-12 * max(1.0, np.max(np.abs(values.real))):
        raise ProfileError("end state linearization has complex eigenvalues")
    values = values.real
    vectors = vectors.real
    if pick == "unstable":
        positive = np.flatnonzero(values > 0)
        if positive.size != 1 or np.count_nonzero(values < 0) != 1:
            raise ProfileError("left end state is not a saddle of the traveling-wave system")
        index = int(positive[0])
    else:
        if not np.all(values < 0):
            raise ProfileError("right end state is not a stable node of the traveling-wave system")
        index = int(np.argmax(values))
    vector = vectors[:, index]
    if vector[0] == 0:
        raise ProfileError("eigenvector has no velocity component")
    return float(values[index]), vector / abs(vector[0])


def build_profile(
    gas: GasParams,
    shock: ShockData,
    halfwidth: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
    points: int = DEFAULT_POINTS,
) -> ShockProfile:
    """Integrate the traveling wave from the left saddle to the right node.

    The orbit leaves the left end state along its unstable eigenvector, is
    integrated for the deviation from that state, and is continued linearly
    beyond the launch point and past the arrival at the right end state.
    """
    delta = shock.delta
    if not delta > 0:
        raise ValueError("profile needs a shock with delta > 0")
    if points < 5 or points % 2 == 0:
        raise ValueError("profile.points must be an odd integer >= 5")
    halfwidth = HALFWIDTH_SCALE / delta if halfwidth is None else float(halfwidth)
    if not halfwidth > 0:
        raise ValueError("profile.halfwidth must be > 0")

    wave = _TravelingWave(gas, shock)
    left, right = shock.left, shock.right
    rate_left, vec_left = _eigenpair(wave.jacobian(left.u, left.theta), "unstable")
    rate_right, vec_right = _eigenpair(wave.jacobian(right.u, right.theta), "slow")
    vec_left = -vec_left if vec_left[0] > 0 else vec_left
    vec_right = -vec_right if vec_right[0] < 0 else vec_right

    offset = LAUNCH_OFFSET * delta
    arrival = offset

    def fun(_s: float, w: np.ndarray) -> np.ndarray:
        return np.array(wave.rhs(left.u + w[0], left.theta + w[1]), dtype=float)

    def arrived(_s: float, w: np.ndarray) -> float:
        return left.u + w[0] - right.u - arrival

    def unphysical(_s: float, w: np.ndarray) -> float:
        return min(wave.sigma - (left.u + w[0]), left.theta + w[1])

    arrived.terminal = True
    arrived.direction = -1
    unphysical.terminal = True
    unphysical.direction = -1

    span = 2.0 * halfwidth + 200.0 / delta
    solution = solve_ivp(
        fun,
        (0.0, span),
        offset * vec_left,
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_RTOL * offset,
        dense_output=True,
        events=[arrived, unphysical],
    )
    if solution.status < 0:
        raise ProfileError(f"profile integration failed: {solution.message}")
    if solution.t_events[1].size:
        raise ProfileError("profile left the physical region (rho <= 0 or theta <= 0)")
    if not solution.t_events[0].size:
        raise ProfileError(f"profile did not reach the right end state within xi={span:.4g}")
    s_stop = float(solution.t_events[0][0])
    w_stop = solution.sol(s_stop)
    weight_right = left.u + w_stop[0] - right.u

    rho_mid = 0.5 * (left.rho + right.rho)
    u_mid = wave.sigma + wave.flux / rho_mid
    s_center = brentq(lambda s: left.u + solution.sol(s)[0] - u_mid, 0.0, s_stop, xtol=1e-12, rtol=1e-14)

    xi = np.linspace(-halfwidth, halfwidth, points)
    center = points // 2
    xi[center] = 0.0
    s = xi + s_center
    u = np.empty(points)
    theta = np.empty(points)
    du = np.empty(points)
    dtheta = np.empty(points)
    ddu = np.empty(points)
    ddtheta = np.empty(points)

    before = s < 0.0
    after = s > s_stop
    inside = ~(before | after)

    grow = offset * np.exp(rate_left * s[before])
    u[before] = left.u + grow * vec_left[0]
    theta[before] = left.theta + grow * vec_left[1]
    du[before] = rate_left * grow * vec_left[0]
    dtheta[before] = rate_left * grow * vec_left[1]
    ddu[before] = rate_left * du[before]
    ddtheta[before] = rate_left * dtheta[before]

    decay = weight_right * np.exp(rate_right * (s[after] - s_stop))
    u[after] = right.u + decay * vec_right[0]
    theta[after] = right.theta + decay * vec_right[1]
    du[after] = rate_right * decay * vec_right[0]
    dtheta[after] = rate_right * decay * vec_right[1]
    ddu[after] = rate_right * du[after]
    ddtheta[after] = rate_right * dtheta[after]

    w = solution.sol(s[inside])
    u[inside] = left.u + w[0]
    theta[inside] = left.theta + w[1]
    du[inside], dtheta[inside] = wave.rhs(u[inside], theta[inside])
    ddu[inside], ddtheta[inside] = wave.second_derivatives(u[inside], theta[inside], du[inside], dtheta[inside])

    gap = wave.sigma - u
    rho = wave.rho(u)
    drho = rho * du / gap
    ddrho = ((drho * du + rho * ddu) * gap + rho * du * du) / (gap * gap)

    profile = ShockProfile(
        shock=shock,
        xi=xi,
        rho_bar=rho,
        u_bar=u,
        theta_bar=theta,
        d_rho=drho,
        d_u=du,
        d_theta=dtheta,
        dd_u=ddu,
        dd_theta=ddtheta,
        xi0_index=center,
        gas=gas,
        dd_rho=ddrho,
        rates=(rate_left, -rate_right),
    )
    _check_profile(profile, tail_tol)
    for array in (xi, rho, u, theta, drho, du, dtheta, ddu, ddtheta, ddrho):
        array.setflags(write=False)
    logger.debug(
        "Built profile: delta=%.4g points=%s halfwidth=%.4g launch-to-center=%.4g",
        delta,
        points,
        halfwidth,
        s_center,
    )
    return profile


def decreasing_above_roundoff(values: np.ndarray, minus: float, plus: float, floor: float = ROUNDOFF_FLOOR) -> bool:
    """values decrease between neighbours that both sit more than floor from both end states."""
    values = np.asarray(values, dtype=float)
    resolved = (np.abs(values - minus) > floor) & (np.abs(values - plus) > floor)
    pairs = resolved[1:] & resolved[:-1]
    return bool(np.all(np.diff(values)[pairs] < 0))


def _check_profile(profile: ShockProfile, tail_tol: float) -> None:
    shock = profile.shock
    left, right = shock.left, shock.right
    for name in ("d_rho", "d_u", "d_theta"):
        if not np.all(getattr(profile, name) < 0):
            raise ProfileError(f"profile is not strictly decreasing ({name} >= 0 somewhere)")
    ends = (
        (profile.rho_bar, left.rho, right.rho),
        (profile.u_bar, left.u, right.u),
        (profile.theta_bar, left.theta, right.theta),
    )
    for values, minus, plus in ends:
        if not decreasing_above_roundoff(values, minus, plus):
            raise ProfileError("profile values are not strictly decreasing away from the end states")
        if abs(values[0] - minus) > tail_tol or abs(values[-1] - plus) > tail_tol:
            raise ProfileError(
                f"profile does not connect the end states within halfwidth {profile.halfwidth:.4g} "
                f"(tail tolerance {tail_tol:.1e})"
            )
    flux = right.rho * (right.u - shock.sigma)
    mass_error = float(np.max(np.abs(profile.rho_bar * (profile.u_bar - shock.sigma) - flux)))
    if mass_error > MASS_TOL:
        raise ProfileError(f"mass relation violated by {mass_error:.3e}")
    rho_mid = 0.5 * (left.rho + right.rho)
    if abs(profile.rho_bar[profile.xi0_index] - rho_mid) > CENTER_TOL:
        raise ProfileError("profile is not centered at rho_bar(0) = (rho- + rho+)/2")


def sample_shifted(
    profile: ShockProfile,
    x,
    t: float = 0.0,
    sigma: float | None = None,
    X: float = 0.0,
    beta: float = 0.0,
) -> ProfileSample:
    """Profile and its derivatives at xi = x - sigma*t - X - beta, clamped to the end states."""
    sigma = profile.shock.sigma if sigma is None else sigma
    xi = np.atleast_1d(np.asarray(x, dtype=float)) - sigma * t - X - beta
    left_tail = xi < profile.xi[0]
    right_tail = xi > profile.xi[-1]
    query = np.clip(xi, profile.xi[0], profile.xi[-1])
    splines = profile._splines
    left, right = profile.shock.left, profile.shock.right

    def values(key: str, minus: float, plus: float) -> np.ndarray:
        out = np.asarray(splines[key](query), dtype=float)
        out[left_tail] = minus
        out[right_tail] = plus
        return out

    return ProfileSample(
        rho=values("rho", left.rho, right.rho),
        u=values("u", left.u, right.u),
        theta=values("theta", left.theta, right.theta),
        d_rho=values("d_rho", 0.0, 0.0),
        d_u=values("d_u", 0.0, 0.0),
        d_theta=values("d_theta", 0.0, 0.0),
        dd_u=values("dd_u", 0.0, 0.0),
        dd_theta=values("dd_theta", 0.0, 0.0),
    )


def vshock_residual(profile: ShockProfile) -> float:
    """Sup norm of the second-order traveling-wave equations on the tabulated profile."""
    gas = profile.gas
    sigma = profile.shock.sigma
    rho, u, theta = profile.rho_bar, profile.u_bar, profile.theta_bar
    drho, du, dtheta = profile.d_rho, profile.d_u, profile.d_theta
    dp = gas.R * (drho * theta + rho * dtheta)
    d_mom = drho * u + rho * du
    mass = -sigma * drho + d_mom
    momentum = -sigma * d_mom + (drho * u * u + 2.0 * rho * u * du + dp) - gas.mu * profile.dd_u
    energy_density = rho * (gas.cv * theta + 0.5 * u * u)
    d_energy = drho * (gas.cv * theta + 0.5 * u * u) + rho * (gas.cv * dtheta + u * du)
    p = gas.R * rho * theta
    energy = (
        -sigma * d_energy
        + (d_energy + dp) * u
        + (energy_density + p) * du
        - gas.kappa * profile.dd_theta
        - gas.mu * (du * du + u * profile.dd_u)
    )
    interior = slice(1, -1)
    return float(max(np.max(np.abs(part[interior])) for part in (mass, momentum, energy)))


def sonic_margins(profile: ShockProfile) -> tuple[float, float]:
    """(min sigma - u_bar, min sigma - u_bar - c_bar) over the grid."""
    gas = profile.gas
    gap = profile.shock.sigma - profile.u_bar
    c_bar = np.sqrt(gas.gamma * gas.R * profile.theta_bar)
    return float(np.min(gap)), float(np.min(gap - c_bar))


def jacobian_leading_value(profile: ShockProfile) -> float:
    gas = profile.gas
    g = gas.gamma
    ratio = gas.mu * gas.R * g / (gas.mu * gas.R * g + gas.kappa * (g - 1.0) ** 2)
    return 0.5 * (g + 1.0) * profile.shock.left.rho * ratio * profile.delta


def jacobian_identity_check(profile: ShockProfile) -> float:
    """Sup deviation of mu y'/(y(1-y)) from its leading constant, y = (u- - u_bar)/delta."""
    delta = profile.delta
    y = (profile.shock.left.u - profile.u_bar) / delta
    dy = -profile.d_u / delta
    lo, hi = JACOBIAN_WINDOW
    window = (y >= lo) & (y <= hi)
    if not np.any(window):
        raise ValueError("profile grid has no nodes with y in the evaluation window")
    measured = profile.gas.mu * dy[window] / (y[window] * (1.0 - y[window]))
    return float(np.max(np.abs(measured - jacobian_leading_value(profile))))


@dataclass
class ProfileProperties:
    delta: float
    monotone: bool
    tail_rate_left: float
    tail_rate_right: float
    eigen_rate_left: float
    eigen_rate_right: float
    rho_ratio: float
    theta_ratio: float
    curvature_ratio: float
    sigma_gap: float
    speed_margin: float
    sonic_margin: float
    weight_bounds_ok: bool
    vshock_residual: float

    @property
    def tail_rates_ok(self) -> bool:
        return (
            abs(self.tail_rate_right - self.eigen_rate_right) <= 0.3 * self.eigen_rate_right
            and abs(self.tail_rate_left - self.eigen_rate_left) <= 0.3 * self.eigen_rate_left
        )


@dataclass
class ProfileReport:
    entries: list[ProfileProperties] = field(default_factory=list)
    slopes: dict[str, float] = field(default_factory=dict)
    jacobian_deviations: list[float] = field(default_factory=list)
    jacobian_slope: float = float("nan")
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _tail_rate(xi: np.ndarray, distance: np.ndarray, jump: float) -> float:
    lo, hi = TAIL_BAND
    band = (distance >= lo * jump) & (distance <= hi * jump)
    if np.count_nonzero(band) < 3:
        return float("nan")
    return abs(exponential_rate(xi[band], distance[band]))


def profile_properties(profile: ShockProfile) -> ProfileProperties:
    gas = profile.gas
    shock = profile.shock
    left, right = shock.left, shock.right
    c_left = sound_speed(gas, left)
    du = profile.d_u
    usable = du != 0
    scale = np.abs(du[usable])
    rho_ratio = np.max(np.abs(profile.d_rho[usable] - left.rho / c_left * du[usable]) / scale)
    theta_ratio = np.max(
        np.abs(profile.d_theta[usable] - (gas.gamma - 1.0) * left.theta / c_left * du[usable]) / scale
    )
    curvature = np.max(np.abs(profile.dd_u[usable]) / scale)
    jump = left.rho - right.rho
    right_half = profile.xi > 0
    left_half = profile.xi < 0
    weight = 1.0 + (left.u - profile.u_bar) / math.sqrt(profile.delta)
    speed_margin, sonic_margin = sonic_margins(profile)
    return ProfileProperties(
        delta=profile.delta,
        monotone=bool(
            np.all(profile.d_rho < 0)
            and np.all(du < 0)
            and np.all(profile.d_theta < 0)
            and decreasing_above_roundoff(profile.rho_bar, left.rho, right.rho)
            and decreasing_above_roundoff(profile.u_bar, left.u, right.u)
            and decreasing_above_roundoff(profile.theta_bar, left.theta, right.theta)
        ),
        tail_rate_left=_tail_rate(profile.xi[left_half], np.abs(profile.rho_bar[left_half] - left.rho), jump),
        tail_rate_right=_tail_rate(profile.xi[right_half], np.abs(profile.rho_bar[right_half] - right.rho), jump),
        eigen_rate_left=profile.rates[0],
        eigen_rate_right=profile.rates[1],
        rho_ratio=float(rho_ratio),
        theta_ratio=float(theta_ratio),
        curvature_ratio=float(curvature),
        sigma_gap=sigma_gap(gas, shock),
        speed_margin=speed_margin,
        sonic_margin=sonic_margin,
        weight_bounds_ok=bool(np.all(weight >= 1.0) and np.all(weight <= 1.0 + math.sqrt(profile.delta))),
        vshock_residual=vshock_residual(profile),
    )


SCALING_KEYS = ("rho_ratio", "theta_ratio", "curvature_ratio", "sigma_gap", "tail_rate_right", "tail_rate_left")
# The deviation of the Jacobian identity is second order in delta.
JACOBIAN_MIN_SLOPE = 1.8


def verify_profile_properties(profiles: list[ShockProfile], slope_tolerance: float = 0.3) -> ProfileReport:
    """Check monotonicity, tail rates and the delta scalings (linear bounds, quadratic Jacobian) over a sweep."""
    report = ProfileReport(entries=[profile_properties(profile) for profile in profiles])
    report.jacobian_deviations = [jacobian_identity_check(profile) for profile in profiles]
    for entry in report.entries:
        if not entry.monotone:
            report.failures.append(f"delta={entry.delta:.4g}: profile not monotone")
        if not entry.tail_rates_ok:
            report.failures.append(f"delta={entry.delta:.4g}: tail rate differs from linearization by > 30%")
        if not entry.speed_margin > 0:
            report.failures.append(f"delta={entry.delta:.4g}: sigma - u_bar not positive")
        if not entry.weight_bounds_ok:
            report.failures.append(f"delta={entry.delta:.4g}: weight outside [1, 1 + sqrt(delta)]")
    if len(report.entries) >= 2:
        deltas = [entry.delta for entry in report.entries]
        for key in SCALING_KEYS:
            values = [getattr(entry, key) for entry in report.entries]
            if all(value > 0 and math.isfinite(value) for value in values):
                report.slopes[key] = loglog_slope(deltas, values)
        for key in SCALING_KEYS:
            slope = report.slopes.get(key)
            if slope is None:
                report.failures.append(f"{key}: could not be fitted")
            elif abs(slope - 1.0) > slope_tolerance:
                report.failures.append(f"{key}: log-log slope {slope:.3f} is not 1 +- {slope_tolerance}")
        if all(value > 0 for value in report.jacobian_deviations):
            report.jacobian_slope = loglog_slope(deltas, report.jacobian_deviations)
        if not report.jacobian_slope >= JACOBIAN_MIN_SLOPE:
            report.failures.append(
                f"jacobian deviation: log-log slope {report.jacobian_slope:.3f} is below {JACOBIAN_MIN_SLOPE}"
            )
    return report


def build_profile_sweep(
    gas: GasParams,
    right: State,
    deltas: list[float],
    halfwidth_scale: float = HALFWIDTH_SCALE,
    tail_tol: float = DEFAULT_TAIL_TOL,
    points: int = DEFAULT_POINTS,
) -> list[ShockProfile]:
    profiles = []
    for delta in deltas:
        shock = left_state_for_amplitude(gas, right, delta)
        profiles.append(build_profile(gas, shock, halfwidth_scale / delta, tail_tol, points))
    return profiles


PROFILE_COLUMNS = ("xi", "rho_bar", "u_bar", "theta_bar", "d_rho", "d_u", "d_theta")


def profile_rows(profile: ShockProfile) -> list[tuple[float, ...]]:
    columns = [getattr(profile, name) for name in PROFILE_COLUMNS]
    return [tuple(float(column[i]) for column in columns) for i in range(profile.xi.size)]
