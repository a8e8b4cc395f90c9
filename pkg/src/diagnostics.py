from __future__ import annotations

from dataclasses import asdict, dataclass, field
import logging
import math
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import NumericalError
from .hugoniot import ShockData
from .profile import ProfileSample, ShockProfile
from .shift import ShiftState, reference_sample, shift_constant, shift_rhs, weights
from .solver.grid import Field, boundary_derivative, first_derivative, second_derivative
from .thermo import GasParams, phi, relative_entropy_density


ALPHA_TOLERANCE = 1e-12
GS_SIGNIFICANCE = 1e-3
C_STAR_MAX = 4.0

logger = logging.getLogger(__name__)


@dataclass
class GoodTerms:
    G1: float
    G2: float
    GS: float
    D_rho: float
    D_u1: float
    D_th1: float
    D_u2: float
    D_th2: float
    D: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.G1, self.G2, self.GS, self.D_rho, self.D_u1, self.D_th1, self.D_u2, self.D_th2)


@dataclass
class DiagnosticsRecord:
    t: float
    X: float
    Xdot: float
    E_weighted: float
    G1: float
    G2: float
    GS: float
    D: float
    D_rho: float
    D_u1: float
    D_th1: float
    D_u2: float
    D_th2: float
    Y: list[float]
    P: list[float]
    sup_err: float
    l2_err: float
    h1_err: float
    shift_identity: float
    shift_bound_ok: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


RECORD_FIELDS = tuple(DiagnosticsRecord.__dataclass_fields__)


class _Perturbation:
    """Field minus the shifted wave, with the weight evaluated at the same nodes."""

    def __init__(self, field: Field, profile: ShockProfile, shift: ShiftState) -> None:
        self.field = field
        self.sample: ProfileSample = reference_sample(field, profile, shift)
        self.a, self.a_x = weights(profile.shock, self.sample)
        self.rho = field.rho - self.sample.rho
        self.u = field.u - self.sample.u
        self.theta = field.theta - self.sample.theta
        self.h = field.grid.h

    def integrate(self, values: np.ndarray) -> float:
        return self.field.grid.integrate(values)

    def entropy_density(self, gas: GasParams) -> np.ndarray:
        s, f = self.sample, self.field
        return relative_entropy_density(gas, f.rho, f.u, f.theta, s.rho, s.u, s.theta)


def _good_terms(p: _Perturbation, shock: ShockData, gas: GasParams) -> GoodTerms:
    left = shock.left
    c_left = math.sqrt(gas.gamma * gas.R * left.theta)
    bracket_rho = p.rho - left.rho / c_left * p.u
    bracket_theta = p.theta - (gas.gamma - 1.0) * left.theta / c_left * p.u
    g1 = gas.R * left.theta / (2.0 * left.rho) * c_left * p.integrate(p.a_x * bracket_rho**2)
    g2 = gas.R * left.rho / (2.0 * (gas.gamma - 1.0) * left.theta) * c_left * p.integrate(p.a_x * bracket_theta**2)
    gs = p.integrate(np.abs(p.sample.d_u) * (p.rho**2 + p.u**2 + p.theta**2))
    rho_x = first_derivative(p.rho, p.h)
    u_x = first_derivative(p.u, p.h)
    theta_x = first_derivative(p.theta, p.h)
    weighted = p.integrate(p.a * (gas.mu * u_x**2 + gas.kappa / p.field.theta * theta_x**2))
    return GoodTerms(
        G1=g1,
        G2=g2,
        GS=gs,
        D_rho=p.integrate(rho_x**2),
        D_u1=p.integrate(u_x**2),
        D_th1=p.integrate(theta_x**2),
        D_u2=p.integrate(second_derivative(p.u, p.h) ** 2),
        D_th2=p.integrate(second_derivative(p.theta, p.h) ** 2),
        D=weighted,
    )


def _y_terms(p: _Perturbation, gas: GasParams) -> tuple[float, float, float, float, float, float]:
    s, f = p.sample, p.field
    y1 = p.integrate(p.a * f.rho * p.u * s.d_u)
    y2 = gas.R * p.integrate(p.a * s.theta / s.rho * p.rho * s.d_rho)
    y3 = gas.cv * p.integrate(p.a * f.rho / s.theta * p.theta * s.d_theta)
    y4 = -gas.R * p.integrate(p.a * f.rho * s.theta * phi(s.rho / f.rho) * s.d_theta)
    y5 = -gas.cv * p.integrate(p.a * f.rho * s.theta * phi(f.theta / s.theta) * s.d_theta)
    y6 = -p.integrate(p.a_x * p.entropy_density(gas))
    return (y1, y2, y3, y4, y5, y6)


def _boundary_terms(p: _Perturbation, gas: GasParams) -> tuple[float, float, float, float, float]:
    f, s = p.field, p.sample
    a0 = float(p.a[0])
    eta0 = float(p.entropy_density(gas)[0])
    u_x0 = boundary_derivative(p.u, p.h)
    theta_x0 = boundary_derivative(p.theta, p.h)
    return (
        a0 * float(f.u[0]) * eta0,
        -gas.mu * a0 * float(p.u[0]) * u_x0,
        -gas.kappa * a0 / float(f.theta[0]) * float(p.theta[0]) * theta_x0,
        gas.R * a0 * float(f.rho[0]) * float(p.u[0]) * float(p.theta[0]),
        gas.R * a0 * float(s.theta[0]) * float(p.rho[0]) * float(p.u[0]),
    )


def good_terms(field: Field, profile: ShockProfile, shift: ShiftState, gas: GasParams) -> GoodTerms:
    return _good_terms(_Perturbation(field, profile, shift), profile.shock, gas)


def y_decomposition(field: Field, profile: ShockProfile, shift: ShiftState, gas: GasParams) -> tuple[float, ...]:
    return _y_terms(_Perturbation(field, profile, shift), gas)


def boundary_terms(field: Field, profile: ShockProfile, shift: ShiftState, gas: GasParams) -> tuple[float, ...]:
    """The five boundary contributions at x = 0, one-sided derivatives."""
    return _boundary_terms(_Perturbation(field, profile, shift), gas)


def weighted_entropy(field: Field, profile: ShockProfile, shift: ShiftState, gas: GasParams) -> float:
    p = _Perturbation(field, profile, shift)
    return p.integrate(p.a * p.entropy_density(gas))


def shift_identity_residual(xdot: float, y: Sequence[float], shift: ShiftState) -> float:
    """Relative mismatch of Xdot against -(M/delta)(Y1 + Y2 + Y3)."""
    factor = shift.M / shift.delta
    expected = -factor * (y[0] + y[1] + y[2])
    scale = factor * (abs(y[0]) + abs(y[1]) + abs(y[2]))
    if scale == 0.0:
        return abs(xdot)
    return abs(xdot - expected) / scale


def evaluate(
    field: Field,
    profile: ShockProfile,
    shift: ShiftState,
    gas: GasParams,
    frozen: bool = False,
) -> DiagnosticsRecord:
    p = _Perturbation(field, profile, shift)
    good = _good_terms(p, profile.shock, gas)
    y = _y_terms(p, gas)
    boundary = _boundary_terms(p, gas)
    projected = shift_rhs(field, profile, shift, gas)
    l2_squared = p.integrate(p.rho**2 + p.u**2 + p.theta**2)
    sup_err = float(max(np.max(np.abs(p.rho)), np.max(np.abs(p.u)), np.max(np.abs(p.theta))))
    return DiagnosticsRecord(
        t=field.t,
        X=shift.X,
        Xdot=0.0 if frozen else projected,
        E_weighted=p.integrate(p.a * p.entropy_density(gas)),
        G1=good.G1,
        G2=good.G2,
        GS=good.GS,
        D=good.D,
        D_rho=good.D_rho,
        D_u1=good.D_u1,
        D_th1=good.D_th1,
        D_u2=good.D_u2,
        D_th2=good.D_th2,
        Y=list(y),
        P=list(boundary),
        sup_err=sup_err,
        l2_err=math.sqrt(l2_squared),
        h1_err=math.sqrt(l2_squared + good.D_rho + good.D_u1 + good.D_th1),
        shift_identity=shift_identity_residual(projected, y, shift),
        shift_bound_ok=bool(abs(shift.X) <= 0.5 * profile.shock.sigma * field.t),
    )


@dataclass
class DissipationReport:
    c_star: float
    steps: int
    violations: list[float] = field(default_factory=list)
    ok_fraction: float = 1.0
    gronwall_ok: bool = True
    gronwall_excess: float = 0.0

    @property
    def ok(self) -> bool:
        return self.ok_fraction >= 0.99 and self.gronwall_ok


def _fit_c_star(lhs: np.ndarray, base: np.ndarray, gs: np.ndarray) -> float:
    """C* from the first quarter of the steps, clipped to what that quarter admits.

    Steps whose GS is below GS_SIGNIFICANCE of the run peak say nothing about C* and
    are left out; with none left the constant is 0.
    """
    peak = float(np.max(gs)) if gs.size else 0.0
    if not peak > 0:
        return 0.0
    quarter = max(1, lhs.size // 4)
    slack = base[:quarter] - lhs[:quarter]
    weight = gs[:quarter]
    active = weight >= GS_SIGNIFICANCE * peak
    if not np.any(active):
        return 0.0
    estimate = 2.0 * float(np.dot(slack[active], weight[active]) / np.dot(weight[active], weight[active]))
    admissible = float(np.min(2.0 * slack[active] / weight[active]))
    return min(max(0.0, min(estimate, admissible)), C_STAR_MAX)


def entropy_dissipation_check(
    records: Sequence[DiagnosticsRecord],
    M: float,
    delta: float,
    tolerance: float = 1e-3,
    atol: float = 1e-12,
) -> DissipationReport:
    """Discrete plausibility check of the weighted-entropy dissipation inequality.

    dE/dt <= -(G1 + G2)/4 - (C*/2) GS - delta/(4M) Xdot^2 - D/10 + P, with both sides
    averaged over each step and C* fitted once.
    """
    if len(records) < 2:
        return DissipationReport(c_star=0.0, steps=0)
    t = np.array([r.t for r in records])
    energy = np.array([r.E_weighted for r in records])
    base = np.array(
        [
            -0.25 * (r.G1 + r.G2) - delta / (4.0 * M) * r.Xdot**2 - 0.1 * r.D + sum(r.P)
            for r in records
        ]
    )
    gs = np.array([r.GS for r in records])
    lhs = np.diff(energy) / np.diff(t)
    base_mid = 0.5 * (base[1:] + base[:-1])
    gs_mid = 0.5 * (gs[1:] + gs[:-1])
    c_star = _fit_c_star(lhs, base_mid, gs_mid)
    rhs = base_mid - 0.5 * c_star * gs_mid
    allowance = tolerance * np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), atol)
    bad = lhs > rhs + allowance
    report = DissipationReport(
        c_star=c_star,
        steps=int(lhs.size),
        violations=[float(value) for value in t[1:][bad]],
        ok_fraction=float(1.0 - np.count_nonzero(bad) / lhs.size),
    )
    boundary_gain = np.array([max(sum(r.P), 0.0) for r in records])
    ceiling = energy[0] + cumulative_trapezoid(boundary_gain, t, initial=0.0)
    excess = energy - ceiling
    limit = tolerance * np.maximum(np.abs(ceiling), atol)
    report.gronwall_excess = float(np.max(excess))
    report.gronwall_ok = bool(np.all(excess <= limit))
    if report.violations:
        logger.warning(
            "Dissipation inequality failed at %s of %s steps (C*=%.4g)",
            len(report.violations),
            report.steps,
            c_star,
        )
    return report


def leading_constants(gas: GasParams, shock: ShockData) -> tuple[float, float]:
    """(alpha_gamma, M); alpha is evaluated in both of its closed forms."""
    g = gas.gamma
    expanded = (g * g + 5.0 * g - 4.0) / (2.0 * g) - 7.0 * (g + 1.0) / 8.0
    factored = -(3.0 * g * g - 13.0 * g + 16.0) / (8.0 * g)
    if abs(expanded - factored) > ALPHA_TOLERANCE * max(1.0, abs(factored)):
        raise NumericalError(f"alpha_gamma forms disagree: {expanded!r} vs {factored!r}")
    return factored, shift_constant(gas, shock)


def norm_equivalence(records: Iterable[DiagnosticsRecord]) -> tuple[float, float]:
    """Smallest and largest E_weighted / ||U - U_bar||^2 over the records."""
    ratios = [r.E_weighted / r.l2_err**2 for r in records if r.l2_err > 0]
    if not ratios:
        return (float("nan"), float("nan"))
    return (min(ratios), max(ratios))


def fit_shift_bound(records: Iterable[DiagnosticsRecord]) -> float:
    """Smallest C0 with |Xdot| <= C0 * sup_err on every record."""
    ratios = [abs(r.Xdot) / r.sup_err for r in records if r.sup_err > 0]
    return max(ratios) if ratios else 0.0
