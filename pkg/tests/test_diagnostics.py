from __future__ import annotations

import math
import unittest

import numpy as np

from src.diagnostics import (
    C_STAR_MAX,
    DiagnosticsRecord,
    boundary_terms,
    entropy_dissipation_check,
    evaluate,
    fit_shift_bound,
    good_terms,
    leading_constants,
    norm_equivalence,
    shift_identity_residual,
    weighted_entropy,
    y_decomposition,
)
from src.hugoniot import ShockData, left_state_for_amplitude
from src.profile import build_profile
from src.shift import ShiftState, reference_sample, shift_constant
from src.solver.grid import Field, Grid1D
from src.solver.perturbation import PerturbationSpec, initialize
from src.thermo import GasParams, State


RIGHT = State(rho=1.0, u=-1.2, theta=1.0)
BETA = 200.0


def _gas(**changes) -> GasParams:
    values = {"R": 1.0, "gamma": 5.0 / 3.0, "mu": 1.0, "kappa": 1.0}
    values.update(changes)
    return GasParams(**values)


def _make_record(t: float, **changes) -> DiagnosticsRecord:
    values = {
        "t": t,
        "X": 0.0,
        "Xdot": 0.0,
        "E_weighted": 0.0,
        "G1": 0.0,
        "G2": 0.0,
        "GS": 0.0,
        "D": 0.0,
        "D_rho": 0.0,
        "D_u1": 0.0,
        "D_th1": 0.0,
        "D_u2": 0.0,
        "D_th2": 0.0,
        "Y": [0.0] * 6,
        "P": [0.0] * 5,
        "sup_err": 0.0,
        "l2_err": 0.0,
        "h1_err": 0.0,
        "shift_identity": 0.0,
        "shift_bound_ok": True,
    }
    values.update(changes)
    return DiagnosticsRecord(**values)


class WaveDiagnosticsTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.gas = _gas()
        cls.shock = left_state_for_amplitude(cls.gas, RIGHT, 0.2)
        cls.profile = build_profile(cls.gas, cls.shock)
        cls.grid = Grid1D(L=600.0, N=1201)
        cls.shift = ShiftState.start(BETA, shift_constant(cls.gas, cls.shock), cls.shock.delta)

    def _perturbed(self, amplitude: float = 1e-3) -> Field:
        spec = PerturbationSpec(
            shape="gaussian", amplitude=amplitude, center=BETA, width=15.0, components=("rho", "u", "theta")
        )
        return initialize(self.grid, self.profile, BETA, spec)

    def test_exact_wave_has_no_terms(self) -> None:
        field = initialize(self.grid, self.profile, BETA)
        self.assertTrue(all(value == 0.0 for value in good_terms(field, self.profile, self.shift, self.gas).as_tuple()))
        self.assertTrue(all(value == 0.0 for value in y_decomposition(field, self.profile, self.shift, self.gas)))
        self.assertTrue(all(value == 0.0 for value in boundary_terms(field, self.profile, self.shift, self.gas)))
        self.assertEqual(weighted_entropy(field, self.profile, self.shift, self.gas), 0.0)

    def test_acoustic_combination_has_no_first_good_term(self) -> None:
        field = initialize(self.grid, self.profile, BETA)
        g = 1e-3 * np.exp(-(((self.grid.x - BETA) / 15.0) ** 2))
        left = self.shock.left
        c_left = math.sqrt(self.gas.gamma * self.gas.R * left.theta)
        field = field.copy(rho=field.rho + left.rho / c_left * g, u=field.u + g)
        terms = good_terms(field, self.profile, self.shift, self.gas)
        self.assertAlmostEqual(terms.G1, 0.0, delta=1e-12 * terms.G2)
        self.assertGreater(terms.G2, 0.0)
        self.assertGreater(terms.GS, 0.0)

    def test_good_terms_are_nonnegative(self) -> None:
        terms = good_terms(self._perturbed(), self.profile, self.shift, self.gas)
        for value in terms.as_tuple():
            self.assertGreaterEqual(value, 0.0)
        self.assertGreater(terms.D, 0.0)

    def test_good_terms_match_refined_quadrature(self) -> None:
        coarse = good_terms(self._perturbed(), self.profile, self.shift, self.gas)
        fine_grid = Grid1D(L=600.0, N=12001)
        spec = PerturbationSpec(
            shape="gaussian", amplitude=1e-3, center=BETA, width=15.0, components=("rho", "u", "theta")
        )
        fine = good_terms(initialize(fine_grid, self.profile, BETA, spec), self.profile, self.shift, self.gas)
        for name in ("G1", "G2", "GS"):
            self.assertAlmostEqual(getattr(coarse, name), getattr(fine, name), delta=1e-3 * getattr(fine, name))

    def test_shift_identity_holds_to_roundoff(self) -> None:
        record = evaluate(self._perturbed(), self.profile, self.shift, self.gas)
        self.assertLess(record.shift_identity, 1e-12)
        self.assertNotEqual(record.Xdot, 0.0)

    def test_record_fields(self) -> None:
        record = evaluate(self._perturbed(), self.profile, self.shift, self.gas)
        self.assertEqual(len(record.Y), 6)
        self.assertEqual(len(record.P), 5)
        self.assertAlmostEqual(record.sup_err, 1e-3, delta=1e-12)
        self.assertGreater(record.E_weighted, 0.0)
        self.assertGreaterEqual(record.h1_err, record.l2_err)
        self.assertTrue(record.shift_bound_ok)
        self.assertEqual(set(record.to_dict()), set(DiagnosticsRecord.__dataclass_fields__))

    def test_frozen_record_reports_zero_xdot(self) -> None:
        record = evaluate(self._perturbed(), self.profile, self.shift, self.gas, frozen=True)
        self.assertEqual(record.Xdot, 0.0)

    def test_outflow_boundary_entropy_flux_is_nonpositive(self) -> None:
        field = initialize(self.grid, self.profile, BETA)
        field.rho[0] *= 1.001
        P = boundary_terms(field, self.profile, self.shift, self.gas)
        self.assertLess(P[0], 0.0)

    def test_mismatch_terms_vanish_when_velocity_matches(self) -> None:
        field = initialize(self.grid, self.profile, BETA)
        field.rho[0] *= 1.001
        sample = reference_sample(field, self.profile, self.shift)
        self.assertEqual(field.u[0], sample.u[0])
        P = boundary_terms(field, self.profile, self.shift, self.gas)
        self.assertEqual(P[3], 0.0)
        self.assertEqual(P[4], 0.0)


class ThermalMismatchScalingTests(unittest.TestCase):
    """Y4 and Y5 on a narrow bump at the wave center grow like delta^2 eps^2."""

    CENTER = 300.0

    @classmethod
    def setUpClass(cls) -> None:
        cls.gas = _gas()
        cls.grid = Grid1D(L=600.0, N=6001)
        cls.cases = {}
        for delta in (0.1, 0.05):
            shock = left_state_for_amplitude(cls.gas, RIGHT, delta)
            profile = build_profile(cls.gas, shock)
            shift = ShiftState.start(cls.CENTER, shift_constant(cls.gas, shock), delta)
            cls.cases[delta] = (profile, shift)

    def _y45(self, delta: float, eps: float) -> tuple[float, float]:
        profile, shift = self.cases[delta]
        spec = PerturbationSpec(
            shape="gaussian", amplitude=eps, center=self.CENTER, width=2.0, components=("rho", "theta")
        )
        field = initialize(self.grid, profile, self.CENTER, spec)
        y = y_decomposition(field, profile, shift, self.gas)
        return abs(y[3]), abs(y[4])

    def test_quadratic_in_amplitude(self) -> None:
        small = self._y45(0.1, 1e-3)
        large = self._y45(0.1, 2e-3)
        for a, b in zip(small, large):
            self.assertGreater(a, 0.0)
            self.assertAlmostEqual(math.log(b / a) / math.log(2.0), 2.0, delta=0.05)

    def test_quadratic_in_shock_strength(self) -> None:
        strong = self._y45(0.1, 1e-3)
        weak = self._y45(0.05, 1e-3)
        for a, b in zip(strong, weak):
            self.assertAlmostEqual(math.log(a / b) / math.log(2.0), 2.0, delta=0.3)


class ShiftIdentityTests(unittest.TestCase):
    def test_exact_match(self) -> None:
        shift = ShiftState(X=0.0, Xdot=0.0, beta=1.0, M=2.0, delta=0.5)
        self.assertEqual(shift_identity_residual(-24.0, [1.0, 2.0, 3.0, 9.0, 9.0, 9.0], shift), 0.0)

    def test_relative_mismatch(self) -> None:
        shift = ShiftState(X=0.0, Xdot=0.0, beta=1.0, M=2.0, delta=0.5)
        self.assertAlmostEqual(shift_identity_residual(-23.0, [1.0, 2.0, 3.0], shift), 1.0 / 24.0, places=14)


class DissipationCheckTests(unittest.TestCase):
    def test_zero_perturbation_series_holds(self) -> None:
        records = [_make_record(0.1 * i) for i in range(20)]
        report = entropy_dissipation_check(records, M=4.0, delta=0.1)
        self.assertEqual(report.violations, [])
        self.assertEqual(report.ok_fraction, 1.0)
        self.assertTrue(report.ok)

    def test_decaying_entropy_with_dissipation_holds(self) -> None:
        t = np.linspace(0.0, 5.0, 51)
        records = [_make_record(float(s), E_weighted=float(math.exp(-s)), D=float(math.exp(-s))) for s in t]
        report = entropy_dissipation_check(records, M=4.0, delta=0.1)
        self.assertTrue(report.ok)
        self.assertTrue(report.gronwall_ok)

    def test_growing_entropy_is_flagged(self) -> None:
        records = [_make_record(0.1 * i, E_weighted=0.01 * i) for i in range(20)]
        report = entropy_dissipation_check(records, M=4.0, delta=0.1)
        self.assertEqual(report.ok_fraction, 0.0)
        self.assertFalse(report.gronwall_ok)
        self.assertFalse(report.ok)

    def test_short_series(self) -> None:
        report = entropy_dissipation_check([_make_record(0.0)], M=4.0, delta=0.1)
        self.assertEqual(report.steps, 0)

    def test_negligible_early_gs_does_not_inflate_c_star(self) -> None:
        records = []
        for i in range(40):
            t = 0.1 * i
            gs = 1e-9 if i < 10 else 2.0 * math.exp(-t)
            records.append(_make_record(t, E_weighted=math.exp(-t), D=5.0 * math.exp(-t), GS=gs))
        report = entropy_dissipation_check(records, M=4.0, delta=0.1)
        self.assertLessEqual(report.c_star, C_STAR_MAX)
        self.assertEqual(report.ok_fraction, 1.0)
        self.assertTrue(report.ok)

    def test_c_star_is_capped(self) -> None:
        records = [
            _make_record(0.1 * i, E_weighted=1.0 - 0.002 * i, GS=1e-3)
            for i in range(40)
        ]
        report = entropy_dissipation_check(records, M=4.0, delta=0.1)
        self.assertEqual(report.c_star, C_STAR_MAX)
        self.assertTrue(report.ok)


class ConstantsTests(unittest.TestCase):
    def _shock(self) -> ShockData:
        return ShockData(left=State(1.0, -1.0, 1.1), right=RIGHT, sigma=0.2, delta=0.2)

    def test_alpha_for_monatomic_gas(self) -> None:
        alpha, M = leading_constants(_gas(), self._shock())
        self.assertAlmostEqual(alpha, -0.2, places=14)
        self.assertAlmostEqual(M, 184.0 / 45.0, places=13)

    def test_alpha_limit(self) -> None:
        alpha, _ = leading_constants(_gas(gamma=1.0 + 1e-9), self._shock())
        self.assertAlmostEqual(alpha, -0.75, places=7)

    def test_norm_equivalence_and_shift_bound(self) -> None:
        records = [
            _make_record(0.0, E_weighted=0.5, l2_err=1.0, sup_err=0.1, Xdot=0.2),
            _make_record(1.0, E_weighted=0.3, l2_err=0.5, sup_err=0.05, Xdot=0.05),
            _make_record(2.0),
        ]
        self.assertEqual(norm_equivalence(records), (0.5, 1.2))
        self.assertAlmostEqual(fit_shift_bound(records), 2.0, places=14)


if __name__ == "__main__":
    unittest.main()
