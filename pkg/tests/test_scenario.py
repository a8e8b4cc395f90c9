from __future__ import annotations

import asyncio
import json
import math
import os
from pathlib import Path
import tempfile
import unittest

from src.config import apply_overrides, load_config, parse_config
from src.diagnostics import C_STAR_MAX
from src.errors import ConfigError
from src.hugoniot import left_state_for_amplitude
from src.scenario import (
    PROFILE_FILE,
    SUMMARY_CSV_FILE,
    SUMMARY_FILE,
    plan_scenario,
    profile_extent,
    resolve_shock,
    run_scenario,
)
from src.solver.boundary import BoundaryKind
from src.summary import RunSummary, load_summary
from src.sweep import SWEEP_CSV_FILE, SWEEP_FILE, FitSpec, SweepMember, fit_members, load_sweep, run_sweep
from src.verdicts import classify_run
from src.writers.factory import RECORDS_CSV_FILE, RECORDS_FILE
from src.writers.ndjson import read_ndjson


EXAMPLE_CONFIG = Path(__file__).resolve().parents[1] / "config.example.yaml"


def _make_config(*overrides: str):
    return parse_config(apply_overrides({}, list(overrides)))


def _make_quick_wave(mode: str, *extra: str):
    return _make_config(
        f"scenario.mode={mode}",
        "shock.delta=0.2",
        "time.t_final=2.0",
        "diagnostics.every=20",
        "profile.points=2001",
        *extra,
    )


class ResolveShockTests(unittest.TestCase):
    def test_default_outflow_amplitude(self) -> None:
        shock, bc = resolve_shock(_make_config())
        self.assertAlmostEqual(shock.delta, 0.1, places=8)
        self.assertIs(bc.kind, BoundaryKind.OUTFLOW)
        self.assertEqual(bc.u_minus, shock.left.u)

    def test_explicit_boundary_values(self) -> None:
        base = _make_config()
        seed = left_state_for_amplitude(base.gas, base.shock.right, 0.2)
        config = _make_config(f"boundary.u_minus={seed.left.u!r}", f"boundary.theta_minus={seed.left.theta!r}")
        shock, _ = resolve_shock(config)
        self.assertAlmostEqual(shock.left.rho, seed.left.rho, delta=1e-8)

    def test_boundary_values_and_amplitude_conflict(self) -> None:
        config = _make_config("boundary.u_minus=-1.0", "boundary.theta_minus=1.1", "shock.delta=0.1")
        with self.assertRaises(ConfigError):
            resolve_shock(config)

    def test_wall_amplitude_is_inflow_speed(self) -> None:
        shock, bc = resolve_shock(_make_config("boundary.kind=impermeable", "shock.delta=0.2"))
        self.assertEqual(shock.right.u, -0.2)
        self.assertEqual(shock.left.u, 0.0)
        self.assertIs(bc.kind, BoundaryKind.IMPERMEABLE)

    def test_example_config_switches_to_wall(self) -> None:
        config = load_config(str(EXAMPLE_CONFIG), ["boundary.kind=impermeable", "shock.right.u=-0.1"])
        shock, bc = resolve_shock(config)
        self.assertIs(bc.kind, BoundaryKind.IMPERMEABLE)
        self.assertEqual(shock.left.u, 0.0)
        self.assertEqual(shock.right.u, -0.1)
        self.assertAlmostEqual(shock.delta, 0.1, places=12)

    def test_wall_amplitude_disagreeing_with_right_state(self) -> None:
        config = parse_config({"boundary": {"kind": "impermeable"}, "shock": {"delta": 0.2, "right": {"u": -0.3}}})
        with self.assertRaises(ConfigError):
            resolve_shock(config)

    def test_auto_grid_covers_the_run(self) -> None:
        config = _make_config("shock.delta=0.2", "time.t_final=10")
        shock, bc = resolve_shock(config)
        plan = plan_scenario(config, shock, bc)
        self.assertAlmostEqual(plan.beta, 200.0, places=8)
        self.assertGreaterEqual(plan.grid.L, plan.beta + shock.sigma * 10.0)
        self.assertLessEqual(plan.grid.h, 0.5)

    def test_profile_table_covers_the_run(self) -> None:
        config = _make_config("shock.delta=0.1", "shift.beta=400", "time.t_final=50")
        shock, bc = resolve_shock(config)
        plan = plan_scenario(config, shock, bc)
        halfwidth, points = profile_extent(config, plan)
        self.assertGreater(halfwidth, plan.beta + 1.5 * shock.sigma * plan.t_final)
        self.assertGreater(halfwidth, plan.grid.L - plan.beta)
        self.assertEqual(points % 2, 1)
        base_spacing = 2.0 * config.profile.halfwidth_scale / shock.delta / (config.profile.points - 1)
        self.assertLessEqual(2.0 * halfwidth / (points - 1), base_spacing + 1e-12)

    def test_wide_configured_table_is_kept(self) -> None:
        config = _make_config("shock.delta=0.2", "time.t_final=2", "grid.length=300", "profile.halfwidth_scale=200")
        shock, bc = resolve_shock(config)
        plan = plan_scenario(config, shock, bc)
        halfwidth, points = profile_extent(config, plan)
        self.assertAlmostEqual(halfwidth, 200.0 / shock.delta, places=9)
        self.assertEqual(points, config.profile.points)

    def test_default_final_times(self) -> None:
        config = _make_config("scenario.mode=transport", "shock.delta=0.2")
        shock, bc = resolve_shock(config)
        self.assertAlmostEqual(plan_scenario(config, shock, bc).t_final, 5.0 / shock.sigma, places=12)
        stability = _make_config("shock.delta=0.2")
        self.assertEqual(plan_scenario(stability, shock, bc).t_final, 200.0)


class RunScenarioTests(unittest.TestCase):
    def test_transport_run_writes_outputs(self) -> None:
        config = _make_quick_wave(
            "transport", "output.records_csv=true", "output.profile_csv=true", "output.snapshots=[0.0, 1.0]"
        )
        with tempfile.TemporaryDirectory() as tmp:
            summary = run_scenario(config, tmp)
            directory = Path(tmp)
            records = read_ndjson(directory / RECORDS_FILE)
            for name in (SUMMARY_FILE, SUMMARY_CSV_FILE, PROFILE_FILE, RECORDS_CSV_FILE):
                self.assertTrue((directory / name).exists(), name)
            snapshots = sorted(path.name for path in (directory / "snapshots").iterdir())
            loaded = load_summary(directory / SUMMARY_FILE)
        self.assertEqual(len(snapshots), 2)
        self.assertEqual(records[0]["t"], 0.0)
        self.assertAlmostEqual(records[-1]["t"], 2.0, places=10)
        self.assertEqual(summary.records, len(records))
        self.assertEqual(loaded.steps, summary.steps)
        self.assertLess(summary.max_shift_identity, 1e-10)
        self.assertLessEqual(summary.P1_max, 0.0)
        self.assertLess(summary.final_sup_err, 1e-2)
        self.assertTrue(summary.passed, summary.reasons)

    def test_wall_run_has_no_entropy_flux(self) -> None:
        config = _make_quick_wave("transport", "boundary.kind=impermeable")
        with tempfile.TemporaryDirectory() as tmp:
            summary = run_scenario(config, tmp)
        self.assertEqual(summary.boundary, "impermeable")
        self.assertEqual(summary.P1_abs_max, 0.0)

    def test_stability_run_reports_dissipation(self) -> None:
        config = _make_quick_wave("stability", "perturbation.width=10")
        with tempfile.TemporaryDirectory() as tmp:
            summary = run_scenario(config, tmp)
            raw = json.loads((Path(tmp) / SUMMARY_FILE).read_text(encoding="utf-8"))
        self.assertIsNotNone(summary.dissipation_ok_fraction)
        self.assertIsNotNone(summary.c_star)
        self.assertGreater(summary.initial_sup_err, 0.0)
        self.assertIsInstance(summary.passed, bool)
        self.assertEqual(raw["mode"], "stability")

    def test_frozen_shift_stays_at_zero(self) -> None:
        config = _make_quick_wave("stability", "shift.frozen=true")
        with tempfile.TemporaryDirectory() as tmp:
            summary = run_scenario(config, tmp)
        self.assertEqual(summary.final_X, 0.0)
        self.assertEqual(summary.final_Xdot, 0.0)

    def test_manufactured_run(self) -> None:
        config = _make_config("scenario.mode=manufactured", "gas.mu=0.05", "gas.kappa=0.05")
        with tempfile.TemporaryDirectory() as tmp:
            summary = run_scenario(config, tmp)
        self.assertEqual(summary.mode, "manufactured")
        self.assertLess(summary.manufactured_error, 1e-2)

    def test_repeated_runs_write_identical_records(self) -> None:
        config = _make_quick_wave("transport")
        contents = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                run_scenario(config, tmp)
                contents.append((Path(tmp) / RECORDS_FILE).read_bytes())
        self.assertGreater(len(contents[0]), 0)
        self.assertEqual(contents[0], contents[1])

    def test_short_grid_is_rejected(self) -> None:
        config = _make_quick_wave("transport", "grid.length=260")
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaisesRegex(ValueError, "truncates the wave tail"):
                run_scenario(config, tmp)


class VerdictTests(unittest.TestCase):
    def _summary(self, **changes) -> RunSummary:
        values = dict(
            name="v",
            mode="stability",
            peak_sup_err=1e-2,
            final_sup_err=1e-3,
            xdot_trend=-1e-6,
            dissipation_ok_fraction=1.0,
            max_shift_identity=1e-15,
            P1_max=-1e-6,
            P1_abs_max=1e-6,
        )
        values.update(changes)
        return RunSummary(**values)

    def test_converged_run_passes(self) -> None:
        verdict = classify_run(self._summary(), BoundaryKind.OUTFLOW)
        self.assertTrue(verdict.passed)
        self.assertEqual(verdict.reasons, [])

    def test_each_expectation_is_reported(self) -> None:
        verdict = classify_run(
            self._summary(final_sup_err=9e-3, xdot_trend=1e-3, dissipation_ok_fraction=0.5, P1_max=1e-3),
            BoundaryKind.OUTFLOW,
        )
        self.assertFalse(verdict.passed)
        self.assertEqual(len(verdict.reasons), 4)

    def test_wall_requires_zero_flux(self) -> None:
        self.assertFalse(classify_run(self._summary(), BoundaryKind.IMPERMEABLE).passed)
        self.assertTrue(classify_run(self._summary(P1_abs_max=0.0), BoundaryKind.IMPERMEABLE).passed)

    def test_frozen_shift_skips_identity(self) -> None:
        summary = self._summary(max_shift_identity=1.0)
        self.assertFalse(classify_run(summary, BoundaryKind.OUTFLOW).passed)
        self.assertTrue(classify_run(summary, BoundaryKind.OUTFLOW, frozen_shift=True).passed)


class SweepTests(unittest.TestCase):
    def _write(self, directory: Path, base: str, sweep: str) -> Path:
        (directory / "base.yaml").write_text(base, encoding="utf-8")
        path = directory / "sweep.yaml"
        path.write_text(sweep, encoding="utf-8")
        return path

    def test_base_is_relative_to_sweep_file(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(Path(tmp), "scenario:\n  mode: manufactured\n", "base: base.yaml\n")
            sweep = load_sweep(str(path))
            self.assertEqual(sweep.base, (Path(tmp) / "base.yaml").resolve())
        self.assertEqual(sweep.parameters, [])
        self.assertIsNone(sweep.fit)

    def test_bad_fit_model(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(Path(tmp), "{}\n", "base: base.yaml\nfit: {x: h, y: manufactured_error, model: cubic}\n")
            with self.assertRaises(ConfigError):
                load_sweep(str(path))

    def test_empty_sweep_gives_empty_report(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(Path(tmp), "{}\n", "base: base.yaml\nparameters: []\n")
            output = Path(tmp) / "out"
            report = asyncio.run(run_sweep(load_sweep(str(path)), output))
            self.assertTrue((output / SWEEP_FILE).exists())
            self.assertTrue((output / SWEEP_CSV_FILE).exists())
        self.assertEqual(report.members, [])
        self.assertEqual(report.failed, 0)

    def test_member_failures_do_not_stop_the_sweep(self) -> None:
        base = "scenario:\n  mode: manufactured\ngas:\n  mu: 0.05\n  kappa: 0.05\n"
        sweep_text = (
            "base: base.yaml\n"
            "concurrency: 2\n"
            "parameters:\n"
            "  - {grid.nodes: 41}\n"
            "  - {gas.mu: 0}\n"
            "  - {grid.nodes: 81}\n"
            "  - {grid.nodes: 161}\n"
            "fit: {x: h, y: manufactured_error, model: power}\n"
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(Path(tmp), base, sweep_text)
            output = Path(tmp) / "out"
            report = asyncio.run(run_sweep(load_sweep(str(path)), output))
            saved = json.loads((output / SWEEP_FILE).read_text(encoding="utf-8"))
        self.assertEqual([member.status for member in report.members], ["ok", "error", "ok", "ok"])
        self.assertIn("gas.mu", report.members[1].error)
        self.assertEqual(report.failed, 1)
        self.assertEqual(report.fit["points"], 3)
        self.assertGreaterEqual(report.fit["value"], 0.9)
        self.assertLessEqual(report.fit["value"], 2.2)
        self.assertEqual(len(saved["members"]), 4)

    def test_fit_falls_back_to_parameters(self) -> None:
        members = [
            SweepMember(index=0, parameters={"width": 1.0}, status="ok", summary={"final_sup_err": 2.0}),
            SweepMember(index=1, parameters={"width": 2.0}, status="ok", summary={"final_sup_err": 8.0}),
            SweepMember(index=2, parameters={"width": 4.0}, status="error"),
        ]
        result = fit_members(members, FitSpec(x="width", y="final_sup_err", model="power"))
        self.assertEqual(result["points"], 2)
        self.assertAlmostEqual(result["value"], 2.0, places=12)

    def test_log_fit_skips_zero_and_underflowed_points(self) -> None:
        members = [
            SweepMember(index=0, parameters={}, status="ok", summary={"beta": 100.0, "P45_mean": 1e-10}),
            SweepMember(index=1, parameters={}, status="ok", summary={"beta": 200.0, "P45_mean": 1e-20}),
            SweepMember(index=2, parameters={}, status="ok", summary={"beta": 400.0, "P45_mean": 0.0}),
        ]
        result = fit_members(members, FitSpec(x="beta", y="P45_mean", model="exponential"))
        self.assertEqual(result["points"], 2)
        self.assertEqual(result["dropped"], 1)
        self.assertNotIn("error", result)
        self.assertAlmostEqual(result["value"], 10.0 * math.log(10.0) / 100.0, places=10)

    def test_linear_fit_keeps_zero_points(self) -> None:
        members = [
            SweepMember(index=i, parameters={"t": float(i)}, status="ok", summary={"final_sup_err": float(i)})
            for i in range(3)
        ]
        result = fit_members(members, FitSpec(x="t", y="final_sup_err", model="linear"))
        self.assertEqual(result["points"], 3)
        self.assertEqual(result["dropped"], 0)
        self.assertAlmostEqual(result["value"], 1.0, places=12)


@unittest.skipUnless(os.environ.get("SHOCKLAB_SLOW"), "set SHOCKLAB_SLOW=1 for full stability runs")
class ExampleStabilityTests(unittest.TestCase):
    def test_outflow_example_passes(self) -> None:
        config = load_config(str(EXAMPLE_CONFIG))
        with tempfile.TemporaryDirectory() as tmp:
            summary = run_scenario(config, tmp)
        self.assertGreaterEqual(summary.dissipation_ok_fraction, 0.99)
        self.assertTrue(summary.passed, summary.reasons)

    def test_wall_example_keeps_dissipation(self) -> None:
        config = load_config(str(EXAMPLE_CONFIG), ["boundary.kind=impermeable", "shock.right.u=-0.1"])
        with tempfile.TemporaryDirectory() as tmp:
            summary = run_scenario(config, tmp)
        self.assertEqual(summary.boundary, "impermeable")
        self.assertLessEqual(summary.c_star, C_STAR_MAX)
        self.assertGreaterEqual(summary.dissipation_ok_fraction, 0.99)
        self.assertFalse([reason for reason in summary.reasons if "dissipation" in reason])

    def test_boundary_terms_decay_with_initial_distance(self) -> None:
        sweep_text = (
            "base: base.yaml\n"
            "concurrency: 3\n"
            "parameters:\n"
            "  - {shift.beta: 100}\n"
            "  - {shift.beta: 200}\n"
            "  - {shift.beta: 400}\n"
            "fit: {x: beta, y: P45_mean, model: exponential}\n"
        )
        with tempfile.TemporaryDirectory() as tmp:
            directory = Path(tmp)
            (directory / "base.yaml").write_text(EXAMPLE_CONFIG.read_text(encoding="utf-8"), encoding="utf-8")
            (directory / "sweep.yaml").write_text(sweep_text, encoding="utf-8")
            overrides = ("time.t_final=50", "output.snapshots=[0.0]")
            report = asyncio.run(run_sweep(load_sweep(str(directory / "sweep.yaml")), directory / "out", overrides))
        self.assertEqual(report.failed, 0)
        self.assertGreaterEqual(report.fit["points"], 2)
        self.assertNotIn("error", report.fit)
        self.assertGreater(report.fit["value"], 0.0)


if __name__ == "__main__":
    unittest.main()
