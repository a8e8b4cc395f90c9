from __future__ import annotations

import os
from pathlib import Path
import tempfile
import unittest

from src.config import apply_overrides, load_config, parse_config
from src.errors import ConfigError
from src.solver.boundary import BoundaryKind
from src.solver.perturbation import COMPONENTS


def _write_config(directory: str, text: str) -> str:
    path = Path(directory) / "config.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


class ConfigDefaultsTests(unittest.TestCase):
    def test_empty_config_uses_defaults(self) -> None:
        config = parse_config({})
        self.assertEqual(config.scenario.mode, "stability")
        self.assertIs(config.boundary.kind, BoundaryKind.OUTFLOW)
        self.assertEqual(config.shock.right.u, -1.2)
        self.assertFalse(config.shock.right_u_explicit)
        self.assertIsNone(config.grid.length)
        self.assertEqual(config.perturbation.shape, "gaussian")
        self.assertEqual(config.perturbation.amplitude, 0.01)
        self.assertEqual(config.diagnostics.every, 1)
        self.assertTrue(config.time.solver.upwind_density)

    def test_example_config_loads(self) -> None:
        root = Path(__file__).resolve().parents[1]
        config = load_config(str(root / "config.example.yaml"))
        self.assertEqual(config.scenario.mode, "stability")
        self.assertEqual(config.shock.delta, 0.1)


class ConfigValidationTests(unittest.TestCase):
    def test_unknown_section(self) -> None:
        with self.assertRaisesRegex(ConfigError, "unknown config key: solver"):
            parse_config({"solver": {}})

    def test_unknown_key(self) -> None:
        with self.assertRaisesRegex(ConfigError, "unknown config key: grid.spacing"):
            parse_config({"grid": {"spacing": 0.1}})

    def test_nonpositive_temperature_names_the_field(self) -> None:
        with self.assertRaisesRegex(ConfigError, "boundary.theta_minus must be > 0"):
            parse_config({"boundary": {"u_minus": -1.0, "theta_minus": 0.0}})

    def test_outflow_needs_negative_velocity(self) -> None:
        with self.assertRaisesRegex(ConfigError, "boundary.u_minus"):
            parse_config({"boundary": {"u_minus": 0.5, "theta_minus": 1.0}})

    def test_wall_rejects_temperature(self) -> None:
        with self.assertRaises(ConfigError):
            parse_config({"boundary": {"kind": "impermeable", "theta_minus": 1.2}})

    def test_amplitude_controls_are_exclusive(self) -> None:
        with self.assertRaises(ConfigError):
            parse_config({"shock": {"delta": 0.1, "rho_minus": 1.1}})

    def test_zero_viscosity_is_a_config_error(self) -> None:
        with self.assertRaisesRegex(ConfigError, "gas.mu"):
            parse_config({"gas": {"mu": 0.0}})

    def test_bad_mode(self) -> None:
        with self.assertRaises(ConfigError):
            parse_config({"scenario": {"mode": "explore"}})

    def test_section_must_be_mapping(self) -> None:
        with self.assertRaisesRegex(ConfigError, "grid must be a mapping"):
            parse_config({"grid": [1, 2]})

    def test_perturbation_components(self) -> None:
        config = parse_config({"perturbation": {"components": "all"}})
        self.assertEqual(config.perturbation.components, COMPONENTS)
        with self.assertRaises(ConfigError):
            parse_config({"perturbation": {"components": ["pressure"]}})

    def test_even_profile_points(self) -> None:
        with self.assertRaises(ConfigError):
            parse_config({"profile": {"points": 4000}})


class OverrideTests(unittest.TestCase):
    def test_string_overrides_are_parsed_as_yaml(self) -> None:
        data = apply_overrides({"shock": {"delta": 0.1}}, ["shock.delta=0.05", "grid.nodes=200", "shift.frozen=true"])
        self.assertEqual(data["shock"]["delta"], 0.05)
        self.assertEqual(data["grid"]["nodes"], 200)
        self.assertIs(data["shift"]["frozen"], True)

    def test_overrides_do_not_mutate_input(self) -> None:
        raw = {"shock": {"delta": 0.1}}
        apply_overrides(raw, {"shock.delta": 0.2})
        self.assertEqual(raw["shock"]["delta"], 0.1)

    def test_malformed_override(self) -> None:
        with self.assertRaises(ConfigError):
            apply_overrides({}, ["shock.delta"])
        with self.assertRaises(ConfigError):
            apply_overrides({}, ["delta=0.1"])
        with self.assertRaisesRegex(ConfigError, "unknown config key: physics"):
            apply_overrides({}, ["physics.delta=0.1"])

    def test_load_with_overrides_and_env(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            os.environ["SHOCKLAB_TEST_OUT"] = tmp
            try:
                path = _write_config(
                    tmp,
                    "scenario:\n  name: env\noutput:\n  directory: ${SHOCKLAB_TEST_OUT}/runs\nshock:\n  delta: 0.1\n",
                )
                config = load_config(path, ["shock.delta=0.2", "grid.max_spacing=0.25"])
            finally:
                del os.environ["SHOCKLAB_TEST_OUT"]
        self.assertEqual(config.output.directory, f"{tmp}/runs")
        self.assertEqual(config.shock.delta, 0.2)
        self.assertEqual(config.grid.max_spacing, 0.25)


if __name__ == "__main__":
    unittest.main()
