from __future__ import annotations


class ConfigError(ValueError):
    """Invalid scenario configuration. The message names the offending key."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure (exit code 2)."""


class ShockCurveError(NumericalError):
    pass


class ProfileError(NumericalError):
    pass


class PositivityError(NumericalError):
    pass


class StepSizeError(NumericalError):
    pass
