from __future__ import annotations

import numpy as np


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("fit inputs must have matching shapes")
    if x.size < 2:
        raise ValueError("fit needs at least two points")
    return x, y


def loglog_slope(x, y) -> float:
    """Exponent p of a power law y ~ C x^p, by least squares in log-log."""
    x, y = _pair(x, y)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def exponential_rate(x, y) -> float:
    """Rate r of y ~ C exp(-r x)."""
    x, y = _pair(x, y)
    if np.any(y <= 0):
        raise ValueError("exponential fit needs positive data")
    return float(-np.polyfit(x, np.log(y), 1)[0])


def linear_trend(t, y) -> float:
    t, y = _pair(t, y)
    return float(np.polyfit(t, y, 1)[0])


def fit(model: str, x, y) -> float:
    if model == "power":
        return loglog_slope(x, y)
    if model == "exponential":
        return exponential_rate(x, y)
    if model == "linear":
        return linear_trend(x, y)
    raise ValueError(f"unknown fit model: {model}")
