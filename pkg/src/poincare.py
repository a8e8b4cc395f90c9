from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson


DEFAULT_QTOL = 1e-8


def poincare_check(
    values,
    c: float,
    d: float,
    qtol: float = DEFAULT_QTOL,
    derivative=None,
) -> tuple[float, float, bool]:
    """Both sides of int |f - avg f|^2 <= 1/2 int (y - c)(d - y) |f'|^2 on [c, d].

    `values` are samples on a uniform grid including both ends. Without an explicit
    `derivative`, f' is taken by central differences.
    """
    f = np.asarray(values, dtype=float)
    if f.ndim != 1 or f.size < 3:
        raise ValueError("poincare check needs at least three samples")
    if not d > c:
        raise ValueError("poincare interval needs d > c")
    if np.ptp(f) == 0.0:
        return 0.0, 0.0, True
    y = np.linspace(c, d, f.size)
    df = np.gradient(f, y, edge_order=2) if derivative is None else np.asarray(derivative, dtype=float)
    mean = simpson(f, x=y) / (d - c)
    lhs = float(simpson((f - mean) ** 2, x=y))
    rhs = float(0.5 * simpson((y - c) * (d - y) * df * df, x=y))
    return lhs, rhs, bool(lhs <= rhs * (1.0 + qtol))


@dataclass
class PoincareSuiteReport:
    count: int
    failures: list[int] = field(default_factory=list)
    worst_ratio: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures


def random_trig_polynomial(rng: np.random.Generator, points: int) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Samples and exact derivative of a random trigonometric polynomial on a random interval."""
    c = float(rng.uniform(-5.0, 5.0))
    d = c + float(rng.uniform(0.5, 5.0))
    order = int(rng.integers(1, 6))
    y = np.linspace(c, d, points)
    s = (y - c) / (d - c)
    values = np.full(points, float(rng.normal()))
    derivative = np.zeros(points)
    for k in range(1, order + 1):
        a, b = rng.normal(size=2)
        w = k * np.pi
        values += a * np.cos(w * s) + b * np.sin(w * s)
        derivative += w / (d - c) * (-a * np.sin(w * s) + b * np.cos(w * s))
    return values, derivative, c, d


def poincare_suite(count: int = 1000, points: int = 4001, seed: int = 0, qtol: float = DEFAULT_QTOL) -> PoincareSuiteReport:
    rng = np.random.default_rng(seed)
    report = PoincareSuiteReport(count=count)
    for index in range(count):
        values, derivative, c, d = random_trig_polynomial(rng, points)
        lhs, rhs, ok = poincare_check(values, c, d, qtol, derivative=derivative)
        if rhs > 0:
            report.worst_ratio = max(report.worst_ratio, lhs / rhs)
        if not ok:
            report.failures.append(index)
    return report
