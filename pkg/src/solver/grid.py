from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid

from ..errors import PositivityError


MIN_NODES = 16


@dataclass(frozen=True)
class Grid1D:
    L: float
    N: int

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError("grid.length must be > 0")
        if self.N < MIN_NODES:
            raise ValueError(f"grid.nodes must be >= {MIN_NODES}")

    @property
    def h(self) -> float:
        return self.L / (self.N - 1)

    @cached_property
    def x(self) -> np.ndarray:
        nodes = np.arange(self.N) * self.h
        nodes.setflags(write=False)
        return nodes

    def integrate(self, values: np.ndarray) -> float:
        return float(trapezoid(values, dx=self.h))

    @classmethod
    def with_spacing(cls, length: float, max_spacing: float) -> Grid1D:
        """Smallest uniform grid on [0, length] whose spacing does not exceed max_spacing."""
        if not max_spacing > 0:
            raise ValueError("grid.max_spacing must be > 0")
        nodes = int(np.ceil(length / max_spacing)) + 1
        return cls(L=length, N=max(nodes, MIN_NODES))


@dataclass
class Field:
    grid: Grid1D
    t: float
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def __post_init__(self) -> None:
        for name in ("rho", "u", "theta"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.shape != (self.grid.N,):
                raise ValueError(f"field.{name} must have {self.grid.N} nodes")
            setattr(self, name, values)
        check_positive(self)

    def copy(self, **changes) -> Field:
        data = {"rho": self.rho.copy(), "u": self.u.copy(), "theta": self.theta.copy()}
        data.update(changes)
        return replace(self, **data)


def check_positive(field: Field) -> None:
    for name in ("rho", "theta"):
        values = getattr(field, name)
        if not np.all(np.isfinite(values)):
            raise PositivityError(f"non-finite {name} at t={field.t:.6g}")
        bad = np.flatnonzero(values <= 0)
        if bad.size:
            index = int(bad[0])
            raise PositivityError(
                f"{name} lost positivity at t={field.t:.6g}, x={field.grid.x[index]:.6g} "
                f"(min {float(values.min()):.3e})"
            )


def first_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Central differences inside, second-order one-sided at both ends."""
    return np.gradient(values, h, edge_order=2)


def second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / (h * h)
    out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / (h * h)
    out[-1] = (2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]) / (h * h)
    return out


def boundary_derivative(values: np.ndarray, h: float) -> float:
    """Three-point second-order one-sided derivative at x = 0."""
    return float((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h))
