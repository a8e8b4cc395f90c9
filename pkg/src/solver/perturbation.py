from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np

from ..profile import ShockProfile, sample_shifted
from .grid import Field, Grid1D


SHAPES = ("none", "gaussian", "bump", "random")
COMPONENTS = ("rho", "u", "theta")
# Random bumps keep their centers this many widths away from both ends.
RANDOM_MARGIN = 6.0

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerturbationSpec:
    shape: str = "none"
    amplitude: float = 0.0
    center: float | None = None
    width: float = 20.0
    components: tuple[str, ...] = ("u",)
    modes: int = 4
    tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.shape not in SHAPES:
            raise ValueError(f"perturbation.shape must be one of {', '.join(SHAPES)}")
        if not self.width > 0:
            raise ValueError("perturbation.width must be > 0")
        if not self.components:
            raise ValueError("perturbation.components must not be empty")
        for name in self.components:
            if name not in COMPONENTS:
                raise ValueError(f"perturbation.components has unknown entry: {name}")
        if self.modes < 1:
            raise ValueError("perturbation.modes must be >= 1")


def shape_values(spec: PerturbationSpec, grid: Grid1D, seed: int = 0) -> np.ndarray:
    """The scalar perturbation g(x) on the grid nodes."""
    x = grid.x
    if spec.shape == "none" or spec.amplitude == 0.0:
        return np.zeros(grid.N)
    center = 0.5 * grid.L if spec.center is None else spec.center
    width = spec.width
    if spec.shape == "gaussian":
        return spec.amplitude * np.exp(-(((x - center) / width) ** 2))
    if spec.shape == "bump":
        values = np.sin(np.pi * (x - center + width) / (2.0 * width)) ** 2
        return spec.amplitude * np.where(np.abs(x - center) < width, values, 0.0)

    lo, hi = RANDOM_MARGIN * width, grid.L - RANDOM_MARGIN * width
    if not hi > lo:
        raise ValueError("perturbation.width is too large for a random perturbation on this grid")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(lo, hi, spec.modes)
    weights = rng.uniform(-1.0, 1.0, spec.modes)
    values = np.zeros(grid.N)
    for c, weight in zip(centers, weights):
        values += weight * np.exp(-(((x - c) / width) ** 2))
    peak = np.max(np.abs(values))
    return spec.amplitude * values / peak if peak > 0 else values


def initialize(
    grid: Grid1D,
    profile: ShockProfile,
    beta: float,
    perturbation: PerturbationSpec | None = None,
    seed: int = 0,
) -> Field:
    """Profile shifted by beta plus a perturbation that vanishes at both ends."""
    perturbation = perturbation or PerturbationSpec()
    sample = sample_shifted(profile, grid.x, beta=beta)
    g = shape_values(perturbation, grid, seed)
    for end, value in (("x=0", g[0]), ("x=L", g[-1])):
        if abs(value) > perturbation.tol:
            raise ValueError(
                f"perturbation is not compatible with the boundary data at {end} "
                f"(|g|={abs(value):.3e} > {perturbation.tol:.1e})"
            )
    values = {"rho": sample.rho.copy(), "u": sample.u.copy(), "theta": sample.theta.copy()}
    for name in perturbation.components:
        values[name] += g
    if perturbation.shape != "none":
        logger.debug(
            "Perturbation %s: amplitude=%.4g components=%s",
            perturbation.shape,
            perturbation.amplitude,
            ",".join(perturbation.components),
        )
    return Field(grid=grid, t=0.0, **values)
