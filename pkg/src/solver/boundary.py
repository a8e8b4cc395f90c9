from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..thermo import State
from .grid import Field


class BoundaryKind(str, Enum):
    OUTFLOW = "outflow"
    IMPERMEABLE = "impermeable"


@dataclass(frozen=True)
class BoundarySpec:
    kind: BoundaryKind
    u_minus: float
    theta_minus: float

    def __post_init__(self) -> None:
        if not self.theta_minus > 0:
            raise ValueError("boundary.theta_minus must be > 0")
        if self.kind is BoundaryKind.OUTFLOW and not self.u_minus < 0:
            raise ValueError("boundary.u_minus must be < 0 for outflow")
        if self.kind is BoundaryKind.IMPERMEABLE and self.u_minus != 0:
            raise ValueError("boundary.u_minus must be 0 for an impermeable wall")

    @classmethod
    def from_state(cls, kind: BoundaryKind, state: State) -> BoundarySpec:
        return cls(kind=kind, u_minus=state.u, theta_minus=state.theta)


def apply_bc(field: Field, bc: BoundarySpec, far_state: State) -> Field:
    """Impose u(0) = u-, theta(0) = theta- and pin x = L to the far state.

    No density condition is set at x = 0: rho there is advanced by the one-sided
    continuity equation inside the rate evaluation.
    """
    field.u[0] = bc.u_minus
    field.theta[0] = bc.theta_minus
    field.rho[-1] = far_state.rho
    field.u[-1] = far_state.u
    field.theta[-1] = far_state.theta
    return field
