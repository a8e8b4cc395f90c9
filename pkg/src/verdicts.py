from __future__ import annotations

from dataclasses import dataclass, field

from .solver.boundary import BoundaryKind
from .summary import RunSummary, is_finite


SUP_REDUCTION = 0.5
DISSIPATION_FRACTION = 0.99
# |P1| below this counts as zero on an impermeable wall.
WALL_ROUNDOFF = 1e-14


@dataclass
class RunVerdict:
    passed: bool
    reasons: list[str] = field(default_factory=list)


def classify_run(
    summary: RunSummary,
    kind: BoundaryKind,
    identity_tolerance: float = 1e-12,
    frozen_shift: bool = False,
) -> RunVerdict:
    """Compare a finished stability or transport run against the expected behavior."""
    reasons: list[str] = []
    if summary.mode == "stability":
        peak, final = summary.peak_sup_err, summary.final_sup_err
        if not (is_finite(peak) and is_finite(final)) or final > SUP_REDUCTION * peak:
            reasons.append(f"sup_err fell only from {peak!r} to {final!r} (needs <= {SUP_REDUCTION} x peak)")
        if not is_finite(summary.xdot_trend) or summary.xdot_trend > 0:
            reasons.append(f"|Xdot| is not decreasing over the final half (trend {summary.xdot_trend!r})")
        fraction = summary.dissipation_ok_fraction
        if fraction is None or fraction < DISSIPATION_FRACTION:
            reasons.append(f"dissipation inequality held on {fraction!r} of steps (needs >= {DISSIPATION_FRACTION})")
        if summary.shift_bound_violations:
            reasons.append(f"|X(t)| exceeded sigma t / 2 on {summary.shift_bound_violations} records")

    if not frozen_shift:
        identity = summary.max_shift_identity
        if identity is None or not identity <= identity_tolerance:
            reasons.append(f"shift identity residual {identity!r} exceeds {identity_tolerance:.0e}")

    if kind is BoundaryKind.OUTFLOW:
        if summary.P1_max is not None and summary.P1_max > 0:
            reasons.append(f"P1 became positive ({summary.P1_max!r}) on an outflow boundary")
    elif summary.P1_abs_max is not None and summary.P1_abs_max > WALL_ROUNDOFF:
        reasons.append(f"P1 is not zero ({summary.P1_abs_max!r}) on an impermeable wall")

    return RunVerdict(passed=not reasons, reasons=reasons)
