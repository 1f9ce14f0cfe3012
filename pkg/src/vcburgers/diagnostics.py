"""Error metrics, report assembly and table rendering.

AE is the pointwise absolute difference against the theoretical solution;
GRE is the ratio of the L1 error to the L1 norm of the theoretical field,
summed over every grid node including the boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, LengthMismatch, ZeroReferenceNorm
from .lattice import MacroField

# sample points mirroring the published comparison tables
AE_TABLE_POINTS = tuple(float(x) for x in range(4, 40, 4))


def absolute_error(u_num: MacroField, u_ref: MacroField) -> np.ndarray:
    """Pointwise |u_ref - u_num|."""
    if len(u_num.u) != len(u_ref.u):
        raise LengthMismatch(
            f"field lengths differ: {len(u_num.u)} vs {len(u_ref.u)}"
        )
    return np.abs(u_ref.u - u_num.u)


def global_relative_error(u_num: MacroField, u_ref: MacroField) -> float:
    """sum |u_ref - u_num| / sum |u_ref| over all grid nodes."""
    ae = absolute_error(u_num, u_ref)
    denom = np.sum(np.abs(u_ref.u))
    if denom == 0.0:
        raise ZeroReferenceNorm("reference field has zero L1 norm")
    return float(np.sum(ae) / denom)


def convergence_order(errors, spacings) -> float:
    """Least-squares slope of log(error) against log(spacing)."""
    errors = np.asarray(errors, dtype=np.float64)
    spacings = np.asarray(spacings, dtype=np.float64)
    if len(errors) < 2 or len(errors) != len(spacings):
        raise DegenerateFit("need >= 2 matching (error, spacing) pairs")
    if np.any(errors <= 0.0) or np.any(spacings <= 0.0):
        raise DegenerateFit("errors and spacings must be positive")
    if np.any(np.diff(spacings) >= 0.0):
        raise DegenerateFit("spacings must be strictly decreasing")
    slope, _ = np.polyfit(np.log(spacings), np.log(errors), 1)
    return float(slope)


@dataclass
class ErrorReport:
    """Error diagnostics for one snapshot time."""

    t: float
    gre: float
    ae_samples: list[tuple[float, float, float, float]] = field(
        default_factory=list
    )  # (x, u_theory, u_num, ae)
    tau_report: tuple[float, float] | float = 0.0


def build_report(
    x: np.ndarray,
    u_num: MacroField,
    u_ref: MacroField,
    tau_report,
    sample_points=AE_TABLE_POINTS,
) -> ErrorReport:
    ae = absolute_error(u_num, u_ref)
    samples = []
    for xs in sample_points:
        i = int(np.argmin(np.abs(x - xs)))
        samples.append((float(x[i]), float(u_ref.u[i]), float(u_num.u[i]), float(ae[i])))
    return ErrorReport(
        t=u_num.t,
        gre=global_relative_error(u_num, u_ref),
        ae_samples=samples,
        tau_report=tau_report,
    )


def render_summary(reports: list[ErrorReport]) -> str:
    """CSV text for the GRE / tau summary (one row per snapshot)."""
    lines = ["t,gre,tau_min,tau_max"]
    for r in reports:
        tau = r.tau_report
        lo, hi = tau if isinstance(tau, tuple) else (tau, tau)
        lines.append(f"{r.t:g},{r.gre:.6e},{lo:.6g},{hi:.6g}")
    return "\n".join(lines) + "\n"


def render_ae_table(report: ErrorReport) -> str:
    """CSV text mirroring the published theoretical/computational tables."""
    lines = ["x,u_theory,u_num,ae"]
    for xs, ut, un, ae in report.ae_samples:
        lines.append(f"{xs:g},{ut:.8f},{un:.8f},{ae:.4e}")
    return "\n".join(lines) + "\n"


def render_profile(x: np.ndarray, u_num: MacroField, u_ref: MacroField) -> str:
    """Full-grid CSV profile (x, u_num, u_ref, ae)."""
    ae = absolute_error(u_num, u_ref)
    lines = ["x,u_num,u_ref,ae"]
    for xi, un, ur, e in zip(x, u_num.u, u_ref.u, ae):
        lines.append(f"{xi:g},{un:.12g},{ur:.12g},{e:.6e}")
    return "\n".join(lines) + "\n"


def render_convergence(rows: list[tuple[float, float, float]], order: float) -> str:
    """CSV text for the refinement study: dx, dt, gre plus the fitted
    order on the final row."""
    lines = ["dx,dt,gre,order"]
    for i, (dx, dt, gre) in enumerate(rows):
        tail = f"{order:.4f}" if i == len(rows) - 1 else ""
        lines.append(f"{dx:g},{dt:g},{gre:.6e},{tail}")
    return "\n".join(lines) + "\n"
