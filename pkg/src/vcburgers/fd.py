"""Explicit finite-difference oracle for the target equation.

Independent cross-check for the lattice solver: forward Euler in time,
central (default) or first-order upwind advection, central second
differences for the dispersive term, Dirichlet endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import CoefficientModel
from .errors import CflViolation, NonFiniteState
from .lattice import BoundarySpec, Grid1D, MacroField

CENTRAL = "central"
UPWIND = "first-order-upwind"

_CFL_LIMIT = 0.9
_CFL_RECHECK = 100  # steps between stability rechecks


@dataclass(frozen=True)
class FdConfig:
    grid: Grid1D
    dt_fd: float
    advection_scheme: str = CENTRAL

    def __post_init__(self):
        if self.advection_scheme not in (CENTRAL, UPWIND):
            raise ValueError(f"unknown advection scheme {self.advection_scheme!r}")
        if not self.dt_fd > 0.0:
            raise ValueError("dt_fd must be positive")


def cfl_number(
    u: np.ndarray, a: np.ndarray, b: np.ndarray, dx: float, dt_fd: float
) -> float:
    """dt * (2 |b|_max / dx^2 + |a u|_max / dx)."""
    return dt_fd * (
        2.0 * np.max(np.abs(b)) / dx**2 + np.max(np.abs(a * u)) / dx
    )


def check_cfl(u, a, b, dx, dt_fd) -> None:
    nu = cfl_number(u, a, b, dx, dt_fd)
    if nu > _CFL_LIMIT:
        raise CflViolation(f"CFL number {nu:.3f} exceeds {_CFL_LIMIT}")


def stable_dt(u0: np.ndarray, a, b, dx: float, safety: float = 0.5) -> float:
    """A time step keeping the CFL number at ``safety`` for the initial
    field (the caller still gets runtime rechecks)."""
    rate = 2.0 * np.max(np.abs(b)) / dx**2 + np.max(np.abs(a * u0)) / dx
    return safety * _CFL_LIMIT / rate


def fd_step(
    u: MacroField, model: CoefficientModel, cfg: FdConfig, bc: BoundarySpec
) -> MacroField:
    """One forward-Euler update of u_t = -a u u_x - b u_xx + m."""
    grid = cfg.grid
    x = grid.x
    v = u.u
    a = np.broadcast_to(np.asarray(model.a(x, u.t), dtype=np.float64), v.shape)
    b = np.broadcast_to(np.asarray(model.b(x, u.t), dtype=np.float64), v.shape)
    m = np.broadcast_to(np.asarray(model.m(x, u.t), dtype=np.float64), v.shape)

    dx = grid.dx
    dxx = np.zeros_like(v)
    dxx[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dx**2

    d1 = np.zeros_like(v)
    if cfg.advection_scheme == CENTRAL:
        d1[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    else:
        fwd = (v[2:] - v[1:-1]) / dx
        bwd = (v[1:-1] - v[:-2]) / dx
        wind = a[1:-1] * v[1:-1]
        d1[1:-1] = np.where(wind >= 0.0, bwd, fwd)

    out = v + cfg.dt_fd * (-a * v * d1 - b * dxx + m)
    out[0] = bc.left_value
    out[-1] = bc.right_value
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(f"non-finite FD field after step at t={u.t}")
    return MacroField(u=out, t=u.t + cfg.dt_fd)


def run_fd(
    u0: MacroField,
    model: CoefficientModel,
    cfg: FdConfig,
    boundary_values: Callable[[float], tuple[float, float]],
    scheme: str,
    t_end: float,
) -> MacroField:
    """March the oracle to t_end (the last step is shortened to land on it
    exactly).  The CFL constraint is checked at launch and every 100
    steps."""
    x = cfg.grid.x
    a = np.asarray(model.a(x, u0.t), dtype=np.float64)
    b = np.asarray(model.b(x, u0.t), dtype=np.float64)
    check_cfl(u0.u, a, b, cfg.grid.dx, cfg.dt_fd)

    u = u0
    n = 0
    while u.t < t_end - 1e-15:
        dt = min(cfg.dt_fd, t_end - u.t)
        step_cfg = cfg if dt == cfg.dt_fd else FdConfig(cfg.grid, dt, cfg.advection_scheme)
        left, right = boundary_values(u.t + dt)
        bc = BoundarySpec(left_value=left, right_value=right, scheme=scheme)
        try:
            u = fd_step(u, model, step_cfg, bc)
        except NonFiniteState as exc:
            raise NonFiniteState(str(exc), step_index=n) from None
        n += 1
        if n % _CFL_RECHECK == 0:
            a = np.asarray(model.a(x, u.t), dtype=np.float64)
            b = np.asarray(model.b(x, u.t), dtype=np.float64)
            check_cfl(u.u, a, b, cfg.grid.dx, cfg.dt_fd)
    return u
