"""D1Q3 lattice state and the collide-stream-force update.

The lattice carries three populations per node for the discrete velocities
{0, +c, -c} with c = dx/dt.  One update consists of BGK relaxation toward
a local equilibrium, injection of the compensatory and external-force
source terms, streaming of the moving populations by one node, and a
boundary repair step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import LengthMismatch, NonFiniteState, TauOutOfRange

EQUILIBRIUM_RESET = "equilibrium-reset"
NONEQ_EXTRAPOLATION = "nonequilibrium-extrapolation"
PERIODIC = "periodic"  # test-only scheme, not meant for production runs

_BC_SCHEMES = (EQUILIBRIUM_RESET, NONEQ_EXTRAPOLATION, PERIODIC)


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid plus the lattice time step.

    The lattice speed ``c = dx / dt`` ties the two discretizations
    together; it must be finite and positive.
    """

    x0: float
    nx: int
    dx: float
    dt: float

    def __post_init__(self):
        if self.nx < 3:
            raise ValueError(f"nx must be >= 3, got {self.nx}")
        if not (self.dx > 0.0 and self.dt > 0.0):
            raise ValueError("dx and dt must be positive")
        if not np.isfinite(self.dx / self.dt):
            raise ValueError("lattice speed dx/dt is not finite")

    @property
    def c(self) -> float:
        return self.dx / self.dt

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)


@dataclass
class DistributionState:
    """The three population fields at one time level.

    ``f`` has shape (3, nx): row 0 is the resting population, row 1 moves
    right (+c), row 2 moves left (-c).
    """

    f: np.ndarray
    t: float

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=np.float64)
        if self.f.ndim != 2 or self.f.shape[0] != 3:
            raise ValueError(f"f must have shape (3, nx), got {self.f.shape}")

    @property
    def nx(self) -> int:
        return self.f.shape[1]


@dataclass
class MacroField:
    """Macroscopic velocity field u(x) at one time level."""

    u: np.ndarray
    t: float

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        if self.u.ndim != 1:
            raise ValueError("u must be one-dimensional")


@dataclass(frozen=True)
class BoundarySpec:
    """Dirichlet endpoint values and the population-repair scheme."""

    left_value: float = 0.0
    right_value: float = 0.0
    scheme: str = NONEQ_EXTRAPOLATION

    def __post_init__(self):
        if self.scheme not in _BC_SCHEMES:
            raise ValueError(f"unknown boundary scheme {self.scheme!r}")
        if self.scheme != PERIODIC and not (
            np.isfinite(self.left_value) and np.isfinite(self.right_value)
        ):
            raise ValueError("boundary values must be finite")


def equilibrium(u, eta):
    """Equilibrium populations ((1-eta)*u, eta*u/2, eta*u/2).

    Moments: sum f = u, first moment 0, second moment c^2*eta*u.
    Accepts scalars or arrays; returns a triple of the same shape.
    """
    half = 0.5 * eta * u
    return ((1.0 - eta) * u, half, half)


def compensatory(u, lam):
    """Compensatory populations (s/3, s/3, -2s/3) with s = lam*u^2.

    Moments: sum h = 0, first moment c*lam*u^2.
    """
    s = lam * u * u
    third = s / 3.0
    return (third, third, -2.0 * third)


def macro_velocity(state: DistributionState) -> MacroField:
    """Velocity field u = f0 + f1 + f2."""
    return MacroField(u=state.f.sum(axis=0), t=state.t)


def initialize(u0: MacroField, eta: float) -> DistributionState:
    """Equilibrium initialization: f_i = equilibrium(u0, eta) nodewise."""
    f = np.stack(equilibrium(np.asarray(u0.u, dtype=np.float64), eta))
    return DistributionState(f=f, t=u0.t)


@dataclass(frozen=True)
class NodeParams:
    """Per-node lattice parameters for one step.

    ``tau`` and ``lam`` may be scalars or length-nx arrays; ``eta`` is a
    global scalar (see coefficient_map policy).
    """

    tau: np.ndarray | float
    eta: float
    lam: np.ndarray | float


def step(
    state: DistributionState,
    params: NodeParams,
    m_field: np.ndarray | float,
    bc: BoundarySpec,
    grid: Grid1D,
) -> DistributionState:
    """Advance the lattice by one time step.

    Order of operations: compute u, BGK-relax toward equilibrium with the
    local tau, add dt*h_i and dt*m/3 at the pre-streaming node, stream
    f1 right / f2 left by one node, then repair the boundary nodes
    according to ``bc.scheme``.
    """
    tau = np.asarray(params.tau, dtype=np.float64)
    if np.any(tau <= 0.5):
        raise TauOutOfRange(f"tau must exceed 1/2 everywhere (min {tau.min()})")

    dt = grid.dt
    f0, f1, f2 = state.f

    # overflow/invalid produce inf/nan and are reported as NonFiniteState
    # below, so numpy's warnings are redundant here
    with np.errstate(over="ignore", invalid="ignore"):
        u = f0 + f1 + f2

        e0, e1, e2 = equilibrium(u, params.eta)
        h0, h1, h2 = compensatory(u, params.lam)
        force = (np.asarray(m_field, dtype=np.float64) / 3.0) * dt

        g0 = f0 - (f0 - e0) / tau + h0 * dt + force
        g1 = f1 - (f1 - e1) / tau + h1 * dt + force
        g2 = f2 - (f2 - e2) / tau + h2 * dt + force

        out = np.empty_like(state.f)
        out[0] = g0
        out[1, 1:] = g1[:-1]
        out[2, :-1] = g2[1:]
        # incoming populations at the endpoints; overwritten unless periodic
        out[1, 0] = g1[-1]
        out[2, -1] = g2[0]

        if bc.scheme != PERIODIC:
            _apply_dirichlet(out, bc, params.eta)

    if not np.all(np.isfinite(out)):
        raise NonFiniteState(f"non-finite population after step at t={state.t}")

    return DistributionState(f=out, t=state.t + dt)


def _apply_dirichlet(f: np.ndarray, bc: BoundarySpec, eta: float) -> None:
    """Rebuild the two boundary nodes after streaming (in place)."""
    for idx, nbr, value in ((0, 1, bc.left_value), (-1, -2, bc.right_value)):
        eq = equilibrium(value, eta)
        if bc.scheme == EQUILIBRIUM_RESET:
            for i in range(3):
                f[i, idx] = eq[i]
        else:
            # copy the neighbor's nonequilibrium part onto the boundary
            u_nbr = f[0, nbr] + f[1, nbr] + f[2, nbr]
            eq_nbr = equilibrium(u_nbr, eta)
            for i in range(3):
                f[i, idx] = eq[i] + (f[i, nbr] - eq_nbr[i])


BoundaryValues = Callable[[float], tuple[float, float]]


@dataclass
class SimulationResult:
    """Final state plus requested snapshots and the tau range seen."""

    state: DistributionState
    snapshots: dict[float, MacroField] = field(default_factory=dict)
    tau_min: float = np.inf
    tau_max: float = -np.inf
    steps: int = 0


def simulate(
    grid: Grid1D,
    u0: MacroField,
    params_at: Callable[[float], NodeParams],
    m_at: Callable[[float], np.ndarray | float],
    boundary_values: BoundaryValues,
    scheme: str,
    n_steps: int,
    snapshot_steps: dict[int, float] | None = None,
) -> SimulationResult:
    """Drive the lattice for ``n_steps`` updates.

    ``params_at`` and ``m_at`` are evaluated at the pre-step time
    (explicit coefficient treatment); ``boundary_values`` is sampled at
    the post-step time, which is when the repaired boundary nodes live.
    ``snapshot_steps`` maps step counts to the times recorded for them.
    """
    if len(u0.u) != grid.nx:
        raise LengthMismatch(
            f"initial field has {len(u0.u)} nodes, grid has {grid.nx}"
        )
    state = initialize(u0, params_at(u0.t).eta)
    result = SimulationResult(state=state)
    snapshot_steps = snapshot_steps or {}
    if 0 in snapshot_steps:
        result.snapshots[snapshot_steps[0]] = macro_velocity(state)

    for n in range(n_steps):
        t = state.t
        p = params_at(t)
        tau = np.asarray(p.tau, dtype=np.float64)
        result.tau_min = min(result.tau_min, float(tau.min()))
        result.tau_max = max(result.tau_max, float(tau.max()))
        left, right = boundary_values(t + grid.dt)
        bc = BoundarySpec(left_value=left, right_value=right, scheme=scheme)
        try:
            state = step(state, p, m_at(t), bc, grid)
        except NonFiniteState as exc:
            raise NonFiniteState(str(exc), step_index=n) from None
        result.steps = n + 1
        if n + 1 in snapshot_steps:
            result.snapshots[snapshot_steps[n + 1]] = macro_velocity(state)

    result.state = state
    return result
