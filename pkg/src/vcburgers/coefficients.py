"""PDE coefficients and their inversion into lattice parameters.

The target equation is u_t + a(x,t) u u_x + b(x,t) u_xx - m(x,t) = 0.
The scheme recovers it when

    a = 2 tau dt c lam,      b = (1/2 - tau) dt c^2 eta,

so for given (a, b) the relaxation time and compensatory weight follow by
inversion.  eta is a fixed global constant (default 1); tau and lam are
recomputed per node, per step, from the local coefficient values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SingularDenominator, TauOutOfRange

EQ21_FAMILY = "eq21-family"
CUSTOM = "custom"

Evaluator = Callable[[np.ndarray | float, float], np.ndarray | float]

_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientModel:
    """Evaluators for the nonlinear (a), dispersive (b) and external-force
    (m) coefficients.  Each takes (x, t) and broadcasts over x."""

    a: Evaluator
    b: Evaluator
    m: Evaluator
    provenance: str = CUSTOM


@dataclass(frozen=True)
class LatticeParams:
    """Dimensionless lattice parameters (tau, eta, lam)."""

    tau: float
    eta: float
    lam: float

    def __post_init__(self):
        if not self.tau > 0.5:
            raise TauOutOfRange(f"tau must exceed 1/2, got {self.tau}")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")


def solve_params(
    a_val: float, b_val: float, c: float, dt: float, eta: float = 1.0
) -> LatticeParams:
    """Invert the coefficient-matching relations for one (a, b) pair.

    Requires b/eta < 0 (positive effective diffusion); otherwise the
    inversion would land at tau <= 1/2 and the configuration is
    anti-diffusive.
    """
    tau = 0.5 - b_val / (dt * c * c * eta)
    if not tau > 0.5:
        raise TauOutOfRange(
            f"b={b_val}, eta={eta} give tau={tau} <= 1/2 (anti-diffusive)"
        )
    lam = a_val / (2.0 * tau * dt * c)
    return LatticeParams(tau=tau, eta=eta, lam=lam)


def solve_params_field(
    a_vals: np.ndarray, b_vals: np.ndarray, c: float, dt: float, eta: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized inversion: returns (tau, lam) arrays for coefficient
    fields sampled over the grid."""
    b_vals = np.asarray(b_vals, dtype=np.float64)
    tau = 0.5 - b_vals / (dt * c * c * eta)
    if not np.all(tau > 0.5):
        raise TauOutOfRange(
            f"tau <= 1/2 somewhere (min {np.min(tau)}); b/eta must be < 0"
        )
    lam = np.asarray(a_vals, dtype=np.float64) / (2.0 * tau * dt * c)
    return tau, lam


def recovered_coefficients(
    params: LatticeParams, c: float, dt: float
) -> tuple[float, float]:
    """Re-evaluate (a, b) from lattice parameters; used for round-trip
    verification of solve_params."""
    a = params.lam * (2.0 * params.tau * dt * c)
    b = (0.5 - params.tau) * (dt * c * c * params.eta)
    return a, b


def eval_eq21(
    b1: Callable[[float], float],
    b2: Callable[[float], float],
    m: Callable[[float], float],
    p: float,
    q: float,
    x: np.ndarray | float,
    t: float,
    quad=None,
) -> tuple[np.ndarray | float, np.ndarray | float, float]:
    """Evaluate the coefficient family

        a = (x b1 + b2) / (p + I(t)),  b = x b1 + b2,  m = m(t),

    where I(t) is the nested integral of b1(s) * (q + integral of m).
    Integrals are antiderivatives vanishing at t=0 by default; pass a
    prebuilt ``NestedIntegrals`` as ``quad`` to override.
    """
    from .solutions import NestedIntegrals  # deferred: avoids import cycle

    if quad is None:
        quad = NestedIntegrals(b1=b1, b2=b2, m=m, q=q)
    denom = p + quad.denominator_integral(t)
    if abs(denom) < _SINGULAR_TOL:
        raise SingularDenominator(f"p + int b1[q + int m] = {denom} at t={t}")
    xb = np.asarray(x, dtype=np.float64) * b1(t) + b2(t)
    return xb / denom, xb, m(t)


def model_from_eq21(
    b1: Callable[[float], float],
    b2: Callable[[float], float],
    m: Callable[[float], float],
    p: float,
    q: float,
    m_offset: float = 0.0,
    denom_offset: float = 0.0,
    t_max: float = 2.0,
    dt_table: float = 1e-4,
) -> CoefficientModel:
    """Build a CoefficientModel for the eq21 family with the nested time
    integrals memoized on a dense grid (see solutions.NestedIntegrals)."""
    from .solutions import NestedIntegrals

    quad = NestedIntegrals(
        b1=b1,
        b2=b2,
        m=m,
        q=q,
        p=p,
        m_offset=m_offset,
        denom_offset=denom_offset,
        t_max=t_max,
        dt_table=dt_table,
    )

    def a(x, t):
        return eval_eq21(b1, b2, m, p, q, x, t, quad=quad)[0]

    def b(x, t):
        return np.asarray(x, dtype=np.float64) * b1(t) + b2(t)

    def m_eval(x, t):
        return np.broadcast_to(m(t), np.shape(x)) if np.ndim(x) else m(t)

    return CoefficientModel(a=a, b=b, m=m_eval, provenance=EQ21_FAMILY)
