"""D1Q3 lattice Boltzmann solver for the variable-coefficient forced
Burgers equation, with analytic reference solutions, an independent
finite-difference oracle and error diagnostics."""

from .coefficients import (
    CoefficientModel,
    LatticeParams,
    eval_eq21,
    model_from_eq21,
    recovered_coefficients,
    solve_params,
    solve_params_field,
)
from .diagnostics import (
    ErrorReport,
    absolute_error,
    convergence_order,
    global_relative_error,
)
from .errors import (
    CflViolation,
    ConfigError,
    DegenerateFit,
    LengthMismatch,
    NoConvergence,
    NonFiniteState,
    SingularDenominator,
    TauOutOfRange,
    UnknownExample,
    VcBurgersError,
    ZeroReferenceNorm,
)
from .fd import FdConfig, fd_step, run_fd
from .lattice import (
    BoundarySpec,
    DistributionState,
    Grid1D,
    MacroField,
    NodeParams,
    compensatory,
    equilibrium,
    initialize,
    macro_velocity,
    simulate,
    step,
)
from .runner import ExperimentConfig, refinement_study, run_experiment, run_lbm
from .solutions import (
    ExamplePreset,
    SolitonSolutionSpec,
    eval_reference,
    example_preset,
    quadrature,
)

__version__ = "0.1.0"
