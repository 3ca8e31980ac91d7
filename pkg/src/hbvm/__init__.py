"""Hamiltonian Boundary Value Methods as continuous-stage RK / RKN integrators."""

from ._core import backend_name, set_backend
from .integrator import (
    DivergenceError,
    FirstOrderIVP,
    SecondOrderIVP,
    SolverConfig,
    StagePolynomial,
    StepFailure,
    Trajectory,
    as_first_order,
    dense_output,
    hbvm_step,
    integrate,
    rkn_step,
)
from .legendre import (
    DegreeOverflowError,
    LegendreBasis,
    SpectralMatrices,
    UnsupportedTruncationError,
    a_s,
    abar_s,
    build_spectral,
    eval_I,
    eval_P,
    xi,
)
from .quadrature import QuadratureRule, gauss_rule
from .tableau import (
    ButcherTableauRK,
    ButcherTableauRKN,
    TableauError,
    build_lowrank_symplectic,
    build_rk,
    build_rkn,
    export_tableau,
    gauss_collocation,
    import_tableau,
)

__version__ = "0.1.0"
