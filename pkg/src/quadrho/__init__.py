"""quadrho: exact reduced density matrices of a driven, dissipative
quadratic bosonic mode, with a brute-force truncated-Fock oracle.

The analytic route propagates the Heisenberg coefficient functions of
the closed linear mode+bath system, assembles the Gaussian generating
exponent of the reduced state and extracts matrix elements by a
factorial-scaled series contraction; closed-form excitation laws cover
the standard limits.  The `oracle` module provides an independent dense
simulation for validation, and the `quadrho` CLI runs scenario files.
"""

from . import _kernels
from .closedform import (
    PnResult,
    large_time_limits,
    mean_excitation,
    pn_hermite,
    pn_laguerre,
    pn_laguerre_sequence,
    pn_poisson,
    resonant_poisson,
    zeta_sinusoidal,
)
from .coefficients import (
    BathCoefficientSet,
    CoefficientSet,
    ThermalQuadratic,
    assemble_generator,
    bath_coefficients,
    closed_form_alpha,
    coherent_displacement,
    commutator_defect,
    propagate,
    response_function,
    symplectic_defect,
    thermal_occupation,
    thermal_quadratic,
    write_coefficients_csv,
    zeta_combined,
)
from .genfunc import (
    BiSeries,
    QuadraticForm,
    ReducedDensityMatrix,
    build_exponent,
    exp_quadratic,
    mean_excitation_from_exponent,
    rho_element,
    rho_matrix,
    select_n_cut,
)
from .model import (
    BathSpec,
    DriveSpec,
    SystemSpec,
    drive_eval,
    susceptibility_laplace,
    validate_spec,
)
from .oracle import (
    CutoffPlan,
    FullState,
    build_hamiltonian,
    compare,
    converged_reduced,
    evolve,
    initial_state,
    partial_trace,
    reduce_state,
    reduced_at_times,
    thermal_bath_state,
)
from .specfun import hermite, hermite_laguerre_residual, laguerre, log_factorial

kernel_backend = _kernels.backend

__version__ = "0.1.0"
