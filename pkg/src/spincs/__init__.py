"""SU(2) coherent states built on arbitrary fiducial vectors.

Rotation matrices and their composition rules, coherent states and the
resolution of unity, the first-order Lagrangian with its degenerate
canonical equations, geometric and dynamical phases of cyclic orbits, and
the time-ordered propagator between coherent states.
"""
from .coherent import (
    ACoefficients,
    CoherentState,
    FiducialVector,
    SpinExpectation,
    a_coefficients,
    coherent_state,
    expectation_spin,
    generating_function,
    overlap,
    preset_fiducial,
    resolution_residual,
)
from .dynamics import (
    CanonicalRates,
    CanonicalSystem,
    CyclicCase,
    FieldProtocol,
    Gauge,
    MatrixHamiltonian,
    Trajectory,
    action,
    canonical_matrix,
    canonical_residual,
    canonical_rhs,
    cyclic_path,
    cyclic_theta,
    hamiltonian_expectation,
    integrate_trajectory,
    lagrangian,
    topological_term,
)
from .errors import (
    AngleAtPole,
    ChartViolation,
    GimbalDegenerate,
    InconsistentSystem,
    NoCyclicSolution,
    SingularReducedSystem,
    SpinCSError,
    SpinMismatch,
    TooFewNodes,
    UnknownCase,
)
from .phases import (
    PhaseResult,
    Surface,
    dynamical_phase,
    geometric_phase,
    interference_intensity,
    loop_phase,
    one_form,
    phase_result,
    surface_phase,
    two_form,
)
from .propagator import PropagatorResult, exact_propagator, insertion_identity_residual, transition_amplitude
from .quadrature import QuadratureSpec
from .scenarios import A3Spin1, SimpleSpin1, Simplest, SpecialSpin1, run_scenario, scenario_closed_form
from .su2 import (
    SPIN_HALF,
    EulerAngles,
    GaussianParams,
    SpinQuantum,
    compose_rotations,
    compose_three,
    euler_from_matrix,
    gaussian_decomposition,
    orthogonality_residual,
    rotation_matrix,
    spin_operators,
    wigner_small_d,
)

__version__ = "0.1.0"

__all__ = [
    "A3Spin1",
    "ACoefficients",
    "AngleAtPole",
    "CanonicalRates",
    "CanonicalSystem",
    "ChartViolation",
    "CoherentState",
    "CyclicCase",
    "EulerAngles",
    "FiducialVector",
    "FieldProtocol",
    "Gauge",
    "GaussianParams",
    "GimbalDegenerate",
    "InconsistentSystem",
    "MatrixHamiltonian",
    "NoCyclicSolution",
    "PhaseResult",
    "PropagatorResult",
    "QuadratureSpec",
    "SPIN_HALF",
    "SimpleSpin1",
    "Simplest",
    "SingularReducedSystem",
    "SpecialSpin1",
    "SpinCSError",
    "SpinExpectation",
    "SpinMismatch",
    "SpinQuantum",
    "Surface",
    "TooFewNodes",
    "Trajectory",
    "UnknownCase",
    "a_coefficients",
    "action",
    "canonical_matrix",
    "canonical_residual",
    "canonical_rhs",
    "coherent_state",
    "compose_rotations",
    "compose_three",
    "cyclic_path",
    "cyclic_theta",
    "dynamical_phase",
    "euler_from_matrix",
    "exact_propagator",
    "expectation_spin",
    "gaussian_decomposition",
    "generating_function",
    "geometric_phase",
    "hamiltonian_expectation",
    "insertion_identity_residual",
    "integrate_trajectory",
    "interference_intensity",
    "lagrangian",
    "loop_phase",
    "one_form",
    "orthogonality_residual",
    "overlap",
    "phase_result",
    "preset_fiducial",
    "resolution_residual",
    "rotation_matrix",
    "run_scenario",
    "scenario_closed_form",
    "spin_operators",
    "surface_phase",
    "topological_term",
    "transition_amplitude",
    "two_form",
    "wigner_small_d",
]
