"""Quantum trajectories of N collective two-level atoms under drho/dt = 2 J_x rho J_x - J_x^2 rho - rho J_x^2."""

__version__ = "0.1.0"

from .catalog import CatalogEntry, Family, catalog, fidelity
from .cycles import (
    Classification,
    EnsembleStats,
    Outcome,
    aggregate,
    classify,
    jump_rate_ratio,
    p_cycle,
    p_cycle_gauss,
    p_steady,
    p_steady_stirling,
    witness_genuine_entanglement,
)
from .errors import BasisMismatch, ConfigError, NumericalGuardError, TraceDrift, ZeroJumpAmplitude
from .master import DensityMatrix, integrate, lindblad_rhs, liouvillian, liouvillian_nullspace, trace_distance
from .params import PhysicalParams, derive_rates
from .spin import (
    Basis,
    HalfInteger,
    OperatorMatrix,
    SpinState,
    change_basis,
    chi_state,
    dicke_state,
    initial_state,
    jx_squared_expectation,
    ladder_operators,
    rotation_oracle,
    wigner_d,
    wigner_d_matrix,
)
from .trajectory import (
    CollapseSpec,
    Sampler,
    StepperConfig,
    TrajectoryRecord,
    apply_jump,
    effective_hamiltonian,
    free_evolve,
    jump_probability,
    run_batch,
    run_trajectory,
)
