"""Spectral solver for Lindblad dynamics of bosons coupled to commuting spins.

The package diagonalizes the generator of the master equation

    d rho / dt = -i [H, rho] + sum_mu (2 L_mu rho L_mu' - {L_mu' L_mu, rho})

for quadratic boson Hamiltonians and jump operators linear in the modes plus
a commuting spin part.  It exposes the full decay spectrum, per-sector
steady states and decay modes on a truncated Fock space, exact observable
evolution by mode expansion, and an independent brute-force integrator that
cross-validates every spectral result.
"""

from .errors import (
    AmbiguousKernelWarning,
    DefectiveX,
    IllConditionedWarning,
    LyapunovUnsolvable,
    ModelError,
    NoKernel,
    NumericalFailure,
    SingularS,
    StepFailure,
    TruncationOverflow,
    UnstableSpectrum,
)
from .fockspace import (
    FockRep,
    SectorBasis,
    SuperRep,
    build_decay_mode,
    build_decay_modes,
    build_dense_liouvillian,
    build_fock_rep,
    build_normal_form_liouvillian,
    build_sector_bases,
    build_super_basis,
    build_zeta,
    find_ness,
    interior_mask,
    sector_block,
)
from .ivp import (
    EvolutionResult,
    InitialState,
    ModeExpansion,
    closed_form_sigma_x,
    default_time_grid,
    evolve_observable,
    evolve_spectral,
    project_initial_state,
    small_z_sigma_x,
    small_z_system,
    solve_coefficients,
)
from .model import (
    JumpOperator,
    ModelSpec,
    Sector,
    StructureMatrices,
    build_structure_matrices,
    enumerate_sectors,
    load_model,
    save_model,
    single_spin_boson,
    validate_model,
)
from .oracle import (
    IntegratorConfig,
    evolve_observable_oracle,
    expectation,
    integrate_master_equation,
)
from .spectral import (
    SpectralData,
    assert_stability,
    build_spectral_data,
    diagonalize_X,
    mode_eigenvalue,
    solve_lyapunov,
)
from .superop import (
    QuadraticForm,
    SectorShift,
    build_quadratic_form,
    sector_shift,
)

__version__ = "0.1.0"
