"""One-dimensional lab for the generalized-momentum, PT-symmetric Schroedinger field theory."""

from .banded import BandedComplexMatrix, BandedLU
from .core import (
    Grid,
    MuProfile,
    PhysicalConstants,
    PotentialProfile,
    check_pt_symmetry,
    eval_mu,
    eval_potential,
    integrate,
    make_grid,
)
from .densities import (
    DensitySnapshot,
    canonical_momenta,
    compute_snapshot,
    current_density,
    energy_flux,
    hamiltonian_density,
    lagrangian_density,
    momentum_density,
    probability_density,
    total_energy,
)
from .evolution import EvolutionReport, Propagator, continuity_residual, probability_drift, run, step
from .fields import FieldState, init_gaussian, pt_transform
from .operators import (
    assemble_hamiltonian,
    assemble_momentum,
    kinetic_identity_residual,
    pt_conjugate_matrix_defect,
)
from .spectral import SpectralResult, lowest_eigenpairs, stationarity_check

__version__ = "0.1.0"

__all__ = [
    "assemble_hamiltonian",
    "assemble_momentum",
    "BandedComplexMatrix",
    "BandedLU",
    "canonical_momenta",
    "check_pt_symmetry",
    "compute_snapshot",
    "continuity_residual",
    "current_density",
    "DensitySnapshot",
    "energy_flux",
    "eval_mu",
    "eval_potential",
    "EvolutionReport",
    "FieldState",
    "Grid",
    "hamiltonian_density",
    "init_gaussian",
    "integrate",
    "kinetic_identity_residual",
    "lagrangian_density",
    "lowest_eigenpairs",
    "make_grid",
    "momentum_density",
    "MuProfile",
    "PhysicalConstants",
    "PotentialProfile",
    "probability_density",
    "probability_drift",
    "Propagator",
    "pt_conjugate_matrix_defect",
    "pt_transform",
    "run",
    "SpectralResult",
    "stationarity_check",
    "step",
    "total_energy",
]
