"""Finite-volume coagulation-fragmentation with spatial diffusion."""

__version__ = "0.1.0"

from ._kernels import configure_threads
from .cf_kernel import coag_flux, dissipation, fluxes, frag_flux, q_classical, q_from_fluxes, weak_form
from .diagnostics import entropy_split, fit_decay_rate, projection_x2, spatial_fields
from .diffusion import State, diffusion_apply, diffusion_entropy_flux
from .equilibrium import EquilibriumProfile, detailed_balance_profile, discrete_volume, global_equilibrium, local_equilibrium, solve_alpha
from .errors import (
    CofragError,
    ConfigurationError,
    ConservationError,
    ContractError,
    DomainError,
    InfeasibleError,
    PositivityError,
    UnsupportedOperation,
)
from .evolution import DiagnosticsRecord, RunResult, SimConfig, moments, record_diagnostics, relative_entropy, rhs, run, step
from .size_grid import KernelTables, SizeGrid, build_kernel_tables, build_size_grid
from .spatial_mesh import BoundaryProfile, SpatialMesh, build_cartesian_mesh, mesh_regularity, tag_boundary

configure_threads()
