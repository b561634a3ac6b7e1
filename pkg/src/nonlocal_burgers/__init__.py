"""Simulation and verification of u_t = eps u_xx + (J*u - u) - u u_x with step-like data."""

from .errors import NonlocalBurgersError
from .field import FieldState, Grid1D, InitialProfile, linear_ramp, sample_initial, tanh_ramp
from .kernels import (
    DiscreteKernel,
    KernelFamily,
    KernelSpec,
    compact_bump,
    discretize_kernel,
    exponential,
    gaussian,
    tabulated,
)
from .metrics import RateFit, error_to_rarefaction, error_to_viscous, fit_rate, lp_norm
from .nonlocal_operator import NonlocalOp, apply_L, apply_L_elliptic
from .references import RiemannData, rarefaction, viscous_profile
from .solver import SolverConfig, Trajectory, integrate

__all__ = [
    "NonlocalBurgersError",
    "FieldState", "Grid1D", "InitialProfile", "linear_ramp", "sample_initial", "tanh_ramp",
    "DiscreteKernel", "KernelFamily", "KernelSpec", "compact_bump", "discretize_kernel",
    "exponential", "gaussian", "tabulated",
    "RateFit", "error_to_rarefaction", "error_to_viscous", "fit_rate", "lp_norm",
    "NonlocalOp", "apply_L", "apply_L_elliptic",
    "RiemannData", "rarefaction", "viscous_profile",
    "SolverConfig", "Trajectory", "integrate",
]
