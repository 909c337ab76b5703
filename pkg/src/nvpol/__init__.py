"""Polarization lower bounds for a 13C bath from NV-center coherence differences."""

__version__ = "0.1.0"

from .environment import (
    DEFAULT_CONSTANTS,
    CouplingRow,
    Environment,
    Explicit,
    Graded,
    NuclearSpin,
    PhysicalConstants,
    Uniform,
    audit_rows,
    compute_coupling,
    generate_environment,
    load_environment,
    load_table1,
    save_environment,
    set_polarization,
)
from .dynamics import CoherenceSurface, coherence_branch, delta_rho, delta_surface
from .estimator import (
    BoundEstimate,
    Method,
    bound_time_dependent,
    bound_time_independent,
    bound_vs_polarization,
    estimate,
    per_tau_curve,
    soundness_check,
)
from .oracle import oracle_delta

__all__ = [
    "DEFAULT_CONSTANTS",
    "BoundEstimate",
    "CoherenceSurface",
    "CouplingRow",
    "Environment",
    "Explicit",
    "Graded",
    "Method",
    "NuclearSpin",
    "PhysicalConstants",
    "Uniform",
    "audit_rows",
    "bound_time_dependent",
    "bound_time_independent",
    "bound_vs_polarization",
    "coherence_branch",
    "compute_coupling",
    "delta_rho",
    "delta_surface",
    "estimate",
    "generate_environment",
    "load_environment",
    "load_table1",
    "oracle_delta",
    "per_tau_curve",
    "save_environment",
    "set_polarization",
    "soundness_check",
]
