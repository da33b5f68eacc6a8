"""Exterior Dirichlet obstacle scattering by boundary-residual minimization.

The approximate scattered field is a finite expansion in outgoing wave
functions (spherical harmonics times outgoing radial factors, optionally
recentered at several interior points).  Coefficients minimize the
discrete weighted-L2 residual of the Dirichlet condition on the obstacle
boundary, computed by pivoted-QR least squares on a tensor Simpson grid.
"""

from .fields import (
    boundary_trace_error,
    coeff_error,
    exact_sphere_coefficients,
    far_field_amplitude,
    incident,
    scattered_field,
)
from .geometry import (
    CylinderPatch,
    PlanePatch,
    QuadratureGrid,
    RadialShape,
    StarRadialPatch,
    Surface,
    area_weight,
    build_surface,
    quad_grid,
    simpson_coefficients,
    to_spherical,
)
from .linalg import LeastSquaresResult, qr_least_squares
from .mrc import (
    BasisSet,
    DegenerateNodeError,
    EscalationPlan,
    IncidentWave,
    MrcSolution,
    adaptive_solve,
    assemble_system,
    basis_column,
    minimize_functional,
)
from .scenario import Scenario, ScenarioError, parse_scenario, scenario_to_yaml
from .specfun import (
    HarmonicIndex,
    RadialKind,
    harmonic_indices,
    legendre_assoc,
    legendre_p,
    outgoing_radial,
    outgoing_radial_table,
    sph_bessel_j,
    sph_bessel_j_table,
    sph_bessel_y,
    sph_bessel_y_table,
    sph_harm,
    sph_harm_table,
    theta_lm,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSet",
    "CylinderPatch",
    "DegenerateNodeError",
    "EscalationPlan",
    "HarmonicIndex",
    "IncidentWave",
    "LeastSquaresResult",
    "MrcSolution",
    "PlanePatch",
    "QuadratureGrid",
    "RadialKind",
    "RadialShape",
    "Scenario",
    "ScenarioError",
    "StarRadialPatch",
    "Surface",
    "adaptive_solve",
    "area_weight",
    "assemble_system",
    "basis_column",
    "boundary_trace_error",
    "build_surface",
    "coeff_error",
    "exact_sphere_coefficients",
    "far_field_amplitude",
    "harmonic_indices",
    "incident",
    "legendre_assoc",
    "legendre_p",
    "minimize_functional",
    "outgoing_radial",
    "outgoing_radial_table",
    "parse_scenario",
    "qr_least_squares",
    "quad_grid",
    "scattered_field",
    "scenario_to_yaml",
    "simpson_coefficients",
    "sph_bessel_j",
    "sph_bessel_j_table",
    "sph_bessel_y",
    "sph_bessel_y_table",
    "sph_harm",
    "sph_harm_table",
    "theta_lm",
    "to_spherical",
    "__version__",
]
