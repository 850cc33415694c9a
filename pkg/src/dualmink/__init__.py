"""Dual curvature measures of origin-symmetric convex bodies.

Computes dual quermassintegrals and dual curvature measures, checks the
subspace mass inequality, and solves the even dual Minkowski problem for
discrete measures by variational gradient ascent.
"""

from .bodies import (BarrierBody, Cylinder, Ellipsoid, LogWulffFamily,
                     SymmetricPolytope, barrier_radial, hausdorff_distance,
                     log_wulff_member, radial_eval, support_eval, wulff_shape)
from .errors import (CapabilityError, DomainError, DualMinkError, EvaluationError,
                     GeometryError, SchemaError, SubspaceMassViolation)
from .functionals import (BarrierIntegrals, CurvatureMeasure, barrier_bound_ratio,
                          barrier_quermass_decomposed, barrier_quermass_direct,
                          barrier_quermass_transformed, cylinder_quermass,
                          dual_curvature, dual_quermass, dual_quermass_grassmann,
                          variational_check)
from .measures import (DiscreteEvenMeasure, PartitionMasses, SmiReport, entropy,
                       entropy_partition_bound, partition_masses,
                       rearrangement_bound, smi_check)
from .solver import (DualMinkowskiSolver, SolveConfig, SolveResult, default_grid,
                     maximize, phi, phi_gradient, verify_solution)
from .sphere import (GeneralCoords, SphericalGrid, build_grid,
                     general_coords_jacobian, integrate, integrate_split,
                     sphere_area, unit_ball_volume)

__version__ = "0.1.0"

__all__ = [
    "BarrierBody", "BarrierIntegrals", "CapabilityError", "CurvatureMeasure",
    "Cylinder", "DiscreteEvenMeasure", "DomainError", "DualMinkError",
    "DualMinkowskiSolver", "Ellipsoid", "EvaluationError", "GeneralCoords",
    "GeometryError", "LogWulffFamily", "PartitionMasses", "SchemaError",
    "SmiReport", "SolveConfig", "SolveResult", "SphericalGrid",
    "SubspaceMassViolation", "SymmetricPolytope", "barrier_bound_ratio",
    "barrier_quermass_decomposed", "barrier_quermass_direct",
    "barrier_quermass_transformed", "barrier_radial", "build_grid",
    "cylinder_quermass", "default_grid", "dual_curvature", "dual_quermass",
    "dual_quermass_grassmann", "entropy", "entropy_partition_bound",
    "general_coords_jacobian", "hausdorff_distance", "integrate",
    "integrate_split", "log_wulff_member", "maximize", "partition_masses",
    "phi", "phi_gradient", "radial_eval", "rearrangement_bound", "smi_check",
    "sphere_area", "support_eval", "unit_ball_volume", "variational_check",
    "verify_solution", "wulff_shape",
]
