"""hopflab: a numerical laboratory for Dirichlet-energy minimizers on the
unit disk under a nonnegative-Jacobian constraint, with quadratic
differential trajectories, degree, fiber-connectedness, conformal capacity
and oscillation diagnostics."""

__version__ = "0.1.0"

from .boundary import (BoundarySpec, DiscreteMap, douglas_energy,
                       harmonic_extension, sample_boundary, winding_number)
from .energy import (EnergyBreakdown, MinimizerResult, SolverConfig,
                     dirichlet_energy, jacobian_stats, minimize_admissible,
                     unconstrained_minimizer_energy)
from .hopf import (CriticalPoint, HopfField, TraceConfig, TrajectorySegment,
                   critical_points, endpoint_distinctness, holomorphy_residual,
                   hopf_product, trace_trajectory, vertical_constancy)
from .mesh import (UnitDiskMesh, WirtingerField, build_disk_mesh, refine,
                   wirtinger)
from .topology import (Condenser, DegreeReport, MonotonicityReport, capacity,
                       capacity_blowup_profile, default_fiber_radius,
                       degree_equality_check, degree_in_preimage,
                       fiber_components, monotonicity_report,
                       oscillation_decay_check, oscillation_profile)

__all__ = [name for name in dir() if not name.startswith("_")]
