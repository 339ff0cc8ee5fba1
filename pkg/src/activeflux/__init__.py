"""Active Flux schemes on triangular meshes with MOOD limiting."""
from .boundary import BoundarySpec, exact_dirichlet, farfield, mirror_state, neumann, wall
from .highorder import Scheme, SchemeWorkspace, spatial_operator_high
from .loworder import LowOrderConfig
from .mesh import Mesh, build_dof_map, load_gmsh, refine_split_edges, structured_mesh
from .models import Euler, KPP, Advection, numerical_flux
from .mood import MoodConfig, MoodLimiter
from .space import SolutionState, Space
from .timestepping import TimeConfig, compute_dt, run_to_time, ssprk3_step

__all__ = [
    "Advection", "BoundarySpec", "Euler", "KPP", "LowOrderConfig", "Mesh", "MoodConfig",
    "MoodLimiter", "Scheme", "SchemeWorkspace", "SolutionState", "Space", "TimeConfig",
    "build_dof_map", "compute_dt", "exact_dirichlet", "farfield", "load_gmsh", "mirror_state",
    "neumann", "numerical_flux", "refine_split_edges", "run_to_time", "spatial_operator_high",
    "ssprk3_step", "structured_mesh", "wall",
]
