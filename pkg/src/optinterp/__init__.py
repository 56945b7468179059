"""Optimal point sets for total-degree polynomial Lagrange interpolation.

Computes interpolation node sets on the unit cube and unit ball that
minimise the Lebesgue constant, by smoothed minimax optimisation over
nested admissible meshes, and analyses the growth of the optimal constants.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .analysis import (
    GrowthFit,
    boundary_distances,
    canonicalize,
    dubiner_distance,
    fit_ball_growth,
    fit_cube_growth,
    gauss_legendre_lobatto,
    setdistance,
)
from .domains import Domain, ball, contains, cube, project, sample_uniform
from .fundamentals import (
    FundamentalSet,
    PointSet,
    UnisolvenceError,
    build_fundamentals,
    is_unisolvent,
    vandermonde_fundamentals,
)
from .lebesgue import LebesgueReport, lebesgue_constant, lebesgue_function
from .meshes import (
    Mesh,
    ball3_mesh,
    cube_mesh,
    default_resolution,
    disk_mesh,
    gcl_nodes,
    mesh_for,
    refinement_schedule,
)
from .optimizer import (
    InnerParams,
    OptimConfig,
    OptimResult,
    inner_minimize,
    optimize,
    resume,
)
from .polyspace import (
    MultiIndex,
    Polynomial,
    PolySpace,
    enumerate_space,
    eval_basis,
    eval_basis_matrix,
    eval_poly,
    total_degree_dimension,
)

__all__ = [
    "BACKEND",
    "Domain",
    "FundamentalSet",
    "GrowthFit",
    "InnerParams",
    "LebesgueReport",
    "Mesh",
    "MultiIndex",
    "OptimConfig",
    "OptimResult",
    "PointSet",
    "PolySpace",
    "Polynomial",
    "UnisolvenceError",
    "ball",
    "ball3_mesh",
    "boundary_distances",
    "build_fundamentals",
    "canonicalize",
    "contains",
    "cube",
    "cube_mesh",
    "default_resolution",
    "disk_mesh",
    "dubiner_distance",
    "enumerate_space",
    "eval_basis",
    "eval_basis_matrix",
    "eval_poly",
    "fit_ball_growth",
    "fit_cube_growth",
    "gauss_legendre_lobatto",
    "gcl_nodes",
    "inner_minimize",
    "is_unisolvent",
    "lebesgue_constant",
    "lebesgue_function",
    "mesh_for",
    "optimize",
    "project",
    "refinement_schedule",
    "resume",
    "sample_uniform",
    "setdistance",
    "total_degree_dimension",
    "vandermonde_fundamentals",
]
