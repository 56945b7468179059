"""Lebesgue function and mesh-approximated Lebesgue constant.

Lambda(x) = sum_j |l_j(x)| for the fundamental polynomials of a point set;
its maximum over an admissible mesh approximates the Lebesgue constant.
Mesh evaluation is one dense matrix product against the cached mesh-basis
matrix plus absolute row sums, which is what the optimiser hammers on.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fundamentals import FundamentalSet, PointSet, build_fundamentals
from .meshes import Mesh
from .polyspace import eval_basis


@dataclass(eq=False)
class LebesgueReport:
    """Mesh maximum of the Lebesgue function with its provenance.

    `value` is the max over the mesh, `argmax` the mesh point attaining it
    (lowest mesh index on ties).  The mesh identity (m, cardinality) travels
    with the value so numbers from different meshes are never compared
    silently.  `per_point` is populated only on request.
    """

    value: float
    argmax: np.ndarray
    argmax_index: int
    mesh_m: int
    mesh_size: int
    per_point: np.ndarray = None


def lebesgue_function(fs: FundamentalSet, x) -> float:
    """Lambda(x) = sum_j |l_j(x)| at a single point."""
    b = eval_basis(fs.source.space, x)
    return float(np.abs(fs.coeffs @ b).sum())


def lambda_on_mesh(coeffs: np.ndarray, mesh_basis: np.ndarray) -> np.ndarray:
    """Lebesgue-function values at all mesh points for given coefficients."""
    return _kernels.abs_row_sums(mesh_basis @ coeffs.T)


def lebesgue_constant(ps: PointSet, mesh: Mesh, keep_per_point: bool = False) -> LebesgueReport:
    """Max of the Lebesgue function over the mesh.

    Builds the fundamentals once, then evaluates Lambda at every mesh point
    through the cached (mesh x basis) matrix.  UnisolvenceError propagates
    from the construction.
    """
    if mesh.domain != ps.domain:
        raise ValueError(
            f"mesh domain {mesh.domain} does not match point-set domain {ps.domain}"
        )
    fs = build_fundamentals(ps)
    values = lambda_on_mesh(fs.coeffs, mesh.basis_matrix(ps.space))
    idx = int(np.argmax(values))
    return LebesgueReport(
        value=float(values[idx]),
        argmax=mesh.points[idx].copy(),
        argmax_index=idx,
        mesh_m=mesh.m,
        mesh_size=mesh.size,
        per_point=values if keep_per_point else None,
    )
