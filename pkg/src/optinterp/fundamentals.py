"""Lagrange fundamental polynomials for a candidate point set.

The production path is a Newton-type elimination over the graded basis
(pivoted at each point, no determinants, no linear solves); a generalised
Vandermonde solve is kept as an independent oracle for tests at small N.
Failure of either construction signals a (numerically) non-unisolvent set:
the points lie on a hypersurface of degree n.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .domains import Domain, contains
from .polyspace import PolySpace, Polynomial, eval_basis_matrix

# A pivot counts as usable when it exceeds this fraction of the largest
# initial basis magnitude over the point set (scale-free test).
PIVOT_REL_TOL = 1e-12

# Max |l_j(xi_k) - delta_jk| accepted for a successful construction.
RESIDUAL_TOL = 1e-10

# Vandermonde oracle: condition estimate beyond this reports rank deficiency.
COND_LIMIT = 1e12


class UnisolvenceError(Exception):
    """The point set does not determine a unique interpolant in Pi_n^d."""


@dataclass(eq=False)
class PointSet:
    """N candidate interpolation nodes in the domain.

    Invariants checked on construction: exactly space.size points, all
    inside the domain (tolerance 1e-12), pairwise distinct.
    """

    points: np.ndarray
    space: PolySpace
    domain: Domain
    meta: dict = None

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        N, d = self.space.size, self.space.dim_vars
        if self.points.shape != (N, d):
            raise ValueError(
                f"point array has shape {self.points.shape}, expected ({N}, {d})"
            )
        if self.domain.dim != d:
            raise ValueError(
                f"domain dimension {self.domain.dim} != space dimension {d}"
            )
        inside = contains(self.domain, self.points, tol=1e-12)
        if not np.all(inside):
            bad = int(np.flatnonzero(~inside)[0])
            raise ValueError(f"point {bad} lies outside the domain: {self.points[bad]}")
        if N > 1:
            order = np.lexsort(self.points.T[::-1])
            diffs = np.diff(self.points[order], axis=0)
            if np.any((diffs == 0.0).all(axis=1)):
                raise ValueError("point set contains duplicate points")


@dataclass(eq=False)
class FundamentalSet:
    """The N fundamental polynomials of a point set, as a coefficient matrix.

    Row j of `coeffs` expands l_j in the space's graded basis, so values of
    all fundamentals at a batch of points are one matrix product.
    `residual` is the achieved max |l_j(xi_k) - delta_jk|.
    """

    coeffs: np.ndarray
    source: PointSet
    residual: float

    @cached_property
    def polys(self):
        return tuple(Polynomial(self.source.space, row) for row in self.coeffs)

    def values_at(self, points) -> np.ndarray:
        """Matrix [p, j] = l_j(x_p)."""
        return eval_basis_matrix(self.source.space, points) @ self.coeffs.T


def fundamental_coeffs(
    basis_at_points: np.ndarray,
    degrees: np.ndarray,
    pivot_rel_tol: float = PIVOT_REL_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> tuple:
    """Core elimination on a precomputed basis matrix B[i, j] = phi_j(xi_i).

    Returns (coeffs, residual); raises UnisolvenceError when no usable pivot
    remains at some point or the delta-property residual exceeds the
    tolerance.  Used directly on the optimiser hot path.
    """
    scale = float(np.abs(basis_at_points).max())
    pivot_tol = pivot_rel_tol * scale
    W, perm, fail = _kernels.newton_eliminate(basis_at_points, degrees, pivot_tol)
    if fail >= 0:
        raise UnisolvenceError(
            f"no pivot above {pivot_tol:.3e} at point {fail}; the points lie "
            f"(numerically) on a degree-{int(degrees.max())} hypersurface"
        )
    coeffs = np.ascontiguousarray(W[perm])
    delta = coeffs @ basis_at_points.T
    np.fill_diagonal(delta, delta.diagonal() - 1.0)
    residual = float(np.abs(delta).max())
    if residual > residual_tol:
        raise UnisolvenceError(
            f"delta-property residual {residual:.3e} exceeds {residual_tol:.1e}"
        )
    return coeffs, residual


def build_fundamentals(ps: PointSet) -> FundamentalSet:
    """Assemble the fundamental polynomials by pivoted Newton elimination.

    Working polynomials start as the graded basis.  For each point the pivot
    is the largest-magnitude candidate from the lowest viable degree block;
    it is normalised to 1 there and eliminated from all other working
    polynomials.  Termination at every point certifies unisolvence.
    """
    B = eval_basis_matrix(ps.space, ps.points)
    coeffs, residual = fundamental_coeffs(B, ps.space.degrees)
    return FundamentalSet(coeffs=coeffs, source=ps, residual=residual)


def vandermonde_fundamentals(ps: PointSet) -> FundamentalSet:
    """Oracle construction through the generalised Vandermonde matrix.

    Solves V^T-structured systems against Kronecker-delta right-hand sides
    (the determinant-ratio definition via Cramer's rule, without forming
    determinants, which would over/underflow at N = 66).  Intended for
    validation at small N only.
    """
    V = eval_basis_matrix(ps.space, ps.points)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise UnisolvenceError(
            f"Vandermonde condition estimate {cond:.3e} beyond {COND_LIMIT:.1e}"
        )
    coeffs = np.linalg.solve(V, np.eye(ps.space.size)).T
    delta = coeffs @ V.T
    np.fill_diagonal(delta, delta.diagonal() - 1.0)
    residual = float(np.abs(delta).max())
    return FundamentalSet(coeffs=coeffs, source=ps, residual=residual)


def is_unisolvent(ps: PointSet) -> bool:
    """Whether the pivoted elimination terminates for this point set."""
    try:
        build_fundamentals(ps)
    except UnisolvenceError:
        return False
    return True
