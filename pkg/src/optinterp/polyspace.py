"""Total-degree polynomial spaces and evaluation of a graded tensor basis.

The space of d-variate polynomials of total degree <= n has dimension
C(n+d, d).  Basis elements are indexed by multi-indices enumerated in
graded-lexicographic order: all indices of degree k precede those of degree
k+1, and ties within a degree block are broken lexicographically on the
exponent tuple (first coordinate most significant).

Two basis kinds are supported: tensor-product Chebyshev polynomials
T_a(x) = prod_i T_{a_i}(x_i) (the default; well conditioned on [-1,1]^d up
to the degrees used here) and plain monomials x^a (kept for small-degree
cross checks).  Chebyshev values come from the three-term recurrence, which
stays valid outside [-1, 1].
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels

BASIS_KINDS = ("chebyshev", "monomial")

# Guard for enumerate_space: index tables beyond this cannot be materialised.
MAX_SPACE_SIZE = 20_000_000


@dataclass(frozen=True)
class MultiIndex:
    """Exponent tuple a = (a_1, ..., a_d) with total degree |a| = sum a_i."""

    exponents: tuple

    @property
    def degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True, eq=False)
class PolySpace:
    """The total-degree space Pi_n^d with a fixed graded basis.

    `exponents` is the (size, dim_vars) int64 table of multi-indices in
    graded-lexicographic order; `degrees` holds the row sums (the degree
    block of each basis element).
    """

    degree: int
    dim_vars: int
    size: int
    basis_kind: str
    exponents: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    @cached_property
    def index_list(self):
        return tuple(MultiIndex(tuple(int(a) for a in row)) for row in self.exponents)


@dataclass(eq=False)
class Polynomial:
    """Element of a PolySpace given by its coefficient vector."""

    space: PolySpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.shape != (self.space.size,):
            raise ValueError(
                f"coefficient vector has shape {self.coeffs.shape}, "
                f"expected ({self.space.size},)"
            )

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at one or more points; shape (P,) for (P, d) input."""
        return eval_basis_matrix(self.space, points) @ self.coeffs


def total_degree_dimension(n: int, d: int) -> int:
    """Dimension C(n+d, d) of Pi_n^d, in exact integer arithmetic."""
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return math.comb(n + d, d)


def _compositions(total, parts):
    # weak compositions of `total` into `parts` parts, lexicographic ascending
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_space(n: int, d: int, basis_kind: str = "chebyshev") -> PolySpace:
    """Build Pi_n^d with its graded-lexicographic multi-index table."""
    if basis_kind not in BASIS_KINDS:
        raise ValueError(f"basis_kind must be one of {BASIS_KINDS}, got {basis_kind!r}")
    size = total_degree_dimension(n, d)
    if size > MAX_SPACE_SIZE:
        raise OverflowError(
            f"Pi_{n}^{d} has dimension {size}, beyond the enumeration limit "
            f"{MAX_SPACE_SIZE}"
        )
    rows = []
    for k in range(n + 1):
        rows.extend(_compositions(k, d))
    exponents = np.asarray(rows, dtype=np.int64).reshape(size, d)
    degrees = exponents.sum(axis=1)
    return PolySpace(
        degree=n,
        dim_vars=d,
        size=size,
        basis_kind=basis_kind,
        exponents=exponents,
        degrees=degrees,
    )


def _as_points(space: PolySpace, points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != space.dim_vars:
        raise ValueError(
            f"points have shape {np.shape(points)}, expected (*, {space.dim_vars})"
        )
    return np.ascontiguousarray(pts)


def eval_basis_matrix(space: PolySpace, points) -> np.ndarray:
    """Matrix of basis values, entry [p, j] = phi_j(x_p)."""
    pts = _as_points(space, points)
    kind = _kernels.CHEBYSHEV if space.basis_kind == "chebyshev" else _kernels.MONOMIAL
    return _kernels.basis_matrix(pts, space.exponents, kind)


def eval_basis(space: PolySpace, x) -> np.ndarray:
    """Vector (phi_1(x), ..., phi_N(x)) at a single point."""
    return eval_basis_matrix(space, x)[0]


def eval_poly(p: Polynomial, x) -> float:
    """Value of the polynomial at a single point."""
    return float(np.dot(p.coeffs, eval_basis(p.space, x)))
