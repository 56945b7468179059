"""Admissible evaluation meshes: tensor GCL grids on the cube, polar grids
on the disk, spherical grids on the 3-ball.

Each mesh certifies polynomials of a stated degree through the inequality

    max_D |p|  <=  C(Y) * max_Y |p|,      p in Pi_n^d,

with C(Y) = (cos(pi*n/(2m)))^(-d) for the cube and disk constructions
(m > n required).  No constant is known for the 3-ball grid.  Grids with
resolutions m and 2m-1 are nested, which makes the refinement chain
m -> 2m-1 monotone for mesh maxima.
"""

from dataclasses import dataclass, field

import numpy as np

from .domains import BALL, CUBE, Domain, ball, cube
from .polyspace import PolySpace, eval_basis_matrix


@dataclass(eq=False)
class Mesh:
    """Finite evaluation set with its resolution and certified constant.

    `m` is the per-dimension resolution, `degree_for` the polynomial degree
    the mesh certifies, `constant` the inequality constant C(Y) where known.
    `raw_size` counts grid points before removal of coordinate-degenerate
    duplicates (origin, poles).
    """

    points: np.ndarray
    domain: Domain
    m: int
    degree_for: int
    constant: float = None
    raw_size: int = None
    _basis_cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def basis_matrix(self, space: PolySpace) -> np.ndarray:
        """Basis values at all mesh points, cached per space."""
        key = (space.degree, space.dim_vars, space.basis_kind)
        mat = self._basis_cache.get(key)
        if mat is None:
            mat = eval_basis_matrix(space, self.points)
            self._basis_cache[key] = mat
        return mat


def gcl_nodes(m: int, a: float = -1.0, b: float = 1.0) -> np.ndarray:
    """m Gauss-Chebyshev-Lobatto nodes on [a, b], ascending.

    On [-1, 1] these are -cos(pi*(j-1)/(m-1)), j = 1..m, with the midpoint
    for m = 1.  The construction is symmetrised so antisymmetric pairs are
    exact (0 is exact for odd m) and the endpoints are exactly a and b.
    """
    if m < 1:
        raise ValueError(f"node count must be >= 1, got {m}")
    if a >= b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if m == 1:
        return np.array([0.5 * (a + b)])
    x = -np.cos(np.pi * np.arange(m) / (m - 1))
    x = 0.5 * (x - x[::-1])
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    nodes[0] = a
    nodes[-1] = b
    return nodes


def _mesh_constant(n: int, m: int, d: int) -> float:
    return float(np.cos(np.pi * n / (2.0 * m)) ** (-d))


def _require_resolution(n: int, m: int):
    if m <= n:
        raise ValueError(
            f"mesh resolution m={m} must exceed the certified degree n={n}"
        )


def cube_mesh(n: int, d: int, m: int) -> Mesh:
    """Tensor-product GCL grid with m^d points on [-1,1]^d."""
    _require_resolution(n, m)
    nodes = gcl_nodes(m)
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    pts = np.stack(grids, axis=-1).reshape(-1, d)
    return Mesh(
        points=pts,
        domain=cube(d),
        m=m,
        degree_for=n,
        constant=_mesh_constant(n, m, d),
        raw_size=m**d,
    )


def disk_mesh(n: int, m: int) -> Mesh:
    """Polar grid on the unit disk: r in GCL_m on [-1,1], theta = k*pi/m.

    The signed radius halves the angular range compared to standard polar
    coordinates.  All copies of the origin (r = 0) collapse to one point;
    the removal is exact because GCL nodes contain an exact zero for odd m.
    """
    _require_resolution(n, m)
    radii = gcl_nodes(m)
    thetas = np.pi * np.arange(m) / m
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    rows = []
    seen_origin = False
    for r in radii:
        if r == 0.0:
            if not seen_origin:
                rows.append(np.zeros((1, 2)))
                seen_origin = True
            continue
        rows.append(np.column_stack([r * cos_t, r * sin_t]))
    pts = np.concatenate(rows, axis=0)
    return Mesh(
        points=pts,
        domain=ball(2),
        m=m,
        degree_for=n,
        constant=_mesh_constant(n, m, 2),
        raw_size=m * m,
    )


def ball3_mesh(n: int, m: int) -> Mesh:
    """Spherical grid on the unit 3-ball.

    r in GCL_m on [0, 1], theta = k*pi/m for 0 <= k < m, phi = k*pi/m for
    0 <= k < 2m.  Degenerate images are emitted once: the origin (r = 0)
    and, for each positive radius, the theta = 0 pole (0, 0, r).  No
    inequality constant is attached to this construction.
    """
    _require_resolution(n, m)
    radii = gcl_nodes(m, 0.0, 1.0)
    thetas = np.pi * np.arange(m) / m
    phis = np.pi * np.arange(2 * m) / m
    sin_t, cos_t = np.sin(thetas), np.cos(thetas)
    sin_p, cos_p = np.sin(phis), np.cos(phis)
    rows = []
    for r in radii:
        if r == 0.0:
            rows.append(np.zeros((1, 3)))
            continue
        for k, th in enumerate(thetas):
            if th == 0.0:
                rows.append(np.array([[0.0, 0.0, r]]))
                continue
            st, ct = sin_t[k], cos_t[k]
            rows.append(np.column_stack([r * st * cos_p, r * st * sin_p, np.full(2 * m, r * ct)]))
    pts = np.concatenate(rows, axis=0)
    return Mesh(
        points=pts,
        domain=ball(3),
        m=m,
        degree_for=n,
        constant=None,
        raw_size=2 * m**3,
    )


def mesh_for(domain: Domain, n: int, m: int) -> Mesh:
    """Dispatch to the admissible mesh construction for the domain."""
    if domain.kind == CUBE:
        return cube_mesh(n, domain.dim, m)
    if domain.dim == 2:
        return disk_mesh(n, m)
    if domain.dim == 3:
        return ball3_mesh(n, m)
    raise ValueError(
        f"no admissible mesh construction for the {domain.dim}-dimensional ball"
    )


def mesh_point_count(domain: Domain, m: int) -> int:
    """Upper bound on the mesh cardinality before degenerate-point removal."""
    if domain.kind == CUBE:
        return m**domain.dim
    return m * m if domain.dim == 2 else 2 * m**3


def default_resolution(n: int, mesh_cap: int = 129) -> int:
    """Resolution m(n) = 2^(n-1) + 1 for degree n, capped at mesh_cap."""
    if n < 1:
        raise ValueError(f"degree must be >= 1, got {n}")
    return min(2 ** (n - 1) + 1, mesh_cap)


def resolution_chain(n: int, mesh_cap: int = None):
    """Doubling chain 2, 3, 5, 9, ... restricted to n < m (<= mesh_cap)."""
    m = 2
    while mesh_cap is None or m <= mesh_cap:
        if m > n:
            yield m
        m = 2 * m - 1


def refinement_schedule(n: int, d: int, domain: Domain, mesh_cap: int = 129):
    """Nested meshes from the coarsest usable resolution up to m(n).

    The m-sequence follows the doubling chain and ends at
    default_resolution(n); each mesh contains its predecessor.  The
    optimiser keeps refining past this base schedule until the Lebesgue
    constant stabilises (see optimizer.optimize).
    """
    if n < 1:
        raise ValueError(f"degree must be >= 1, got {n}")
    if domain.dim != d:
        raise ValueError(f"domain dimension {domain.dim} != d={d}")
    terminal = default_resolution(n, mesh_cap)
    if terminal <= n:
        raise ValueError(
            f"mesh cap {mesh_cap} leaves no resolution above degree n={n}"
        )
    ms = [m for m in resolution_chain(n, terminal)]
    if not ms:
        ms = [terminal]
    return [mesh_for(domain, n, m) for m in ms]
