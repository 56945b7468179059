"""Post-processing of optimisation outputs.

Growth-law fits of the Lebesgue constant against the degree, symmetry
canonicalisation and comparison of point sets, and geometric diagnostics
(arccos-metric distances, distance from the ball boundary, a reference
Gauss-Legendre-Lobatto radius pattern).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .domains import BALL, CUBE
from .fundamentals import PointSet

# Exhaustive hyperoctahedral search is 2^d * d! elements; beyond this only
# sign flips are searched.
FULL_GROUP_MAX_DIM = 6


@dataclass(eq=False)
class GrowthFit:
    """Least-squares fit lambda ~ c1 * regressor(n) + c0.

    `model` names the regressor; `residual` is the RMS of the fit over the
    data actually used.
    """

    model: str
    c1: float
    c0: float
    residual: float
    data: np.ndarray

    def predict(self, n) -> np.ndarray:
        return self.c1 * self._regressor(np.asarray(n, dtype=float)) + self.c0

    def _regressor(self, n):
        raise NotImplementedError


class _PowerLogFit(GrowthFit):
    def __init__(self, d, **kw):
        super().__init__(**kw)
        self.d = d

    def _regressor(self, n):
        return np.log(n + 1.0) ** self.d


class _AlgebraicFit(GrowthFit):
    def __init__(self, d, **kw):
        super().__init__(**kw)
        self.d = d

    def _regressor(self, n):
        return n ** ((self.d - 1) / 2.0)


def _least_squares(reg, lam, constant=True):
    # exact 2x2 (or 1x1) normal-equation solve
    if constant:
        A = np.column_stack([reg, np.ones_like(reg)])
    else:
        A = reg.reshape(-1, 1)
    coef = np.linalg.solve(A.T @ A, A.T @ lam)
    resid = lam - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    c1 = float(coef[0])
    c0 = float(coef[1]) if constant else 0.0
    return c1, c0, rms


def _check_fit_data(data):
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
        raise ValueError("need at least 3 (n, lambda) pairs")
    if np.any(data[:, 0] < 1):
        raise ValueError("growth fits require degrees n >= 1")
    if np.unique(data[:, 0]).size < 2:
        raise ValueError("degenerate fit: all degrees equal")
    return data


def fit_cube_growth(data, d: int) -> GrowthFit:
    """Fit c1 * (log(n+1))^d + c2 to (n, lambda) pairs."""
    data = _check_fit_data(data)
    reg = np.log(data[:, 0] + 1.0) ** d
    c1, c0, rms = _least_squares(reg, data[:, 1])
    return _PowerLogFit(
        d=d, model=f"c1*(log(n+1))^{d} + c2", c1=c1, c0=c0, residual=rms, data=data
    )


def fit_ball_growth(data, d: int, constant: bool = True) -> GrowthFit:
    """Fit c * n^((d-1)/2) (+ c0 unless constant=False) to (n, lambda) pairs.

    The additive constant is reported separately so the pure-power fit is
    recoverable by passing constant=False.
    """
    data = _check_fit_data(data)
    reg = data[:, 0] ** ((d - 1) / 2.0)
    c1, c0, rms = _least_squares(reg, data[:, 1], constant=constant)
    return _AlgebraicFit(
        d=d, model=f"c*n^({(d-1)/2:g}) + c0", c1=c1, c0=c0, residual=rms, data=data
    )


def _group_elements(d: int, full: bool):
    """Hyperoctahedral elements as (permutation, signs) pairs."""
    signs = list(itertools.product((1.0, -1.0), repeat=d))
    perms = list(itertools.permutations(range(d))) if full else [tuple(range(d))]
    for perm in perms:
        for sg in signs:
            yield perm, np.array(sg)


def _apply(points, perm, signs):
    return points[:, perm] * signs


def _sorted_rows(points):
    order = np.lexsort(points.T[::-1])
    return points[order]


def canonicalize(ps: PointSet) -> PointSet:
    """Canonical representative under the cube symmetry group.

    Applies coordinate permutations and sign flips (2^d * d! elements for
    d <= 6, sign flips only beyond that), sorts each image's rows
    lexicographically and returns the lexicographically smallest image.
    Idempotent, and invariant under any group element applied beforehand.
    """
    if ps.domain.kind != CUBE:
        raise ValueError("canonicalize applies to cube point sets")
    d = ps.domain.dim
    full = d <= FULL_GROUP_MAX_DIM
    best = None
    for perm, signs in _group_elements(d, full):
        candidate = _sorted_rows(_apply(ps.points, perm, signs))
        key = candidate.ravel()
        if best is None or _lex_less(key, best_key):
            best, best_key = candidate, key
    return PointSet(points=best, space=ps.space, domain=ps.domain, meta=ps.meta)


def _lex_less(a, b):
    diff = a != b
    if not diff.any():
        return False
    i = int(np.flatnonzero(diff)[0])
    return a[i] < b[i]


def setdistance(a: PointSet, b: PointSet, procrustes: bool = False) -> float:
    """Symmetry-aware matching distance between two point sets.

    Minimum over the applicable symmetry group (hyperoctahedral for the
    cube; the same sign-flip/permutation subgroup for the ball, where full
    rotational invariance cannot be exhausted, so the ball value is an upper
    bound) of the minimum-weight perfect-matching cost, with euclidean edge
    costs.  `procrustes=True` additionally aligns the best candidate by an
    orthogonal Procrustes rotation and rematches once (ball comparisons).
    """
    if a.space.size != b.space.size or a.domain != b.domain:
        raise ValueError("point sets must share N, d and domain")
    d = a.domain.dim
    full = d <= FULL_GROUP_MAX_DIM
    best_cost = np.inf
    best_img = None
    for perm, signs in _group_elements(d, full):
        img = _apply(b.points, perm, signs)
        cost = _matching_cost(a.points, img)
        if cost < best_cost:
            best_cost, best_img = cost, img
    if procrustes and a.domain.kind == BALL:
        from scipy.linalg import orthogonal_procrustes

        rows, cols = _matching_pairs(a.points, best_img)
        R, _ = orthogonal_procrustes(best_img[cols], a.points[rows])
        rotated = best_img @ R
        best_cost = min(best_cost, _matching_cost(a.points, rotated))
    return float(best_cost)


def _pairwise_distances(a, b):
    return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))


def _matching_pairs(a, b):
    return linear_sum_assignment(_pairwise_distances(a, b))


def _matching_cost(a, b):
    D = _pairwise_distances(a, b)
    rows, cols = linear_sum_assignment(D)
    return float(D[rows, cols].sum())


def matched_pairs(a: PointSet, b: PointSet):
    """Index pairing (rows of a, rows of b) of the plain matching problem."""
    rows, cols = _matching_pairs(a.points, b.points)
    return rows, cols


def dubiner_distance(x, y) -> float:
    """arccos-metric distance on [-1,1] (d=1) or the square (d=2).

    d=1: |arccos y - arccos x|; d=2: max of the coordinatewise arccos
    differences.  Coordinates more than 1e-12 outside [-1, 1] are rejected.
    """
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.shape != yv.shape or xv.size not in (1, 2):
        raise ValueError("dubiner_distance is defined for d=1 and d=2 points")
    for v in (xv, yv):
        if np.any(np.abs(v) > 1.0 + 1e-12):
            raise ValueError(f"coordinate outside [-1, 1]: {v}")
    ax = np.arccos(np.clip(xv, -1.0, 1.0))
    ay = np.arccos(np.clip(yv, -1.0, 1.0))
    return float(np.max(np.abs(ay - ax)))


def boundary_distances(ps: PointSet) -> np.ndarray:
    """Euclidean distance 1 - ||x|| from the unit sphere, per point."""
    if ps.domain.kind != BALL:
        raise ValueError("boundary_distances applies to ball point sets")
    return 1.0 - np.linalg.norm(ps.points, axis=1)


def gauss_legendre_lobatto(m: int) -> np.ndarray:
    """m Gauss-Legendre-Lobatto nodes on [-1, 1] (diagnostic only).

    Standard construction (endpoints plus the roots of P'_{m-1}), used to
    compare optimal ball radii against the reference concentric pattern.
    """
    if m < 2:
        raise ValueError(f"need at least 2 nodes, got {m}")
    if m == 2:
        return np.array([-1.0, 1.0])
    c = np.zeros(m)
    c[m - 1] = 1.0
    interior = np.polynomial.legendre.legroots(np.polynomial.legendre.legder(c))
    return np.concatenate([[-1.0], np.sort(interior), [1.0]])
