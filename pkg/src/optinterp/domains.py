"""Compact domains: the unit cube [-1,1]^d and the unit euclidean ball.

Membership, projection and uniform sampling.  All functions are pure; the
sampler takes an explicit numpy Generator so callers own one stream per
thread.
"""

from dataclasses import dataclass

import numpy as np

CUBE = "cube"
BALL = "ball"


@dataclass(frozen=True)
class Domain:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (CUBE, BALL):
            raise ValueError(f"domain kind must be 'cube' or 'ball', got {self.kind!r}")
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")

    def to_dict(self) -> dict:
        return {"domain": self.kind, "dim": self.dim}

    @classmethod
    def from_dict(cls, data: dict) -> "Domain":
        return cls(kind=data["domain"], dim=int(data["dim"]))


def cube(d: int) -> Domain:
    return Domain(CUBE, d)


def ball(d: int) -> Domain:
    return Domain(BALL, d)


def contains(dom: Domain, x, tol: float = 0.0):
    """True where x lies in the domain inflated by tol.

    Per-coordinate inflation for the cube, radial for the ball.  Accepts a
    single point or an (P, d) array; returns bool or bool array.
    """
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dom.dim:
        raise ValueError(f"points have {pts.shape[1]} coordinates, domain has {dom.dim}")
    if dom.kind == CUBE:
        ok = (np.abs(pts) <= 1.0 + tol).all(axis=1)
    else:
        ok = np.linalg.norm(pts, axis=1) <= 1.0 + tol
    return bool(ok[0]) if single else ok


def project(dom: Domain, x) -> np.ndarray:
    """Nearest-point projection into the domain (idempotent).

    Cube: coordinate-wise clamp to [-1, 1].  Ball: radial rescale of points
    with norm > 1; interior points are returned unchanged.
    """
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts).copy()
    if pts.shape[1] != dom.dim:
        raise ValueError(f"points have {pts.shape[1]} coordinates, domain has {dom.dim}")
    if dom.kind == CUBE:
        np.clip(pts, -1.0, 1.0, out=pts)
    else:
        norms = np.linalg.norm(pts, axis=1)
        outside = norms > 1.0
        if outside.any():
            pts[outside] /= norms[outside, None]
    return pts[0] if single else pts


def sample_uniform(dom: Domain, count: int, rng: np.random.Generator) -> np.ndarray:
    """`count` i.i.d. uniform points in the domain, shape (count, d).

    Ball sampling uses rejection from the bounding cube for d <= 3 (the
    acceptance ratio is fine there) and the normalised-Gaussian direction
    times U^(1/d) radius transform for higher d.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    d = dom.dim
    if dom.kind == CUBE:
        return rng.uniform(-1.0, 1.0, size=(count, d))
    if d <= 3:
        out = np.empty((count, d))
        have = 0
        while have < count:
            batch = rng.uniform(-1.0, 1.0, size=(2 * (count - have) + 8, d))
            keep = batch[np.linalg.norm(batch, axis=1) <= 1.0]
            take = min(count - have, keep.shape[0])
            out[have : have + take] = keep[:take]
            have += take
        return out
    g = rng.normal(size=(count, d))
    g /= np.linalg.norm(g, axis=1)[:, None]
    radii = rng.uniform(size=count) ** (1.0 / d)
    return g * radii[:, None]


def diameter(dom: Domain) -> float:
    """Euclidean diameter (2 for both supported domains' unit variants)."""
    return 2.0 if dom.kind == BALL else 2.0 * np.sqrt(dom.dim)
