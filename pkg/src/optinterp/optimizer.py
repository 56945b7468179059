"""Minimax optimisation of the mesh-approximated Lebesgue constant.

The objective max_{y in mesh} Lambda(y) is continuous but not smooth, so the
inner solver minimises a smoothed surrogate

    f_tau(X) = tau * log sum_{y in mesh} exp(Lambda_X(y) / tau)

for a decreasing temperature ladder, each stage driven by L-BFGS-B with
forward-difference gradients in the d*N node coordinates.  Feasibility is
kept by projection (exact bound constraints for the cube, radial projection
plus a quadratic infeasibility penalty for the ball).  The true mesh maximum
is tracked at every evaluation, so the returned value can never exceed the
starting one.

The outer driver runs several random starts, each refined over the nested
mesh chain m -> 2m-1, warm-starting every stage from the previous mesh's
best points, until two successive meshes agree on the Lebesgue constant to
`refine_tol`.  All starts are finally re-evaluated on the finest mesh any of
them reached, and the best one wins.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .domains import BALL, Domain, diameter, project, sample_uniform
from .fundamentals import PointSet, UnisolvenceError, fundamental_coeffs
from .lebesgue import lambda_on_mesh
from .meshes import Mesh, mesh_for, mesh_point_count, resolution_chain
from .polyspace import PolySpace, enumerate_space

_FAIL_VALUE = 1e12

# Working residual tolerance inside the optimiser.  Random starts can be too
# ill-conditioned for the strict construction tolerance; a residual of r
# perturbs Lebesgue values by about r, which is harmless against refine_tol.
# Final results are still validated by the strict public constructors.
_OPT_RESIDUAL_TOL = 1e-7


@dataclass
class InnerParams:
    """Knobs of the smoothed minimax solver.

    `taus` are temperatures relative to the current best Lebesgue constant,
    swept on the first mesh of a start; `warm_taus` is the shorter ladder
    used after a warm start on a refined mesh.  A stage stops once the best
    Lebesgue constant improves by less than `convergence` (relative) over
    `stall_iters` iterations, or at `max_iters`.
    """

    taus: tuple = (0.3, 0.1, 0.03, 0.01, 0.003, 0.001)
    warm_taus: tuple = (0.03, 0.01, 0.003, 0.001)
    max_iters: int = 200
    convergence: float = 1e-4
    stall_iters: int = 5
    fd_step: float = 1e-6
    penalty_weight: float = 1.0

    def to_dict(self) -> dict:
        return {
            "taus": list(self.taus),
            "warm_taus": list(self.warm_taus),
            "max_iters": self.max_iters,
            "convergence": self.convergence,
            "stall_iters": self.stall_iters,
            "fd_step": self.fd_step,
            "penalty_weight": self.penalty_weight,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InnerParams":
        return cls(
            taus=tuple(data["taus"]),
            warm_taus=tuple(data["warm_taus"]),
            max_iters=int(data["max_iters"]),
            convergence=float(data["convergence"]),
            stall_iters=int(data["stall_iters"]),
            fd_step=float(data["fd_step"]),
            penalty_weight=float(data["penalty_weight"]),
        )


@dataclass
class OptimConfig:
    degree: int
    dim: int
    domain: Domain
    starts: int = 10
    seed: int = 0
    refine_tol: float = 1e-3
    mesh_cap: int = 129
    max_mesh_points: int = 300_000
    inner: InnerParams = field(default_factory=InnerParams)

    def validate(self):
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if self.dim != self.domain.dim:
            raise ValueError(f"dim={self.dim} does not match domain dim={self.domain.dim}")
        if self.domain.kind == BALL and self.dim > 3:
            raise ValueError("no admissible mesh is available for the ball beyond d=3")
        if self.starts < 1:
            raise ValueError(f"starts must be >= 1, got {self.starts}")
        if self.refine_tol <= 0:
            raise ValueError(f"refine_tol must be positive, got {self.refine_tol}")

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "dim": self.dim,
            "domain": self.domain.to_dict(),
            "starts": self.starts,
            "seed": self.seed,
            "refine_tol": self.refine_tol,
            "mesh_cap": self.mesh_cap,
            "max_mesh_points": self.max_mesh_points,
            "inner": self.inner.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OptimConfig":
        return cls(
            degree=int(data["degree"]),
            dim=int(data["dim"]),
            domain=Domain.from_dict(data["domain"]),
            starts=int(data["starts"]),
            seed=int(data["seed"]),
            refine_tol=float(data["refine_tol"]),
            mesh_cap=int(data["mesh_cap"]),
            max_mesh_points=int(data["max_mesh_points"]),
            inner=InnerParams.from_dict(data["inner"]),
        )


@dataclass
class StageTrace:
    m: int
    mesh_size: int
    lam: float
    evals: int
    iterations: int

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "mesh_size": self.mesh_size,
            "lambda": self.lam,
            "evals": self.evals,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StageTrace":
        return cls(
            m=int(data["m"]),
            mesh_size=int(data["mesh_size"]),
            lam=float(data["lambda"]),
            evals=int(data["evals"]),
            iterations=int(data["iterations"]),
        )


@dataclass
class StartTrace:
    start: int
    final_lambda: float
    stages: list
    flags: list

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "final_lambda": self.final_lambda,
            "stages": [s.to_dict() for s in self.stages],
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StartTrace":
        return cls(
            start=int(data["start"]),
            final_lambda=float(data["final_lambda"]),
            stages=[StageTrace.from_dict(s) for s in data["stages"]],
            flags=list(data["flags"]),
        )


@dataclass(eq=False)
class OptimResult:
    """Best point set found, its Lebesgue constant and the per-start traces.

    `lam` equals min(t.final_lambda for t in per_start) exactly; all final
    values are evaluated on the finest mesh any start reached (`mesh_m`).
    """

    best: PointSet
    lam: float
    per_start: list
    wall_time: float
    config: OptimConfig
    mesh_m: int
    parent: str = None


@dataclass(eq=False)
class InnerResult:
    points: np.ndarray
    lam: float
    evals: int
    iterations: int
    flags: list

    def as_point_set(self, space: PolySpace, domain: Domain, meta=None) -> PointSet:
        return PointSet(points=self.points, space=space, domain=domain, meta=meta)


class _StopStage(StopIteration):
    pass


class _StallMonitor:
    """Per-iteration callback: stop a stage once lambda stops improving."""

    def __init__(self, objective, convergence, window):
        self.objective = objective
        self.convergence = convergence
        self.window = window
        self.history = []

    def __call__(self, xk):
        self.history.append(self.objective.best_lam)
        if len(self.history) > self.window:
            old = self.history[-1 - self.window]
            new = self.history[-1]
            if old - new < self.convergence * max(abs(new), 1.0):
                raise _StopStage


class _MeshObjective:
    """Smoothed Lebesgue objective on a fixed mesh, with best-found tracking.

    Gradients are forward differences; only the basis row of the perturbed
    node is recomputed per probe, the elimination and the mesh product run
    in full (the product dominates and goes through BLAS).
    """

    def __init__(self, space: PolySpace, domain: Domain, mesh: Mesh, penalty_weight: float):
        self.space = space
        self.domain = domain
        self.kind = _kernels.CHEBYSHEV if space.basis_kind == "chebyshev" else _kernels.MONOMIAL
        self.mesh_basis = np.ascontiguousarray(mesh.basis_matrix(space))
        self.penalty_weight = penalty_weight
        self.N = space.size
        self.d = space.dim_vars
        self.n_evals = 0
        self.best_lam = np.inf
        self.best_points = None
        self._prod = np.empty((self.mesh_basis.shape[0], self.N))
        self._B2 = np.empty((self.N, self.N))

    def _lam_values(self, basis_at_points):
        try:
            coeffs, _ = fundamental_coeffs(
                basis_at_points, self.space.degrees, residual_tol=_OPT_RESIDUAL_TOL
            )
        except UnisolvenceError:
            return None
        np.dot(self.mesh_basis, coeffs.T, out=self._prod)
        return _kernels.abs_row_sums(self._prod)

    def _track(self, lam, proj, row=None, row_value=None):
        if lam < self.best_lam:
            self.best_lam = lam
            pts = proj.copy()
            if row is not None:
                pts[row] = row_value
            self.best_points = pts

    def eval_points(self, raw_points):
        """(lam, lam_vector, projected, basis) at a raw configuration."""
        proj = project(self.domain, raw_points)
        B = _kernels.basis_matrix(np.ascontiguousarray(proj), self.space.exponents, self.kind)
        self.n_evals += 1
        values = self._lam_values(B)
        if values is None:
            return None, None, proj, B
        lam = float(values.max())
        self._track(lam, proj)
        return lam, values, proj, B

    @staticmethod
    def _smoothed(values, tau):
        top = values.max()
        return float(top + tau * np.log(np.exp((values - top) / tau).sum()))

    def value_and_grad(self, z, tau, h):
        pts = z.reshape(self.N, self.d)
        lam, values, proj, B = self.eval_points(pts)
        pen_rows = self.penalty_weight * ((pts - proj) ** 2).sum(axis=1)
        pen = float(pen_rows.sum())
        if lam is None:
            return _FAIL_VALUE + pen, np.zeros(z.size)
        f0 = self._smoothed(values, tau) + pen
        g = np.empty(z.size)
        cube = self.domain.kind == "cube"
        for i in range(z.size):
            r, c = divmod(i, self.d)
            # a forward probe that crosses the boundary would be projected
            # straight back and read a spurious zero slope; probe inward then
            step = h
            row_raw = pts[r].copy()
            row_raw[c] += step
            if cube:
                if row_raw[c] > 1.0:
                    step = -h
                    row_raw[c] = pts[r, c] + step
            elif pen_rows[r] == 0.0 and row_raw @ row_raw > 1.0:
                step = -h
                row_raw[c] = pts[r, c] + step
            row_proj = project(self.domain, row_raw)
            np.copyto(self._B2, B)
            self._B2[r] = _kernels.basis_matrix(
                row_proj.reshape(1, -1), self.space.exponents, self.kind
            )[0]
            self.n_evals += 1
            values_i = self._lam_values(self._B2)
            if values_i is None:
                f_i = _FAIL_VALUE
            else:
                lam_i = float(values_i.max())
                self._track(lam_i, proj, row=r, row_value=row_proj)
                pen_i = pen - float(pen_rows[r]) + self.penalty_weight * float(
                    ((row_raw - row_proj) ** 2).sum()
                )
                f_i = self._smoothed(values_i, tau) + pen_i
            g[i] = (f_i - f0) / step
        return f0, g


def _ensure_valid_start(points, objective, domain, rng, tries=3, resample=None):
    """Perturb (or resample) a numerically non-unisolvent start."""
    lam, _, proj, _ = objective.eval_points(points)
    if lam is not None:
        return proj, []
    scale = 1e-8 * diameter(domain)
    for _ in range(tries):
        candidate = project(domain, points + scale * rng.standard_normal(points.shape))
        lam, _, proj, _ = objective.eval_points(candidate)
        if lam is not None:
            return proj, ["perturbed-start"]
    if resample is not None:
        for _ in range(20):
            candidate = resample()
            lam, _, proj, _ = objective.eval_points(candidate)
            if lam is not None:
                return proj, ["resampled-start"]
    raise UnisolvenceError(
        "start configuration is not unisolvent and perturbation did not recover it"
    )


def _minimize_stages(points, objective, domain, inner, taus):
    dN = objective.N * objective.d
    bounds = [(-1.0, 1.0)] * dN if domain.kind == "cube" else None
    z = points.ravel().copy()
    iterations = 0
    flags = []
    for tau_rel in taus:
        tau = tau_rel * max(objective.best_lam, 1.0)
        monitor = _StallMonitor(objective, inner.convergence, inner.stall_iters)
        res = minimize(
            objective.value_and_grad,
            z,
            args=(tau, inner.fd_step),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            callback=monitor,
            options={"maxiter": inner.max_iters, "ftol": 1e-13, "gtol": 1e-10},
        )
        iterations += int(res.nit)
        if int(res.nit) >= inner.max_iters and "iteration-limit" not in flags:
            flags.append("iteration-limit")
        z = objective.best_points.ravel().copy()
    return iterations, flags


def _inner_minimize_raw(points, mesh, space, domain, inner, taus, rng, resample=None):
    objective = _MeshObjective(space, domain, mesh, inner.penalty_weight)
    start, flags = _ensure_valid_start(points, objective, domain, rng, resample=resample)
    iterations, stage_flags = _minimize_stages(start, objective, domain, inner, taus)
    return InnerResult(
        points=objective.best_points.copy(),
        lam=objective.best_lam,
        evals=objective.n_evals,
        iterations=iterations,
        flags=flags + stage_flags,
    )


def inner_minimize(ps: PointSet, mesh: Mesh, inner: InnerParams = None, rng=None) -> InnerResult:
    """Minimise the mesh Lebesgue constant starting from the given points.

    Monotone in the tracked value: the returned lambda never exceeds the
    start's lambda on the same mesh.  Deterministic for fixed inputs.
    """
    inner = inner or InnerParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    return _inner_minimize_raw(
        ps.points, mesh, ps.space, ps.domain, inner, inner.taus, rng
    )


def _lambda_of(points, space, mesh):
    B = _kernels.basis_matrix(
        np.ascontiguousarray(points),
        space.exponents,
        _kernels.CHEBYSHEV if space.basis_kind == "chebyshev" else _kernels.MONOMIAL,
    )
    coeffs, _ = fundamental_coeffs(B, space.degrees, residual_tol=_OPT_RESIDUAL_TOL)
    return float(lambda_on_mesh(coeffs, mesh.basis_matrix(space)).max())


def _mesh_plan(cfg: OptimConfig):
    """Resolutions to sweep: the doubling chain above n within both caps."""
    ms = []
    for m in resolution_chain(cfg.degree, cfg.mesh_cap):
        if mesh_point_count(cfg.domain, m) > cfg.max_mesh_points:
            break
        ms.append(m)
    if not ms:
        raise ValueError(
            f"no usable mesh resolution for degree {cfg.degree} under "
            f"mesh_cap={cfg.mesh_cap} and max_mesh_points={cfg.max_mesh_points}"
        )
    return ms


def _refine_over_meshes(
    pts, ms, cfg, space, rng, get_mesh, progress, label, cold_start=True, resample=None
):
    lam_prev = None
    stages = []
    flags = []
    converged = False
    for j, m in enumerate(ms):
        mesh = get_mesh(m)
        taus = cfg.inner.taus if (cold_start and j == 0) else cfg.inner.warm_taus
        res = _inner_minimize_raw(
            pts, mesh, space, cfg.domain, cfg.inner, taus, rng,
            resample=resample if j == 0 else None,
        )
        pts = res.points
        for f in res.flags:
            if f not in flags:
                flags.append(f)
        stages.append(
            StageTrace(m=m, mesh_size=mesh.size, lam=res.lam, evals=res.evals, iterations=res.iterations)
        )
        if progress:
            progress(f"{label}: mesh m={m} ({mesh.size} pts) lambda={res.lam:.6f}")
        if lam_prev is not None and abs(res.lam - lam_prev) < cfg.refine_tol:
            converged = True
            break
        lam_prev = res.lam
    if not converged:
        flags.append("refinement-cap")
    return pts, stages, flags


def optimize(cfg: OptimConfig, progress=None) -> OptimResult:
    """Multi-start minimisation of the Lebesgue constant.

    Each start samples uniform nodes, then refines over the nested mesh
    chain until the constant moves by less than cfg.refine_tol between
    meshes (or a cap stops the chain; that leaves a 'refinement-cap' flag).
    Finally every start is re-evaluated on the finest mesh reached by any
    start and the minimum wins.  Deterministic for a fixed config.
    """
    cfg.validate()
    t0 = time.perf_counter()
    space = enumerate_space(cfg.degree, cfg.dim)
    ms = _mesh_plan(cfg)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.starts)
    mesh_cache = {}

    def get_mesh(m):
        if m not in mesh_cache:
            mesh_cache[m] = mesh_for(cfg.domain, cfg.degree, m)
        return mesh_cache[m]

    states = []
    for s in range(cfg.starts):
        rng = np.random.default_rng(streams[s])
        pts = sample_uniform(cfg.domain, space.size, rng)
        pts, stages, flags = _refine_over_meshes(
            pts, ms, cfg, space, rng, get_mesh, progress, f"start {s}",
            resample=lambda: sample_uniform(cfg.domain, space.size, rng),
        )
        states.append((pts, stages, flags))

    m_star = max(state[1][-1].m for state in states)
    mesh_star = get_mesh(m_star)
    traces = []
    for s, (pts, stages, flags) in enumerate(states):
        lam_final = _lambda_of(pts, space, mesh_star)
        traces.append(StartTrace(start=s, final_lambda=lam_final, stages=stages, flags=flags))
    finals = [t.final_lambda for t in traces]
    best_idx = int(np.argmin(finals))
    best = PointSet(
        points=states[best_idx][0],
        space=space,
        domain=cfg.domain,
        meta={"seed": cfg.seed, "start": best_idx},
    )
    return OptimResult(
        best=best,
        lam=finals[best_idx],
        per_start=traces,
        wall_time=time.perf_counter() - t0,
        config=cfg,
        mesh_m=m_star,
    )


def resume(path, progress=None, **overrides) -> OptimResult:
    """Continue a stored run from its best points under an updated config.

    Refinement restarts at the stored run's final mesh resolution and moves
    up the chain from there (useful with a larger mesh_cap or tighter inner
    parameters).  The result records the source file as its parent.
    """
    from .io import load_result

    prev = load_result(path)
    cfg = replace(prev.config, **overrides)
    cfg = replace(cfg, starts=1)
    cfg.validate()
    t0 = time.perf_counter()
    space = enumerate_space(cfg.degree, cfg.dim)
    ms = [m for m in _mesh_plan(cfg) if m >= prev.mesh_m]
    if not ms:
        ms = [_mesh_plan(cfg)[-1]]
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    mesh_cache = {}

    def get_mesh(m):
        if m not in mesh_cache:
            mesh_cache[m] = mesh_for(cfg.domain, cfg.degree, m)
        return mesh_cache[m]

    pts, stages, flags = _refine_over_meshes(
        prev.best.points, ms, cfg, space, rng, get_mesh, progress, "resume", cold_start=False
    )
    m_star = stages[-1].m
    lam_final = _lambda_of(pts, space, get_mesh(m_star))
    trace = StartTrace(start=0, final_lambda=lam_final, stages=stages, flags=flags)
    best = PointSet(
        points=pts, space=space, domain=cfg.domain, meta={"seed": cfg.seed, "resumed_from": str(path)}
    )
    return OptimResult(
        best=best,
        lam=lam_final,
        per_start=[trace],
        wall_time=time.perf_counter() - t0,
        config=cfg,
        mesh_m=m_star,
        parent=str(path),
    )
